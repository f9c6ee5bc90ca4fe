"""Critical couplings for the boson gas and the light-particle/heavy-gas model.

The boson threshold is ``gamma_c(N) = 2 - 8 sqrt3 / (pi (N-2) (8 + sqrt3 (N-3)))``
(``N >= 3``); the mass-ratio threshold is

    gamma_hat_c(N, eta) = (2(eta+1)/pi) arcsin(1/(eta+1))
                          - 2 sqrt(eta(eta+2)) / (pi (N-1) (eta+1)),

whose supremum over ``eta > 0`` is 1 (attained as ``eta -> 0``) and whose
infimum is ``(2/pi)(N-2)/(N-1)`` (``eta -> inf``).  Near ``eta = 0`` the
approach is only like ``sqrt(eta)``:
``gamma_hat_c = 1 - (2/pi) sqrt(2 eta) (1 + 1/(N-1)) + O(eta)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .kernels import ThetaProfile

__all__ = [
    "EtaLimit",
    "CriticalityQuery",
    "gamma_c_bosons",
    "gamma_hat_c",
    "gamma_hat_extrema",
    "gamma_hat_sup_extrapolated",
    "gamma_hat_inf_limit",
    "dirichlet_special_case",
]


class EtaLimit(str, enum.Enum):
    """Limit markers for the mass ratio."""

    ZERO = "0+"
    INFINITY = "inf"


@dataclass(frozen=True)
class CriticalityQuery:
    N: int
    eta: float | EtaLimit = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise DomainError("N must be an integer >= 2")
        if not isinstance(self.eta, EtaLimit) and not self.eta > 0.0:
            raise DomainError("eta must be positive or a limit marker")
        if not self.gamma > 0.0:
            raise DomainError("gamma must be positive")

    @property
    def gamma_hat_c(self):
        return gamma_hat_c(self.N, self.eta)

    @property
    def above_threshold(self):
        return self.gamma > self.gamma_hat_c


def _check_n(N, minimum):
    if isinstance(N, bool) or int(N) != N or N < minimum:
        raise DomainError(f"N must be an integer >= {minimum}, got {N!r}")
    return int(N)


def gamma_c_bosons(N) -> float:
    """Critical coupling of the regularized N-boson gas (``N >= 3``)."""
    N = _check_n(N, 3)
    s3 = math.sqrt(3.0)
    return 2.0 - 8.0 * s3 / (math.pi * (N - 2) * (8.0 + s3 * (N - 3)))


def gamma_hat_inf_limit(N) -> float:
    """``inf_eta gamma_hat_c(N, eta) = (2/pi)(N-2)/(N-1)``."""
    N = _check_n(N, 2)
    return 2.0 / math.pi * (N - 2) / (N - 1)


def gamma_hat_c(N, eta) -> float:
    """Critical coupling for a light particle interacting with ``N`` heavy ones.

    ``eta`` may be an :class:`EtaLimit` marker, in which case the closed-form
    limit is returned.
    """
    N = _check_n(N, 2)
    if isinstance(eta, EtaLimit) or eta in ("0+", "inf"):
        eta = EtaLimit(eta)
        return 1.0 if eta is EtaLimit.ZERO else gamma_hat_inf_limit(N)
    eta = float(eta)
    if not (eta > 0.0 and math.isfinite(eta)):
        raise DomainError(f"eta must be a finite positive real, got {eta!r}")
    e1 = eta + 1.0
    first = 2.0 * e1 / math.pi * math.asin(1.0 / e1)
    # sqrt(eta(eta+2))/(eta+1) = sqrt(1 - 1/(eta+1)^2), written to avoid overflow
    second = 2.0 * math.sqrt(eta / e1) * math.sqrt((eta + 2.0) / e1) / (math.pi * (N - 1))
    return first - second


def _check_grid(eta_grid):
    grid = np.asarray(eta_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(grid <= 0.0) or np.any(np.diff(grid) <= 0.0):
        raise DomainError("eta grid must be positive and strictly increasing")
    if math.log10(grid[-1] / grid[0]) < 12.0 - 1e-9:
        raise DomainError("eta grid must span at least 12 decades")
    return grid


def gamma_hat_extrema(N, eta_grid):
    """``(min, max)`` of ``gamma_hat_c(N, .)`` over the grid points."""
    grid = _check_grid(eta_grid)
    vals = np.array([gamma_hat_c(N, e) for e in grid])
    return float(vals.min()), float(vals.max())


def gamma_hat_sup_extrapolated(N, eta_grid, n_points=4):
    """Cross-check of the supremum: extrapolate to ``eta = 0`` in ``sqrt(eta)``.

    Fits a polynomial in ``t = sqrt(eta)`` through the ``n_points`` smallest
    grid points and returns its value at ``t = 0``.
    """
    grid = _check_grid(eta_grid)[:n_points]
    t = np.sqrt(grid)
    vals = np.array([gamma_hat_c(N, e) for e in grid])
    coef = np.polyfit(t, vals, deg=min(2, t.size - 1))
    return float(np.polyval(coef, 0.0))


def dirichlet_special_case(m_d):
    """Parameters ``(alpha, gamma, theta)`` reproducing the Dirichlet-form operator.

    Returns ``(-m_d, 2, exp(-m_d r))``; ``m_d = 0`` gives ``theta = 1``
    (exponential profile with infinite range).  The operator ``-Delta_m``
    obtained from the Dirichlet form with weight :func:`~zerorange.kernels.phi_weight`
    coincides with the regularized Hamiltonian for these parameters.
    Since ``gamma_c(N) < 2`` for every ``N >= 3``, ``gamma = 2`` is always
    supercritical.
    """
    m_d = float(m_d)
    if not (m_d >= 0.0 and math.isfinite(m_d)):
        raise DomainError("m_D must be a finite nonnegative real")
    b = math.inf if m_d == 0.0 else 1.0 / m_d
    return -m_d, 2.0, ThetaProfile.exponential(b)
