"""Bound states of the fixed-center model.

``-lam`` is an eigenvalue exactly when ``M(lam)`` is singular.  Because
``dM/dlam = E / (2 sqrt(lam))`` with ``E_ij = exp(-sqrt(lam) r_ij)`` positive
definite, every ordered eigenvalue ``mu_k(lam)`` of ``M`` is nondecreasing and
tends to ``+inf``: each eigencurve has at most one zero and the zeros can be
bracketed one curve at a time.

``lambda0`` is taken to be the deepest root, i.e. ``h >= -lambda0``.  This is
the usual Krein-formula reading for finitely many centers; the continuous
spectrum is ``[0, inf)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment

from .errors import MaxExpansionExceeded
from .pointop import CenterConfig, boundary_matrix

__all__ = [
    "SpectralResult",
    "eigencurve",
    "eigencurves",
    "bound_states",
    "lower_bound",
    "scattering_length",
]

_S_FLOOR = 1e-12


@dataclass(frozen=True)
class SpectralResult:
    energies: np.ndarray
    charge_vectors: list
    lambda0: float
    multiplicities: tuple = ()

    @property
    def count(self):
        return int(self.energies.size)


def _eig_s(config, s):
    return np.linalg.eigvalsh(boundary_matrix(config, s * s).entries)


def eigencurves(config: CenterConfig, lambda_grid, match=True):
    """Eigenvalues of ``M(lam)`` on a strictly increasing grid.

    With ``match=True`` columns follow analytic branches (eigenvector overlap
    between neighbouring grid points, so curves may cross); otherwise column
    ``k`` is the ``k``-th smallest eigenvalue.  Columns are labelled by their
    order at the first grid point.
    """
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0.0) or np.any(grid <= 0.0):
        raise ValueError("lambda grid must be positive and strictly increasing")
    n = config.n
    out = np.empty((grid.size, n))
    prev_vecs = None
    for g, lam in enumerate(grid):
        vals, vecs = np.linalg.eigh(boundary_matrix(config, lam).entries)
        if match and prev_vecs is not None:
            overlap = np.abs(prev_vecs.T @ vecs)
            # nearest-value continuity breaks ties between equal overlaps
            cost = -overlap + 1e-9 * np.abs(out[g - 1][:, None] - vals[None, :])
            rows, cols = linear_sum_assignment(cost)
            vals = vals[cols[np.argsort(rows)]]
            vecs = vecs[:, cols[np.argsort(rows)]]
        out[g] = vals
        prev_vecs = vecs
    return out


def eigencurve(config: CenterConfig, k, lambda_grid):
    """``k``-th eigencurve of ``M(lam)``, matched by continuity along the grid."""
    return eigencurves(config, lambda_grid, match=True)[:, k]


def _bracket_curve(config, k, s_hi, max_expansions):
    for _ in range(max_expansions):
        if _eig_s(config, s_hi)[k] > 0.0:
            return s_hi
        s_hi *= 2.0
    raise MaxExpansionExceeded(f"eigencurve {k} still negative at lambda={s_hi * s_hi:.3e}")


def _curve_roots(config, lambda_max, rtol, max_expansions):
    n = config.n
    if n == 0:
        return np.zeros(0)
    lo_vals = _eig_s(config, _S_FLOOR)
    s_max = math.sqrt(lambda_max) if lambda_max else 1.0
    roots = []
    for k in range(n):
        if lo_vals[k] >= 0.0:
            continue
        s_hi = _bracket_curve(config, k, s_max, max_expansions)
        # relative tolerance rtol on lam = s^2 means rtol/2 on s
        s_root = brentq(lambda s: _eig_s(config, s)[k], _S_FLOOR, s_hi,
                        xtol=1e-300, rtol=max(0.5 * rtol, 4.5e-16), maxiter=500)
        roots.append(s_root * s_root)
    return np.array(roots)


def bound_states(config: CenterConfig, lambda_max=None, rtol=1e-10, max_expansions=200) -> SpectralResult:
    """All eigenvalues ``E = -lam* < 0`` of the fixed-center Hamiltonian.

    Each eigencurve with a negative value near ``lam = 0`` has exactly one
    root, located by bracketed root finding to relative tolerance ``rtol``.
    ``lambda_max`` is the initial upper bracket; it is doubled while a curve
    is still negative.  Coincident roots are merged and reported with an
    orthonormal basis of the null space.
    """
    roots = np.sort(_curve_roots(config, lambda_max, rtol, max_expansions))[::-1]
    energies, vectors, mult = [], [], []
    i = 0
    while i < roots.size:
        j = i + 1
        while j < roots.size and abs(roots[j] - roots[i]) <= 10 * rtol * roots[i]:
            j += 1
        group = roots[i:j]
        lam = float(np.mean(group))
        vals, vecs = np.linalg.eigh(boundary_matrix(config, lam).entries)
        idx = np.argsort(np.abs(vals))[: j - i]
        basis = vecs[:, np.sort(idx)]
        for col in basis.T:
            energies.append(-lam)
            vectors.append(col / np.linalg.norm(col))
        mult.append(j - i)
        i = j
    energies = np.array(energies)
    lambda0 = float(-energies.min()) if energies.size else 0.0
    return SpectralResult(energies, vectors, lambda0, tuple(mult))


def lower_bound(config: CenterConfig, rtol=1e-12, max_expansions=200) -> float:
    """Threshold ``lambda0 >= 0`` with ``M(lam)`` positive definite for ``lam > lambda0``.

    Only the lowest eigencurve matters: it bounds all others from below.
    """
    if config.n == 0:
        return 0.0
    if _eig_s(config, _S_FLOOR)[0] >= 0.0:
        return 0.0
    s_hi = _bracket_curve(config, 0, 1.0, max_expansions)
    s_root = brentq(lambda s: _eig_s(config, s)[0], _S_FLOOR, s_hi,
                    xtol=1e-300, rtol=max(0.5 * rtol, 4.5e-16), maxiter=500)
    return s_root * s_root


def scattering_length(alpha) -> float:
    """``a = -1/alpha``; ``alpha = 0`` gives a signed infinity (unitary limit)."""
    alpha = float(alpha)
    if alpha == 0.0:
        return -math.copysign(math.inf, alpha)
    if math.isinf(alpha):
        return -math.copysign(0.0, alpha)
    return -1.0 / alpha
