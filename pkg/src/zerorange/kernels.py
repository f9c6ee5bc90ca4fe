"""Pointwise kernels: theta profiles, Green's functions and boundary coefficients.

Units follow the fixed-center normalization: the light particle has mass 1/2
so that ``h0 = -Laplacian``, lengths are dimensionless and the strengths
``alpha`` carry inverse-length units.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DomainError
from .macdonald import MacdonaldOrder, log_macdonald_k, macdonald_k

__all__ = [
    "ThetaKind",
    "ThetaProfile",
    "MassModel",
    "MacdonaldOrder",
    "theta_eval",
    "macdonald_k",
    "g_lambda",
    "delta_lambda_theta",
    "green_free_kernel",
    "green_mass_kernel",
    "a_function",
    "b_apply_point",
    "phi_weight",
]


class ThetaKind(str, enum.Enum):
    EXPONENTIAL = "exponential"
    INDICATOR = "indicator"
    SMOOTH_BUMP = "smooth_bump"
    LOCAL_ZERO = "local_zero"
    RISING_EXPONENTIAL = "rising_exponential"


# The bump is supported on [0, _BUMP_SUPPORT * b]; a C^1 profile vanishing at
# r = b cannot stay above 1 - r/b near r = b, so the support has to be wider.
_BUMP_SUPPORT = 2.0


@dataclass(frozen=True)
class ThetaProfile:
    """Regularizing profile ``theta`` on ``(0, inf)``.

    Kinds
    -----
    ``exponential``
        ``exp(-r/b)``; ``b = inf`` gives ``theta = 1``.
    ``indicator``
        1 on ``r < b``, 0 otherwise.
    ``smooth_bump``
        ``exp(1 - 1/(1 - (r/L)^2))`` for ``r < L = 2b`` and 0 beyond.  It is
        C-infinity, equals ``1 - (r/L)^2 + O(r^4)`` at the origin
        (so ``theta'(0) = 0``) and satisfies ``1 - r/b <= theta <= 1``.
    ``rising_exponential``
        ``2 - exp(-r/b)``, the admissible profile with ``theta'(0) = +1/b``.
    ``local_zero``
        ``theta = 0``: the classical local point interaction.  Not admissible
        in the sense of the two-sided bound; it is kept as the reference model.

    Every kind except ``local_zero`` satisfies ``1 - r/b <= theta(r) <= 1 + r/b``.
    """

    kind: ThetaKind
    b: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ThetaKind(self.kind))
        if not self.b > 0.0:
            raise DomainError(f"theta range b must be positive, got {self.b!r}")
        if math.isinf(self.b) and self.kind not in (ThetaKind.EXPONENTIAL, ThetaKind.LOCAL_ZERO):
            raise DomainError("b = inf only allowed for the exponential profile")

    @classmethod
    def exponential(cls, b):
        return cls(ThetaKind.EXPONENTIAL, b)

    @classmethod
    def indicator(cls, b):
        return cls(ThetaKind.INDICATOR, b)

    @classmethod
    def smooth_bump(cls, b):
        return cls(ThetaKind.SMOOTH_BUMP, b)

    @classmethod
    def rising_exponential(cls, b):
        return cls(ThetaKind.RISING_EXPONENTIAL, b)

    @classmethod
    def local_zero(cls):
        return cls(ThetaKind.LOCAL_ZERO, 1.0)

    @property
    def derivative_at_zero(self) -> float:
        if self.kind is ThetaKind.EXPONENTIAL:
            return -1.0 / self.b
        if self.kind is ThetaKind.RISING_EXPONENTIAL:
            return 1.0 / self.b
        return 0.0

    @property
    def support_radius(self) -> float:
        """Radius beyond which theta vanishes identically (inf if never)."""
        if self.kind is ThetaKind.INDICATOR:
            return self.b
        if self.kind is ThetaKind.SMOOTH_BUMP:
            return _BUMP_SUPPORT * self.b
        if self.kind is ThetaKind.LOCAL_ZERO:
            return 0.0
        return math.inf

    def __call__(self, r):
        return theta_eval(self, r)

    def to_dict(self):
        return {"kind": self.kind.value, "b": self.b}

    @classmethod
    def from_dict(cls, data):
        kind = ThetaKind(data["kind"])
        if kind is ThetaKind.LOCAL_ZERO:
            return cls.local_zero()
        return cls(kind, float(data["b"]))


@dataclass(frozen=True)
class MassModel:
    """Light mass ``m_light`` and mass ratio ``eta = m/M``."""

    eta: float
    m_light: float = 0.5

    def __post_init__(self):
        if not self.eta > 0.0:
            raise DomainError(f"mass ratio eta must be positive, got {self.eta!r}")
        if not self.m_light > 0.0:
            raise DomainError(f"light mass must be positive, got {self.m_light!r}")


def _positive(name, value):
    arr = np.asarray(value, dtype=float)
    if np.any(~(arr > 0.0)):
        raise DomainError(f"{name} must be > 0")
    return arr


def _unwrap(arr):
    return float(arr) if arr.ndim == 0 else arr


def theta_eval(profile: ThetaProfile, r):
    """Evaluate ``theta(r)`` for ``r > 0`` (scalar or array)."""
    r = _positive("r", r)
    kind, b = profile.kind, profile.b
    if kind is ThetaKind.EXPONENTIAL:
        out = np.exp(-r / b)
    elif kind is ThetaKind.RISING_EXPONENTIAL:
        out = 2.0 - np.exp(-r / b)
    elif kind is ThetaKind.INDICATOR:
        out = np.where(r < b, 1.0, 0.0)
    elif kind is ThetaKind.SMOOTH_BUMP:
        x2 = (r / (_BUMP_SUPPORT * b)) ** 2
        inside = x2 < 1.0
        safe = np.where(inside, x2, 0.0)
        # 1 - 1/(1-x^2) = -x^2/(1-x^2)
        out = np.where(inside, np.exp(-safe / (1.0 - safe)), 0.0)
    else:
        out = np.zeros_like(r)
    return _unwrap(out)


def _theta_minus_one(profile: ThetaProfile, r):
    """``theta(r) - 1`` without cancellation for the exponential kinds."""
    if profile.kind is ThetaKind.EXPONENTIAL:
        return np.expm1(-r / profile.b)
    if profile.kind is ThetaKind.RISING_EXPONENTIAL:
        return -np.expm1(-r / profile.b)
    if profile.kind is ThetaKind.SMOOTH_BUMP:
        x2 = (r / (_BUMP_SUPPORT * profile.b)) ** 2
        inside = x2 < 1.0
        safe = np.where(inside, x2, 0.0)
        return np.where(inside, np.expm1(-safe / (1.0 - safe)), -1.0)
    return np.asarray(theta_eval(profile, r)) - 1.0


def g_lambda(r, lam):
    """``exp(-sqrt(lam) r) / r``."""
    r = _positive("r", r)
    lam = float(lam)
    if not lam > 0.0:
        raise DomainError("lambda must be > 0")
    return _unwrap(np.exp(-math.sqrt(lam) * r) / r)


def delta_lambda_theta(profile: ThetaProfile, r, lam):
    """Off-diagonal boundary coefficient ``(theta(r) - exp(-sqrt(lam) r)) / r``."""
    r = _positive("r", r)
    lam = float(lam)
    if not lam > 0.0:
        raise DomainError("lambda must be > 0")
    s = math.sqrt(lam)
    # theta - e^{-sr} = (theta - 1) + (1 - e^{-sr}); keeps accuracy for sr -> 0
    out = _theta_minus_one(profile, r) / r - np.expm1(-s * r) / r
    return _unwrap(out)


def _distance(x, y):
    d = float(np.linalg.norm(np.ravel(x) - np.ravel(y)))
    return d


def _green_log(dim, lam, d):
    """log of the -Laplacian+lam Green's function in R^dim at distance d."""
    nu = dim / 2.0 - 1.0
    s = math.sqrt(lam)
    return (-(dim / 2.0) * math.log(2.0 * math.pi) + nu * math.log(s / d)
            + log_macdonald_k(nu, s * d))


def green_free_kernel(x, y, lam):
    """Kernel of ``(-Laplacian + lam)^{-1}`` in ``R^{3N}``.

    ``x`` and ``y`` are flat arrays (or ``(N, 3)`` arrays) of equal length
    ``3N``.  Evaluated in log space so that large ``N`` does not overflow.
    """
    x = np.ravel(np.asarray(x, dtype=float))
    y = np.ravel(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.size % 3 or x.size == 0:
        raise DomainError("points must both lie in R^{3N}, N >= 1")
    lam = float(lam)
    if not lam > 0.0:
        raise DomainError("lambda must be > 0")
    d = _distance(x, y)
    if d == 0.0:
        raise DomainError("green kernel is singular at coincident points")
    return math.exp(_green_log(x.size, lam, d))


def green_mass_kernel(x, X, y, Y, model: MassModel, lam):
    """Kernel of ``(H0 + lam)^{-1}`` for a light particle and ``N`` heavy ones.

    Implements the displayed closed form with weighted distance
    ``sqrt(|x-y|^2 + eta |X-Y|^2)`` and Macdonald order ``(3N+1)/2``.
    """
    x = np.ravel(np.asarray(x, dtype=float))
    y = np.ravel(np.asarray(y, dtype=float))
    X = np.ravel(np.asarray(X, dtype=float))
    Y = np.ravel(np.asarray(Y, dtype=float))
    if x.size != 3 or y.size != 3 or X.shape != Y.shape or X.size % 3:
        raise DomainError("expected x, y in R^3 and X, Y in R^{3N}")
    lam = float(lam)
    if not lam > 0.0:
        raise DomainError("lambda must be > 0")
    n_heavy = X.size // 3
    eta, m = model.eta, model.m_light
    d2 = float(np.sum((x - y) ** 2) + eta * np.sum((X - Y) ** 2))
    if d2 == 0.0:
        raise DomainError("green kernel is singular at coincident configurations")
    nu = (3 * n_heavy + 1) / 2.0
    k2 = 2.0 * m * lam
    log_val = (-1.5 * n_heavy * math.log(eta)
               - 1.5 * (n_heavy + 1) * math.log(2.0 * math.pi)
               + 0.5 * nu * math.log(k2 / d2)
               + log_macdonald_k(nu, math.sqrt(k2 * d2)))
    return math.exp(log_val)


def _pair_distance(a, b, what):
    d = _distance(a, b)
    if d == 0.0:
        raise DomainError(f"coincident {what}")
    return d


def a_function(z, spectators, alpha, gamma, profile: ThetaProfile):
    """Position-dependent boson coupling ``A(z, y_1..y_{N-2})``.

    ``alpha + gamma sum_k theta(|y_k - z|)/|y_k - z|
    + (gamma/2) sum_{k<l} theta(|y_k - y_l|)/|y_k - y_l|``.
    """
    z = np.asarray(z, dtype=float)
    ys = [np.asarray(y, dtype=float) for y in spectators]
    total = float(alpha)
    for y in ys:
        r = _pair_distance(y, z, "spectator and pair position")
        total += gamma * theta_eval(profile, r) / r
    for yk, yl in combinations(ys, 2):
        r = _pair_distance(yk, yl, "spectator positions")
        total += 0.5 * gamma * theta_eval(profile, r) / r
    return total


def b_apply_point(i, xi_values, z, others, alphas, gamma, profile: ThetaProfile):
    """Pointwise value of ``(B xi)_i`` at light position ``z``.

    Parameters
    ----------
    i : int
        Center index.
    xi_values : sequence of float
        Charge values ``xi_k`` already evaluated at the argument slot of
        center ``i`` (the literal substitution ``xi_k(z, X_i)``).
    z : array_like
        Common position of the light particle and heavy particle ``i``.
    others : sequence
        Heavy positions ``x_k``, one per center; entry ``i`` is ignored.
    alphas : sequence of float
    gamma : float
    profile : ThetaProfile
    """
    xi_values = np.asarray(xi_values, dtype=float)
    z = np.asarray(z, dtype=float)
    total = alphas[i] * xi_values[i]
    for k, xk in enumerate(others):
        if k == i:
            continue
        r = _pair_distance(xk, z, "heavy position and z")
        total += gamma * theta_eval(profile, r) / r * xi_values[k]
    return float(total)


def phi_weight(config, m_d):
    """Dirichlet-form ground-state weight ``(1/4pi) sum_{i<j} exp(-m r_ij)/r_ij``."""
    if not m_d >= 0.0:
        raise DomainError("m_D must be >= 0")
    pts = [np.asarray(p, dtype=float) for p in config]
    total = 0.0
    for a, b in combinations(pts, 2):
        r = _pair_distance(a, b, "points")
        total += math.exp(-m_d * r) / r
    return total / (4.0 * math.pi)
