"""Fixed-center Hamiltonian with non-local point interactions.

For centers ``x_1..x_N`` with strengths ``alpha_i`` and profile ``theta`` the
resolvent at ``-lam`` is

    (h + lam)^{-1} f = w + sum_i q_i g^lam(. - x_i),   w = (h0 + lam)^{-1} f,

where the charges solve ``M(lam) q = (w(x_1), ..., w(x_N))`` with the
boundary matrix

    M_ii = alpha_i + sqrt(lam),   M_ij = (theta(r_ij) - exp(-sqrt(lam) r_ij)) / r_ij.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FitError, IllConditioned, SingularBoundaryMatrix
from .kernels import ThetaProfile, delta_lambda_theta, g_lambda, theta_eval
from .sources import DEFAULT_QUAD, QuadSpec, free_resolvent, free_resolvent_apply, sphere_rule

__all__ = [
    "CenterConfig",
    "BoundaryMatrix",
    "ResolventOutput",
    "boundary_matrix",
    "solve_charges",
    "free_resolvent_apply",
    "resolvent_apply",
    "boundary_probe",
    "CONDITION_CAP",
]

CONDITION_CAP = 1e12
# sigma_min / sigma_max below this is treated as exact singularity
SINGULAR_RTOL = 1e-14


@dataclass(frozen=True)
class CenterConfig:
    """Center positions (``(N, 3)``), strengths ``alpha_i`` and profile."""

    centers: np.ndarray
    strengths: np.ndarray
    profile: ThetaProfile = field(default_factory=ThetaProfile.local_zero)

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float).reshape(-1, 3)
        a = np.asarray(self.strengths, dtype=float).reshape(-1)
        if c.shape[0] != a.shape[0]:
            raise DomainError("one strength per center is required")
        if not np.all(np.isfinite(c)) or not np.all(np.isfinite(a)):
            raise DomainError("centers and strengths must be finite")
        c.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "strengths", a)
        d = self.distances
        off = d[~np.eye(len(a), dtype=bool)]
        if off.size and not np.all(off > 0.0):
            raise DomainError("centers must be pairwise distinct")

    @property
    def n(self) -> int:
        return self.strengths.shape[0]

    @property
    def distances(self) -> np.ndarray:
        diff = self.centers[:, None, :] - self.centers[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=-1))

    @classmethod
    def two_center(cls, alpha1, alpha2, separation, profile, origin=(0.0, 0.0, 0.0),
                   axis=(1.0, 0.0, 0.0)):
        o = np.asarray(origin, dtype=float)
        u = np.asarray(axis, dtype=float)
        u = u / np.linalg.norm(u)
        return cls(np.stack([o, o + separation * u]), [alpha1, alpha2], profile)

    def transformed(self, rotation=None, translation=None):
        """Rigidly moved copy."""
        c = self.centers
        if rotation is not None:
            c = c @ np.asarray(rotation, dtype=float).T
        if translation is not None:
            c = c + np.asarray(translation, dtype=float)
        return CenterConfig(c, self.strengths, self.profile)


@dataclass(frozen=True)
class BoundaryMatrix:
    lam: float
    entries: np.ndarray

    @property
    def n(self):
        return self.entries.shape[0]


def _check_lambda(lam):
    lam = float(lam)
    if not (lam > 0.0 and math.isfinite(lam)):
        raise DomainError(f"lambda must be a finite positive real, got {lam!r}")
    return lam


def boundary_matrix(config: CenterConfig, lam) -> BoundaryMatrix:
    """``M(lam)`` with ``alpha_i + sqrt(lam)`` on the diagonal."""
    lam = _check_lambda(lam)
    n = config.n
    entries = np.zeros((n, n))
    if n:
        iu = np.triu_indices(n, 1)
        r = config.distances[iu]
        if r.size:
            vals = np.atleast_1d(delta_lambda_theta(config.profile, r, lam))
            entries[iu] = vals
            entries[(iu[1], iu[0])] = vals
        entries[np.diag_indices(n)] = config.strengths + math.sqrt(lam)
    entries.setflags(write=False)
    return BoundaryMatrix(lam, entries)


def solve_charges(M: BoundaryMatrix, rhs, condition_cap=CONDITION_CAP):
    """Solve ``M q = rhs``.

    Raises
    ------
    SingularBoundaryMatrix
        ``M`` is numerically singular (``-lam`` is an eigenvalue of ``h``).
    IllConditioned
        The 2-norm condition number exceeds ``condition_cap``.
    """
    A = M.entries
    rhs = np.asarray(rhs)
    if rhs.shape != (M.n,):
        raise DomainError(f"rhs must have shape ({M.n},)")
    if M.n == 0:
        return np.zeros(0, dtype=rhs.dtype)
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= SINGULAR_RTOL * sv[0] or sv[-1] == 0.0:
        raise SingularBoundaryMatrix(M.lam, float(sv[-1]))
    cond = sv[0] / sv[-1]
    if cond > condition_cap:
        raise IllConditioned(M.lam, float(cond))
    q = np.linalg.solve(A, rhs)
    # one step of iterative refinement keeps the residual at rounding level
    q = q + np.linalg.solve(A, rhs - A @ q)
    return q


class ResolventOutput:
    """``psi = w + sum_i q_i g^lam(. - x_i)`` produced by :func:`resolvent_apply`.

    Calling the object evaluates ``psi`` at points away from the centers;
    ``smooth_part`` evaluates ``w``.  When the source has a closed-form free
    resolvent, so does the output, which allows applying a second resolvent
    to it exactly.
    """

    def __init__(self, charges, lam, centers, source, quad: QuadSpec = DEFAULT_QUAD,
                 method="auto"):
        self.charges = np.asarray(charges)
        self.lam = float(lam)
        self.centers = np.asarray(centers, dtype=float).reshape(-1, 3)
        self.source = source
        self.quad = quad
        self.method = method

    def smooth_part(self, points):
        return free_resolvent(self.source, self.lam, points, self.quad, self.method)

    def singular_part(self, points):
        pts = np.asarray(points, dtype=float)
        out = np.zeros(pts.shape[:-1], dtype=np.result_type(self.charges, float))
        s = math.sqrt(self.lam)
        for q, c in zip(self.charges, self.centers):
            r = np.sqrt(np.sum((pts - c) ** 2, axis=-1))
            out = out + q * np.exp(-s * r) / r
        return out

    def __call__(self, points):
        return self.smooth_part(points) + self.singular_part(points)

    def free_resolvent(self, mu, points):
        """Exact ``(h0 + mu)^{-1} psi`` using the first resolvent identity."""
        if not hasattr(self.source, "free_resolvent"):
            raise DomainError("source has no closed-form free resolvent")
        mu = _check_lambda(mu)
        pts = np.asarray(points, dtype=float)
        lam = self.lam
        s, t = math.sqrt(mu), math.sqrt(lam)
        if mu == lam:
            raise DomainError("squared resolvent at equal spectral parameters not supported")
        smooth = (self.source.free_resolvent(mu, pts) - self.source.free_resolvent(lam, pts)) / (lam - mu)
        out = np.asarray(smooth, dtype=np.result_type(self.charges, float))
        for q, c in zip(self.charges, self.centers):
            r = np.sqrt(np.sum((pts - c) ** 2, axis=-1))
            out = out + q * _g_difference(r, s, t) / (lam - mu)
        return out


def _g_difference(r, s, t):
    """``exp(-s r)/r - exp(-t r)/r`` with the finite value ``t - s`` at ``r = 0``."""
    r = np.asarray(r, dtype=float)
    safe = np.where(r > 0.0, r, 1.0)
    val = np.exp(-s * safe) * -np.expm1(-(t - s) * safe) / safe
    return np.where(r > 0.0, val, t - s)


def resolvent_apply(config: CenterConfig, lam, f, quad: QuadSpec = DEFAULT_QUAD, method="auto",
                    condition_cap=CONDITION_CAP, require_above_spectrum=False) -> ResolventOutput:
    """Apply ``(h + lam)^{-1}`` to the source ``f``.

    The right-hand side ``w(x_i)`` comes from the closed form of the source
    when available (``method="auto"``) and from radial-angular quadrature
    centered at ``x_i`` otherwise.  Any ``lam`` in the resolvent set works;
    ``require_above_spectrum`` additionally enforces ``lam > lambda_0``.
    """
    lam = _check_lambda(lam)
    if require_above_spectrum:
        from .spectral import lower_bound

        lam0 = lower_bound(config)
        if not lam > lam0:
            raise DomainError(f"lambda={lam} is not above the spectral threshold {lam0}")
    M = boundary_matrix(config, lam)
    if config.n:
        if method == "quadrature" or not hasattr(f, "free_resolvent"):
            rhs = np.array([free_resolvent_apply(f, lam, x, quad) for x in config.centers])
        else:
            rhs = np.asarray(f.free_resolvent(lam, config.centers))
        q = solve_charges(M, rhs, condition_cap)
    else:
        q = np.zeros(0)
    return ResolventOutput(q, lam, config.centers, f, quad, method)


def spherical_average(field_fn, center, radius, n_theta=16, n_phi=24):
    dirs, weights = sphere_rule(n_theta, n_phi)
    vals = np.asarray(field_fn(np.asarray(center, dtype=float) + radius * dirs))
    return (weights @ vals) / (4.0 * math.pi)


def boundary_probe(out: ResolventOutput, config: CenterConfig, i, radii, rtol=1e-3, degree=2):
    """Fit ``c_{-1}/rho + c_0 + c_1 rho + ... + c_degree rho^degree`` to spherical averages.

    The averages of the field over spheres of radius ``rho`` around ``x_i``
    are fitted by least squares; the polynomial terms absorb the ``O(rho)``
    corrections (``q_i lam rho / 2`` from ``g^lam`` itself and the curvature
    of the regular part), which would otherwise bias ``c_0``.

    Returns ``(c_{-1}, c_0)``; for a field in the operator domain these
    approximate ``q_i`` and ``alpha_i q_i + sum_j theta(r_ij)/r_ij q_j``.

    Raises
    ------
    FitError
        If the relative fit residual exceeds ``rtol``.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size < degree + 2:
        raise DomainError(f"need at least {degree + 2} radii")
    if not (np.all(radii > 0.0) and np.all(np.diff(radii) < 0.0)):
        raise DomainError("radii must be positive and strictly decreasing")
    if config.n > 1:
        sep = np.min(config.distances[~np.eye(config.n, dtype=bool)])
        if radii[0] >= 0.5 * sep:
            raise DomainError("probe radii must be below half the minimal center separation")
    x = config.centers[i]
    avgs = np.array([spherical_average(out, x, rho) for rho in radii])
    design = np.stack([1.0 / radii] + [radii**k for k in range(degree + 1)], axis=1)
    # row scaling by rho balances the 1/rho column
    w = radii[:, None]
    coef, *_ = np.linalg.lstsq(design * w, avgs * radii, rcond=None)
    resid = design @ coef - avgs
    rel = float(np.linalg.norm(resid * radii) / max(np.linalg.norm(avgs * radii), 1e-300))
    if rel > rtol:
        raise FitError("boundary probe fit", rel)
    return float(coef[0]), float(coef[1])


def boundary_regular_prediction(config: CenterConfig, charges, i):
    """``alpha_i q_i + sum_{j != i} theta(r_ij)/r_ij q_j``."""
    total = config.strengths[i] * charges[i]
    for j in range(config.n):
        if j != i:
            r = config.distances[i, j]
            total += theta_eval(config.profile, r) / r * charges[j]
    return total


def g_field(center, lam):
    """``x -> g^lam(|x - center|)`` as a callable on point arrays."""
    c = np.asarray(center, dtype=float)

    def fn(points):
        r = np.sqrt(np.sum((np.asarray(points, dtype=float) - c) ** 2, axis=-1))
        return g_lambda(r, lam)

    return fn
