"""Source functions ``f`` on R^3 and the free resolvent ``(-Laplacian + lam)^{-1}``.

A source is any callable mapping an ``(..., 3)`` array of points to an array
of values.  Sources may additionally implement
``free_resolvent(lam, points)`` returning the exact free resolvent; the
quadrature path in :func:`free_resolvent_apply` works for every source.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import DomainError, QuadratureError

__all__ = [
    "QuadSpec",
    "GaussianSource",
    "ZeroSource",
    "sphere_rule",
    "free_resolvent_apply",
    "free_resolvent",
]


@dataclass(frozen=True)
class QuadSpec:
    """Tolerances for the adaptive radial quadrature.

    ``n_theta`` x ``n_phi`` is the starting product Gauss-Legendre /
    trapezoid rule on each sphere.  The angular rule is doubled (at most
    ``max_refine`` times) until two successive results agree; the radial
    integral is adaptive (QUADPACK).
    """

    epsabs: float = 1e-13
    epsrel: float = 1e-10
    limit: int = 200
    n_theta: int = 32
    n_phi: int = 48
    max_refine: int = 3


DEFAULT_QUAD = QuadSpec()


def sphere_rule(n_theta, n_phi):
    """Unit vectors and weights integrating exactly over S^2 (weights sum to 4 pi)."""
    u, wu = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    st = np.sqrt(1.0 - u * u)
    dirs = np.stack(
        [
            np.outer(st, np.cos(phi)),
            np.outer(st, np.sin(phi)),
            np.outer(u, np.ones_like(phi)),
        ],
        axis=-1,
    ).reshape(-1, 3)
    weights = np.outer(wu, np.full(n_phi, 2.0 * np.pi / n_phi)).ravel()
    return dirs, weights


def _as_points(points):
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] != 3:
        raise DomainError("points must have a trailing dimension of 3")
    return pts


@dataclass(frozen=True)
class ZeroSource:
    """``f = 0``."""

    def __call__(self, points):
        pts = _as_points(points)
        return np.zeros(pts.shape[:-1])

    def free_resolvent(self, lam, points):
        return self(points)


@dataclass(frozen=True)
class GaussianSource:
    """``f(y) = amplitude * exp(-|y - center|^2 / (2 width^2))``."""

    center: tuple = (0.0, 0.0, 0.0)
    width: float = 1.0
    amplitude: float = 1.0
    _c: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.width > 0.0:
            raise DomainError("Gaussian width must be positive")
        c = np.asarray(self.center, dtype=float).reshape(3)
        object.__setattr__(self, "center", tuple(float(v) for v in c))
        object.__setattr__(self, "_c", c)

    def __call__(self, points):
        pts = _as_points(points)
        r2 = np.sum((pts - self._c) ** 2, axis=-1)
        return self.amplitude * np.exp(-0.5 * r2 / self.width**2)

    def fourier(self, p):
        """Unitary Fourier transform at momentum ``p`` (``(..., 3)``)."""
        p = _as_points(p)
        p2 = np.sum(p * p, axis=-1)
        phase = np.exp(-1j * (p @ self._c))
        return self.amplitude * self.width**3 * np.exp(-0.5 * self.width**2 * p2) * phase

    def laplacian(self, points):
        pts = _as_points(points)
        r2 = np.sum((pts - self._c) ** 2, axis=-1)
        s2 = self.width**2
        return self(points) * (r2 / s2**2 - 3.0 / s2)

    @property
    def sup_norm(self):
        return abs(self.amplitude)

    def free_resolvent(self, lam, points):
        """Closed form of ``(1/4pi) int exp(-s|x-y|)/|x-y| f(y) dy``.

        With ``rho = |x - c|``, ``m = s sigma^2`` the radial reduction gives
        ``A sigma sqrt(pi/2) m / (s rho) * e^{-rho^2/2sigma^2}
        [erfcx((m - rho)/(sigma sqrt2)) - erfcx((m + rho)/(sigma sqrt2))] / 2``.
        """
        lam = float(lam)
        if not lam > 0.0:
            raise DomainError("lambda must be > 0")
        pts = _as_points(points)
        s = math.sqrt(lam)
        sig = self.width
        m = s * sig * sig
        rho = np.sqrt(np.sum((pts - self._c) ** 2, axis=-1))
        k = sig * math.sqrt(2.0)
        small = rho < 1e-3 * sig
        rho_safe = np.where(small, sig, rho)
        za = (m - rho_safe) / k
        zb = (m + rho_safe) / k
        gauss = np.exp(-0.5 * rho_safe**2 / sig**2)
        # erfcx blows up for large negative arguments; fall back to erfc there
        term_a = np.where(
            za > -5.0,
            gauss * special.erfcx(np.maximum(za, -5.0)),
            np.exp(0.5 * s * s * sig * sig - s * rho_safe) * special.erfc(za),
        )
        term_b = gauss * special.erfcx(zb)
        general = (sig * math.sqrt(math.pi / 2.0) * m / (s * rho_safe)) * 0.5 * (term_a - term_b)
        # rho -> 0: u(0) = A int_0^inf r exp(-s r - r^2/2sigma^2) dr, and the
        # radial equation gives u''(0) = (lam u(0) - f(0)) / 3
        u0 = sig * sig * (1.0 - m / sig * math.sqrt(math.pi / 2.0) * special.erfcx(m / k))
        near = u0 + (lam * u0 - 1.0) * rho**2 / 6.0
        return self.amplitude * np.where(small, near, general)


def _radial_shell_average(f, x, r, dirs, weights):
    vals = np.asarray(f(x + r * dirs), dtype=float)
    return float(weights @ vals)


def free_resolvent_apply(f, lam, x, quad: QuadSpec = DEFAULT_QUAD, full_output=False):
    """``(1/4pi) int exp(-sqrt(lam)|x-y|)/|x-y| f(y) d^3y`` by quadrature.

    Spherical coordinates centered at ``x`` turn the integrable ``1/r``
    singularity into the smooth weight ``r exp(-s r)``; the radial integral
    is adaptive and the angular product rule is refined until stable.

    Raises
    ------
    QuadratureError
        If QUADPACK reports non-convergence or the error estimate exceeds the
        requested tolerance.
    """
    lam = float(lam)
    if not lam > 0.0:
        raise DomainError("lambda must be > 0")
    x = np.asarray(x, dtype=float).reshape(3)
    s = math.sqrt(lam)
    previous = None
    for level in range(quad.max_refine + 1):
        scale_rule = 2**level
        value, err = _radial_integral(f, x, s, quad, quad.n_theta * scale_rule, quad.n_phi * scale_rule)
        if previous is not None:
            change = abs(value - previous)
            tol = max(quad.epsabs, quad.epsrel * abs(value)) * 100.0
            if change <= tol:
                break
        previous = value
    else:
        raise QuadratureError("angular rule did not converge", abs(value - previous))
    if err > max(quad.epsabs, quad.epsrel * abs(value)) * 100.0:
        raise QuadratureError("free resolvent quadrature above tolerance", err)
    if full_output:
        return value, max(err, abs(value - previous))
    return value


def _radial_integral(f, x, s, quad, n_theta, n_phi):
    dirs, weights = sphere_rule(n_theta, n_phi)

    def integrand(r):
        return r * math.exp(-s * r) * _radial_shell_average(f, x, r, dirs, weights)

    # split the half-line at the decay scale so QUADPACK sees the bulk first
    scale = 10.0 / s
    value, err = 0.0, 0.0
    for a, b in ((0.0, scale), (scale, np.inf)):
        out = integrate.quad(integrand, a, b, epsabs=quad.epsabs, epsrel=quad.epsrel,
                             limit=quad.limit, full_output=1)
        if len(out) >= 4:
            raise QuadratureError(f"radial quadrature did not converge on [{a}, {b}]: {out[3]}", out[1])
        value += out[0]
        err += out[1]
    return value / (4.0 * math.pi), err / (4.0 * math.pi)


def free_resolvent(f, lam, points, quad: QuadSpec = DEFAULT_QUAD, method="auto"):
    """Free resolvent of ``f`` at an array of points.

    ``method="auto"`` uses ``f.free_resolvent`` when the source provides a
    closed form and falls back to :func:`free_resolvent_apply` otherwise.
    """
    pts = _as_points(points)
    if method not in ("auto", "analytic", "quadrature"):
        raise DomainError(f"unknown method {method!r}")
    if method != "quadrature" and hasattr(f, "free_resolvent"):
        return np.asarray(f.free_resolvent(lam, pts), dtype=float)
    if method == "analytic":
        raise DomainError("source has no closed-form free resolvent")
    flat = pts.reshape(-1, 3)
    vals = np.array([free_resolvent_apply(f, lam, p, quad) for p in flat])
    return vals.reshape(pts.shape[:-1])
