"""Merging of two centers, the local-interaction pathology, and small-eta integrals.

Merging: for ``theta'(0) = 0`` and ``alpha_1 + alpha_2 != 0`` the two-center
resolvent converges, as ``R -> 0``, to that of a single center with
``1/alpha = 1/alpha_1 + 1/alpha_2``.  Note that the spectrum of the
two-center operator keeps an antisymmetric bound state whose energy runs to
``-inf`` like ``-2/R`` whenever ``alpha_1 + alpha_2 < 2 theta'(0)``-type
attraction is present; resolvent convergence at fixed ``lam`` is unaffected.
:func:`merge_scan` therefore reports both the lowest eigenvalue and the
bound state continuously connected to the merged one.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DomainError, IllConditioned, QuadratureError, SingularBoundaryMatrix
from .kernels import ThetaKind, ThetaProfile
from .pointop import CenterConfig, resolvent_apply
from .sources import GaussianSource, QuadSpec, DEFAULT_QUAD
from .spectral import bound_states

__all__ = [
    "MergeKind",
    "MergeOutcome",
    "MergeScanResult",
    "effective_alpha_merge",
    "merge_scan",
    "local_decay_scan",
    "g_shift_norm",
    "g_shift_norm_momentum",
    "g_shift_norm_position",
    "IdentityCheck",
    "verify_identity",
    "momentum_double_integral",
    "log_integral",
    "eta_sqrt_bound",
    "DEFAULT_MERGE_SOURCE",
]

DEFAULT_MERGE_SOURCE = GaussianSource(center=(0.4, -0.3, 0.2), width=1.0, amplitude=1.0)


class MergeKind(str, enum.Enum):
    POINT = "point"
    FREE = "free"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class MergeOutcome:
    kind: MergeKind
    alpha: float | None = None

    @property
    def predicted_energy(self):
        """``-alpha^2`` for an attractive merged center, else ``None``."""
        if self.kind is MergeKind.POINT and self.alpha < 0.0:
            return -self.alpha * self.alpha
        return None


def effective_alpha_merge(alpha1, alpha2, theta_prime0=0.0) -> MergeOutcome:
    """Strength of the single center obtained when two centers merge.

    ``(alpha1 alpha2 - t^2) / (alpha1 + alpha2 - 2t)`` with ``t = theta'(0)``;
    for ``t = 0`` this is the harmonic rule ``1/alpha = 1/alpha1 + 1/alpha2``.
    A vanishing denominator gives the free limit when ``t = 0`` and is
    flagged as degenerate otherwise.
    """
    a1, a2, t = float(alpha1), float(alpha2), float(theta_prime0)
    den = a1 + a2 - 2.0 * t
    if den == 0.0:
        if t == 0.0:
            return MergeOutcome(MergeKind.FREE)
        return MergeOutcome(MergeKind.DEGENERATE)
    return MergeOutcome(MergeKind.POINT, (a1 * a2 - t * t) / den)


@dataclass
class MergeScanResult:
    radii: np.ndarray
    ground_energies: np.ndarray
    tracked_energies: np.ndarray
    bound_state_counts: np.ndarray
    charge_sums: np.ndarray
    charge_sum_predicted: float | None
    predicted_alpha: float | None
    predicted_energy: float | None
    outcome: MergeOutcome = field(default=None)

    def rows(self):
        for i, R in enumerate(self.radii):
            yield {
                "R": float(R),
                "E_ground": float(self.ground_energies[i]),
                "E_tracked": float(self.tracked_energies[i]),
                "n_bound": int(self.bound_state_counts[i]),
                "q_sum": float(self.charge_sums[i]),
                "q_sum_predicted": _nan_if_none(self.charge_sum_predicted),
                "E_predicted": _nan_if_none(self.predicted_energy),
            }


def _nan_if_none(v):
    return math.nan if v is None else float(v)


def _check_radii(radii):
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size == 0 or np.any(radii <= 0.0) or np.any(np.diff(radii) >= 0.0):
        raise DomainError("radii must be positive and strictly decreasing")
    return radii


def _monopole_fraction(vec):
    return abs(np.sum(vec)) / (math.sqrt(vec.size) * np.linalg.norm(vec))


def merge_scan(alpha1, alpha2, profile: ThetaProfile, radii, lambda_probe=1.0,
               source=DEFAULT_MERGE_SOURCE) -> MergeScanResult:
    """Two centers at ``x_1 = 0`` and ``x_2 = (R, 0, 0)`` for decreasing ``R``.

    For every ``R`` records the lowest eigenvalue, the *tracked* eigenvalue
    (the bound state whose charge vector has the largest monopole component
    ``|q_1 + q_2|``; it is the state that survives the merge) and
    ``q_1 + q_2`` of ``(h + lambda_probe)^{-1} source``.
    """
    radii = _check_radii(radii)
    outcome = effective_alpha_merge(alpha1, alpha2, profile.derivative_at_zero)
    ground, tracked, counts, qsums = [], [], [], []
    for R in radii:
        cfg = CenterConfig.two_center(alpha1, alpha2, R, profile)
        spec = bound_states(cfg)
        counts.append(spec.count)
        if spec.count:
            ground.append(float(spec.energies.min()))
            fractions = [_monopole_fraction(v) for v in spec.charge_vectors]
            tracked.append(float(spec.energies[int(np.argmax(fractions))]))
        else:
            ground.append(math.nan)
            tracked.append(math.nan)
        out = resolvent_apply(cfg, lambda_probe, source)
        qsums.append(float(np.sum(out.charges)))
    predicted_q = None
    if outcome.kind is MergeKind.POINT:
        w1 = float(source.free_resolvent(lambda_probe, np.zeros(3)))
        den = outcome.alpha + math.sqrt(lambda_probe)
        if den != 0.0:
            predicted_q = w1 / den
    elif outcome.kind is MergeKind.FREE:
        predicted_q = 0.0
    return MergeScanResult(
        radii=radii,
        ground_energies=np.array(ground),
        tracked_energies=np.array(tracked),
        bound_state_counts=np.array(counts),
        charge_sums=np.array(qsums),
        charge_sum_predicted=predicted_q,
        predicted_alpha=outcome.alpha,
        predicted_energy=outcome.predicted_energy,
        outcome=outcome,
    )


@dataclass
class DecayScanResult:
    radii: np.ndarray
    lambdas: np.ndarray
    charges: np.ndarray
    charge_norms: np.ndarray

    def slope(self):
        """Least-squares slope of ``log ||q||`` against ``log R``."""
        return float(np.polyfit(np.log(self.radii), np.log(self.charge_norms), 1)[0])


def local_decay_scan(alpha, radii, lam=1.0, f=DEFAULT_MERGE_SOURCE, max_raise=50) -> DecayScanResult:
    """Charges of the local (``theta = 0``) two-center model as ``R -> 0``.

    ``lam`` is kept whenever ``-lam`` lies in the resolvent set; if the
    boundary matrix is singular there it is raised by 1% steps, and the value
    actually used is reported per radius.
    """
    radii = _check_radii(radii)
    profile = ThetaProfile.local_zero()
    lams, qs = [], []
    for R in radii:
        cfg = CenterConfig.two_center(alpha[0], alpha[1], R, profile)
        lam_r = float(lam)
        for _ in range(max_raise):
            try:
                out = resolvent_apply(cfg, lam_r, f)
                break
            except (SingularBoundaryMatrix, IllConditioned):
                lam_r *= 1.01
        else:
            raise SingularBoundaryMatrix(lam_r, 0.0)
        lams.append(lam_r)
        qs.append(out.charges)
    qs = np.array(qs)
    return DecayScanResult(radii, np.array(lams), qs, np.linalg.norm(qs, axis=1))


def g_shift_norm(R, lam):
    """``||g^lam(. - x_2) - g^lam(. - x_1)||^2`` for ``|x_1 - x_2| = R`` (closed form).

    Equals ``(4 pi / sqrt(lam)) (1 - exp(-sqrt(lam) R))``.
    """
    R, lam = float(R), float(lam)
    if not (R > 0.0 and lam > 0.0):
        raise DomainError("R and lambda must be positive")
    s = math.sqrt(lam)
    return -4.0 * math.pi / s * math.expm1(-s * R)


def g_shift_norm_momentum(R, lam, quad: QuadSpec = DEFAULT_QUAD):
    """Momentum-space route: ``16 int p^2/(p^2+lam)^2 (1 - sin(pR)/(pR)) dp``.

    The prefactor collects ``|g^|^2 = (2/pi)/(p^2+lam)^2``, the azimuth ``2 pi``
    and ``int_{-1}^{1} |1 - e^{ipRu}|^2 du = 4 (1 - sinc)``.
    """
    R, lam = float(R), float(lam)
    s = math.sqrt(lam)

    def one_minus_sinc(x):
        if x < 1e-2:
            x2 = x * x
            return x2 / 6.0 - x2 * x2 / 120.0 + x2 * x2 * x2 / 5040.0
        return 1.0 - math.sin(x) / x

    def integrand(p):
        return p * p / (p * p + lam) ** 2 * one_minus_sinc(p * R)

    # below c = 1/R the integrand has no oscillation; above
    # it the two pieces are integrated separately, the oscillatory one with a
    # Fourier-weighted rule
    c = 1.0 / R
    head = 0.0
    for a, b in ((0.0, min(s, c)), (min(s, c), c)):
        if b > a:
            head += integrate.quad(integrand, a, b, epsabs=0.0, epsrel=1e-12, limit=quad.limit)[0]
    smooth = integrate.quad(lambda p: p * p / (p * p + lam) ** 2, c, np.inf,
                            epsabs=0.0, epsrel=1e-12, limit=quad.limit)[0]
    osc = integrate.quad(lambda p: p / (R * (p * p + lam) ** 2), c, np.inf, weight="sin", wvar=R,
                         epsabs=1e-13 * (head + smooth), limit=quad.limit)[0]
    total, tail = head, smooth - osc
    return 16.0 * (total + tail)


def g_shift_norm_position(R, lam, quad: QuadSpec = DEFAULT_QUAD):
    """Position-space route: ``2||g||^2 - 2 <g, g(. - R e)>`` with ``||g||^2 = 2 pi / sqrt(lam)``.

    The overlap integral is reduced to one radial integral with the angular
    part done in closed form:
    ``<g, g_R> = (2 pi / (s R)) int_0^inf e^{-s r} (e^{-s|r-R|} - e^{-s(r+R)}) dr``.
    """
    R, lam = float(R), float(lam)
    s = math.sqrt(lam)

    def integrand(r):
        return math.exp(-s * r) * (math.exp(-s * abs(r - R)) - math.exp(-s * (r + R)))

    a, _ = integrate.quad(integrand, 0.0, R, epsabs=0.0, epsrel=quad.epsrel, limit=quad.limit)
    b, _ = integrate.quad(integrand, R, np.inf, epsabs=0.0, epsrel=quad.epsrel, limit=quad.limit)
    overlap = 2.0 * math.pi / (s * R) * (a + b)
    return 2.0 * (2.0 * math.pi / s) - 2.0 * overlap


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    reference: float
    computed: float
    rel_error: float
    passed: bool
    params: dict = field(default_factory=dict)


def momentum_double_integral(k, k_prime, quad: QuadSpec = DEFAULT_QUAD):
    """``int d^3p |p - k|^-2 |p - k'|^-2`` by adaptive quadrature.

    Spherical coordinates about ``k`` with polar axis along ``k' - k``; the
    ``|p - k|^2`` Jacobian cancels, leaving
    ``2 pi int_0^inf dr int_{-1}^{1} du / (r^2 + d^2 - 2 r d u)``.  Both
    integrals are numerical; the integrand is log-singular at ``r = d, u = 1``.
    """
    d = float(np.linalg.norm(np.asarray(k_prime, dtype=float) - np.asarray(k, dtype=float)))
    if d == 0.0:
        raise DomainError("k and k' must differ")

    def inner(r):
        f = lambda u: 1.0 / (r * r + d * d - 2.0 * r * d * u)
        v, _ = integrate.quad(f, -1.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=quad.limit)
        return v

    total, err = 0.0, 0.0
    # close to r = d the inner integrand is nearly a pole at u = 1 and QUADPACK
    # warns about roundoff while still meeting the tolerance
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in ((0.0, d), (d, 2 * d), (2 * d, np.inf)):
            v, e = integrate.quad(inner, a, b, epsabs=0.0, epsrel=1e-10, limit=quad.limit)
            total += v
            err += e
    return 2.0 * math.pi * total, 2.0 * math.pi * err


def log_integral(a, quad: QuadSpec = DEFAULT_QUAD):
    """``int_0^inf p^-1 ln((p + a)/|p - a|) dp`` by adaptive quadrature."""
    a = float(a)
    if not a > 0.0:
        raise DomainError("a must be positive")

    def f(p):
        return math.log((p + a) / abs(p - a)) / p if p > 0.0 else 2.0 / a

    total, err = 0.0, 0.0
    for lo, hi in ((0.0, a), (a, 2 * a), (2 * a, np.inf)):
        v, e = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=quad.limit)
        total += v
        err += e
    return total, err


def eta_sqrt_bound(eta, lam, charge=None, quad: QuadSpec = DEFAULT_QUAD):
    """Left and right sides of the small-eta estimate for a Gaussian charge.

    Returns ``(lhs, rhs)`` with
    ``lhs = ||(sqrt(eta p^2/(1+eta)^2 + eta P^2/(1+eta) + lam/(1+eta)) - sqrt(lam)) xi^||``
    and ``rhs = sqrt(eta) ||xi||_{H^1} + eta sqrt(lam) ||xi||``.
    """
    from .manybody import GaussianCharge, radial_moment

    if charge is None:
        charge = GaussianCharge()
    eta, lam = float(eta), float(lam)
    s = math.sqrt(lam)

    def multiplier_sq(p, P):
        root = np.sqrt(eta * p * p / (1 + eta) ** 2 + eta * P * P / (1 + eta) + lam / (1 + eta))
        # root - s without cancellation
        diff = (root * root - lam) / (root + s)
        return diff * diff

    lhs = math.sqrt(radial_moment(charge, multiplier_sq))
    h1 = math.sqrt(charge.h1_norm_sq())
    rhs = math.sqrt(eta) * h1 + eta * s * math.sqrt(charge.norm_sq())
    return lhs, rhs


def verify_identity(name, params=None, quad: QuadSpec = DEFAULT_QUAD) -> IdentityCheck:
    """Check one of the integral identities used in the small-eta argument.

    ``MomentumDouble``: params ``k``, ``k_prime``, ``rtol`` (default 1e-3).
    ``LogIntegral``: params ``a``, ``rtol`` (default 1e-6).
    ``EtaSqrtBound``: params ``eta``, ``lam``, optional ``charge``.
    """
    params = dict(params or {})
    if name == "MomentumDouble":
        k = np.asarray(params.get("k", (0.0, 0.0, 0.0)), dtype=float)
        kp = np.asarray(params.get("k_prime", (1.0, 0.0, 0.0)), dtype=float)
        rtol = params.get("rtol", 1e-3)
        ref = math.pi**3 / float(np.linalg.norm(kp - k))
        val, err = momentum_double_integral(k, kp, quad)
        if err > rtol * abs(ref):
            raise QuadratureError("MomentumDouble quadrature", err)
        rel = abs(val - ref) / ref
        return IdentityCheck(name, ref, val, rel, rel <= rtol, {"d": float(np.linalg.norm(kp - k))})
    if name == "LogIntegral":
        a = float(params.get("a", 1.0))
        rtol = params.get("rtol", 1e-6)
        ref = math.pi**2 / 2.0
        val, err = log_integral(a, quad)
        if err > rtol * ref:
            raise QuadratureError("LogIntegral quadrature", err)
        rel = abs(val - ref) / ref
        return IdentityCheck(name, ref, val, rel, rel <= rtol, {"a": a})
    if name == "EtaSqrtBound":
        eta = float(params.get("eta", 1.0))
        lam = float(params.get("lam", 1.0))
        lhs, rhs = eta_sqrt_bound(eta, lam, params.get("charge"), quad)
        rel = (lhs - rhs) / rhs
        return IdentityCheck(name, rhs, lhs, rel, lhs <= rhs, {"eta": eta, "lam": lam})
    raise DomainError(f"unknown identity {name!r}")
