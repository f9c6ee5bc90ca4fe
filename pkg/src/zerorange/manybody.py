"""Sampling the boundary form of a light particle and two heavy centers.

Charges live on the coincidence planes ``pi_i = {x = x_i}``; for two heavy
particles each charge is a function ``xi_i(z, X)`` of the common position
``z`` and of the position ``X`` of the other heavy particle.  We use centered
separable Gaussians

    xi^_i(p, P) = a_i exp(-p^2 / (2 sp_i^2) - P^2 / (2 sP_i^2)),

for which the diagonal symbol term is a 2-D radial integral, the ``B`` term a
1-D radial integral, and only the off-diagonal symbol term (a 9-D integral)
needs Monte Carlo.

Monte Carlo runs use numpy's PCG64 generator.  The master seed is expanded
with ``numpy.random.SeedSequence(seed).spawn(n_batches)``; batch ``k``
always draws from child ``k``, so the result does not depend on how batches
are scheduled.  Worker threads are capped by the ``ZERORANGE_MAX_WORKERS``
environment variable (default 1).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureError
from .kernels import MassModel, ThetaKind, ThetaProfile, theta_eval
from .sources import DEFAULT_QUAD, QuadSpec

__all__ = [
    "GaussianCharge",
    "FormEstimate",
    "radial_moment",
    "xi_diagonal_term",
    "xi_offdiagonal_mc",
    "b_form_term",
    "b_cross_term",
    "phi_form_estimate",
    "max_workers",
    "ETA_ZERO",
    "BATCH_SIZE",
]

ETA_ZERO = "0+"
BATCH_SIZE = 50_000
WORKERS_ENV = "ZERORANGE_MAX_WORKERS"


def max_workers() -> int:
    """Worker-thread cap taken from ``ZERORANGE_MAX_WORKERS`` (default 1)."""
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise DomainError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise DomainError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


@dataclass(frozen=True)
class GaussianCharge:
    """Centered separable Gaussian charge on a coincidence plane.

    Attributes
    ----------
    amplitude : float
        Value ``a`` of ``xi^`` at zero momentum.
    width_p, width_P : float
        Momentum-space widths for the ``z`` slot and the spectator slot.
    """

    amplitude: float = 1.0
    width_p: float = 1.0
    width_P: float = 1.0
    centered: bool = field(default=True, init=False)

    def __post_init__(self):
        if not (self.width_p > 0.0 and self.width_P > 0.0):
            raise DomainError("Gaussian charge widths must be positive")
        if not math.isfinite(self.amplitude):
            raise DomainError("amplitude must be finite")

    def fourier(self, p, P):
        """``xi^(p, P)`` for ``(..., 3)`` momenta."""
        p2 = np.sum(np.asarray(p) ** 2, axis=-1)
        P2 = np.sum(np.asarray(P) ** 2, axis=-1)
        return self.amplitude * np.exp(-0.5 * p2 / self.width_p**2 - 0.5 * P2 / self.width_P**2)

    def position(self, z, X):
        """Position form ``a sp^3 sP^3 exp(-sp^2 z^2/2 - sP^2 X^2/2)``."""
        z2 = np.sum(np.asarray(z) ** 2, axis=-1)
        X2 = np.sum(np.asarray(X) ** 2, axis=-1)
        sp, sP = self.width_p, self.width_P
        return self.amplitude * sp**3 * sP**3 * np.exp(-0.5 * sp * sp * z2 - 0.5 * sP * sP * X2)

    def norm_sq(self) -> float:
        """``||xi||^2 = a^2 pi^3 sp^3 sP^3`` (same in both representations)."""
        return self.amplitude**2 * math.pi**3 * self.width_p**3 * self.width_P**3

    def position_norm_sq(self) -> float:
        """Norm computed from the position form (Plancherel cross-check)."""
        c = self.amplitude * self.width_p**3 * self.width_P**3
        # int exp(-s^2 z^2) d^3z = (pi / s^2)^{3/2}
        return c * c * (math.pi / self.width_p**2) ** 1.5 * (math.pi / self.width_P**2) ** 1.5

    def h1_norm_sq(self) -> float:
        """``int (1 + p^2 + P^2) |xi^|^2``."""
        return self.norm_sq() * (1.0 + 1.5 * self.width_p**2 + 1.5 * self.width_P**2)

    def scaled(self, factor):
        return GaussianCharge(self.amplitude * factor, self.width_p, self.width_P)


def radial_moment(charge: GaussianCharge, fn, quad: QuadSpec = DEFAULT_QUAD) -> float:
    """``int fn(|p|, |P|) |xi^(p, P)|^2 d^3p d^3P`` by 2-D radial quadrature.

    In units ``p = sp u``, ``P = sP v`` the weight is
    ``(4 pi)^2 a^2 sp^3 sP^3 u^2 v^2 exp(-u^2 - v^2)``; both radial integrals
    are truncated at ``u, v = 12`` where the weight is below ``1e-60``.
    """
    sp, sP = charge.width_p, charge.width_P

    def integrand(v, u):
        return u * u * v * v * math.exp(-u * u - v * v) * float(fn(sp * u, sP * v))

    val, err = integrate.dblquad(integrand, 0.0, 12.0, 0.0, 12.0, epsabs=0.0, epsrel=quad.epsrel)
    pref = (4.0 * math.pi) ** 2 * charge.amplitude**2 * sp**3 * sP**3
    if err > max(1e-8 * abs(val), 1e-300):
        raise QuadratureError("radial moment quadrature", pref * err)
    return pref * val


def xi_diagonal_term(charge: GaussianCharge, model: MassModel | str, lam, quad: QuadSpec = DEFAULT_QUAD) -> float:
    """``int sqrt(eta p^2/(1+eta)^2 + eta P^2/(1+eta) + 2 m lam/(1+eta)) |xi^|^2``.

    Passing ``model="0+"`` evaluates the fixed-center limit ``sqrt(2 m lam) ||xi||^2``
    with ``m = 1/2``.
    """
    lam = float(lam)
    if not lam > 0.0:
        raise DomainError("lambda must be > 0")
    if isinstance(model, str):
        if model != ETA_ZERO:
            raise DomainError(f"unknown mass-ratio marker {model!r}")
        return math.sqrt(lam) * charge.norm_sq()
    eta, m = model.eta, model.m_light

    def symbol(p, P):
        return math.sqrt(eta * p * p / (1 + eta) ** 2 + eta * P * P / (1 + eta) + 2 * m * lam / (1 + eta))

    return radial_moment(charge, symbol, quad)


def _offdiag_batch(child, n, ci, cj, eta, k2):
    rng = np.random.Generator(np.random.PCG64(child))
    # importance sampling: p ~ |xi_i| in its p slot, p2 ~ |xi_i| in its P slot,
    # p1 ~ |xi_j| in its P slot; what is left of the integrand is bounded
    p = rng.standard_normal((n, 3)) * ci.width_p
    p2 = rng.standard_normal((n, 3)) * ci.width_P
    p1 = rng.standard_normal((n, 3)) * cj.width_P
    shifted = p - p1 + p2
    num = np.exp(-0.5 * np.sum(shifted * shifted, axis=1) / cj.width_p**2)
    d = p1 - p
    den = np.sum(d * d, axis=1) + eta * (np.sum(p1 * p1, axis=1) + np.sum(p2 * p2, axis=1)) + k2
    vals = num / den
    return float(np.sum(vals)), float(np.sum(vals * vals))


def xi_offdiagonal_mc(charge_i: GaussianCharge, charge_j: GaussianCharge, model: MassModel, lam,
                      samples=1_000_000, seed=0, batch_size=BATCH_SIZE):
    """Monte Carlo estimate of ``<xi_i, (Xi xi)_i>`` restricted to the ``j`` summand.

    The 9-D integral

        -(1+eta)/(2 pi^2) int xi^_i(p, p2) xi^_j(p - p1 + p2, p1)
                         / (|p1 - p|^2 + eta (p1^2 + p2^2) + 2 m lam)  dp dp1 dp2

    is sampled from the Gaussian factors ``|xi^_i|`` and the ``P``-slot factor
    of ``xi^_j``.  Returns ``(value, stderr)``; the standard error comes from
    the sample variance.  Identical arguments give bit-identical results.
    """
    lam = float(lam)
    if not lam > 0.0:
        raise DomainError("lambda must be > 0")
    samples = int(samples)
    if samples < 2:
        raise DomainError("need at least two samples")
    eta, m = model.eta, model.m_light
    k2 = 2.0 * m * lam
    n_batches = -(-samples // batch_size)
    sizes = [batch_size] * (n_batches - 1) + [samples - batch_size * (n_batches - 1)]
    children = np.random.SeedSequence(int(seed)).spawn(n_batches)
    args = [(children[k], sizes[k], charge_i, charge_j, eta, k2) for k in range(n_batches)]
    workers = min(max_workers(), n_batches)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda a: _offdiag_batch(*a), args))
    else:
        parts = [_offdiag_batch(*a) for a in args]
    sums = np.array([s for s, _ in parts])
    sqs = np.array([q for _, q in parts])
    # results are combined in batch order, independent of thread scheduling
    mean = math.fsum(sums) / samples
    var = max(math.fsum(sqs) / samples - mean * mean, 0.0) * samples / (samples - 1)
    norm = ((2.0 * math.pi) ** 1.5) ** 3 * (charge_i.width_p * charge_i.width_P * charge_j.width_P) ** 3
    pref = -(1.0 + eta) / (2.0 * math.pi**2) * charge_i.amplitude * charge_j.amplitude * norm
    return pref * mean, abs(pref) * math.sqrt(var / samples)


def b_cross_term(charge_i: GaussianCharge, charge_j: GaussianCharge, profile: ThetaProfile,
                 quad: QuadSpec = DEFAULT_QUAD) -> float:
    """``int xi_i(z, X) theta(|X - z|)/|X - z| xi_j(z, X) dz dX`` for position forms.

    Integrating out ``z`` at fixed ``u = X - z`` leaves
    ``c_i c_j (2 pi/(A+B))^{3/2} 4 pi int_0^inf u theta(u) exp(-kappa u^2/2) du``
    with ``A = sp_i^2 + sp_j^2``, ``B = sP_i^2 + sP_j^2``, ``kappa = AB/(A+B)``.
    """
    A = charge_i.width_p**2 + charge_j.width_p**2
    B = charge_i.width_P**2 + charge_j.width_P**2
    kappa = A * B / (A + B)
    ci = charge_i.amplitude * charge_i.width_p**3 * charge_i.width_P**3
    cj = charge_j.amplitude * charge_j.width_p**3 * charge_j.width_P**3
    pref = ci * cj * (2.0 * math.pi / (A + B)) ** 1.5 * 4.0 * math.pi
    if profile.kind is ThetaKind.LOCAL_ZERO:
        return 0.0
    if profile.kind is ThetaKind.EXPONENTIAL and math.isinf(profile.b):
        return pref / kappa
    upper = min(profile.support_radius, 40.0 / math.sqrt(kappa))
    breaks = [profile.b] if profile.kind is ThetaKind.INDICATOR and profile.b < upper else None
    val, err = integrate.quad(lambda u: u * theta_eval(profile, u) * math.exp(-0.5 * kappa * u * u) if u > 0 else 0.0,
                              0.0, upper, epsabs=0.0, epsrel=quad.epsrel, limit=quad.limit, points=breaks)
    if err > max(1e-8 * abs(val), 1e-300):
        raise QuadratureError("B cross-term quadrature", pref * err)
    return pref * val


@dataclass(frozen=True)
class BTerm:
    alpha_part: float
    theta_part: float


def b_form_term(charge_i: GaussianCharge, charge_j: GaussianCharge, alphas, gamma,
                profile: ThetaProfile, quad: QuadSpec = DEFAULT_QUAD) -> BTerm:
    """``sum_i <xi_i, (B xi)_i>`` for two centers.

    ``alpha_part = alpha_1 ||xi_1||^2 + alpha_2 ||xi_2||^2``; ``theta_part``
    is ``gamma`` times both cross terms, each pairing ``xi_i`` with ``xi_k``
    evaluated at the same arguments (literal substitution in the definition
    of ``B``).
    """
    if not gamma >= 0.0:
        raise DomainError("gamma must be nonnegative")
    a1, a2 = float(alphas[0]), float(alphas[1])
    alpha_part = a1 * charge_i.norm_sq() + a2 * charge_j.norm_sq()
    if gamma == 0.0:
        return BTerm(alpha_part, 0.0)
    cross = b_cross_term(charge_i, charge_j, profile, quad)
    # the two orderings give the same integral for real charges
    return BTerm(alpha_part, gamma * 2.0 * cross)


@dataclass(frozen=True)
class FormEstimate:
    value: float
    stderr: float
    sample_count: int
    diagonal: float
    offdiagonal: float
    b_alpha: float
    b_theta: float

    def components(self):
        return {
            "diagonal": self.diagonal,
            "offdiagonal": self.offdiagonal,
            "b_alpha": self.b_alpha,
            "b_theta": self.b_theta,
        }

    def to_dict(self):
        return {"value": self.value, "stderr": self.stderr, "sample_count": self.sample_count,
                **self.components()}


def phi_form_estimate(charges, alphas, gamma, profile: ThetaProfile, model: MassModel, lam,
                      samples=1_000_000, seed=0, quad: QuadSpec = DEFAULT_QUAD) -> FormEstimate:
    """``sum_i <xi_i, (B xi + Xi xi)_i>`` for a pair of Gaussian charges.

    The two ordered off-diagonal terms use independent streams derived from
    ``seed``; their standard errors are combined in quadrature (the estimate
    is conservative if the streams happened to be correlated).
    """
    c1, c2 = charges
    diag = xi_diagonal_term(c1, model, lam, quad) + xi_diagonal_term(c2, model, lam, quad)
    s12, s21 = np.random.SeedSequence(int(seed)).generate_state(2, dtype=np.uint64)
    o12, e12 = xi_offdiagonal_mc(c1, c2, model, lam, samples, int(s12))
    o21, e21 = xi_offdiagonal_mc(c2, c1, model, lam, samples, int(s21))
    b = b_form_term(c1, c2, alphas, gamma, profile, quad)
    off = o12 + o21
    value = diag + off + b.alpha_part + b.theta_part
    return FormEstimate(value, math.hypot(e12, e21), 2 * int(samples), diag, off, b.alpha_part, b.theta_part)
