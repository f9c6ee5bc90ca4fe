r"""Macdonald functions (modified Bessel functions of the second kind).

``K_nu(z)`` is evaluated in double precision for real ``nu >= 0`` and
``z > 0``.  Two routes are available:

* half-integer orders ``nu = n + 1/2`` start from the elementary closed form
  :math:`K_{1/2}(z) = \sqrt{\pi/2z}\,e^{-z}` and climb with the three-term
  recurrence :math:`K_{\mu+1} = K_{\mu-1} + (2\mu/z) K_\mu`;
* general orders reduce to :math:`|\mu| \le 1/2`, where ``K_mu`` and
  ``K_{mu+1}`` come from Temme's series (``z < 2``) or Steed's continued
  fraction (``z >= 2``), followed by the same upward recurrence.

Upward recurrence is stable for ``K``.  All intermediate values carry a
separate logarithmic scale so that very large orders at tiny arguments (or
large arguments) never overflow internally; only the final exponentiation
can overflow or underflow, and those cases raise distinct exceptions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, MacdonaldOverflow, MacdonaldUnderflow

__all__ = [
    "MacdonaldOrder",
    "macdonald_k",
    "log_macdonald_k",
    "macdonald_k_half_integer",
    "macdonald_k_general",
]

_EPS = 1e-16
_MAXIT = 10000
_TEMME_CUTOFF = 2.0
_RESCALE = 1e250
_LOG_RESCALE = math.log(_RESCALE)
_LOG_MAX = math.log(1.7976931348623157e308)
_LOG_MIN_NORMAL = math.log(2.2250738585072014e-308)

# Taylor coefficients of 1/Gamma(z) = sum_k c_k z^k (c_1 = 1); the even ones
# give the small-mu limit of Temme's gamma_1.
_RG_C2 = 0.5772156649015329
_RG_C4 = -0.0420026350340952
_RG_C6 = -0.0421977345555443


@dataclass(frozen=True)
class MacdonaldOrder:
    """Order ``nu`` of a Macdonald function."""

    nu: float

    def __post_init__(self):
        if not (self.nu >= 0.0 and math.isfinite(self.nu)):
            raise DomainError(f"Macdonald order must be a finite nonnegative real, got {self.nu!r}")

    @property
    def half_integer_flag(self) -> bool:
        """True iff ``2 nu`` is an odd nonnegative integer."""
        two_nu = 2.0 * self.nu
        return two_nu == math.floor(two_nu) and int(two_nu) % 2 == 1


def _check_args(nu, z):
    if not (nu >= 0.0 and math.isfinite(nu)):
        raise DomainError(f"order nu must be finite and >= 0, got {nu!r}")
    if not (z > 0.0):
        raise DomainError(f"argument z must be > 0, got {z!r}")
    if not math.isfinite(z):
        raise DomainError(f"argument z must be finite, got {z!r}")


def _temme_gammas(mu):
    """Temme's gamma_1, gamma_2 and 1/Gamma(1 +- mu) for |mu| <= 1/2."""
    gampl = 1.0 / math.gamma(1.0 + mu)
    gammi = 1.0 / math.gamma(1.0 - mu)
    if abs(mu) < 1e-3:
        mu2 = mu * mu
        gam1 = -(_RG_C2 + mu2 * (_RG_C4 + mu2 * _RG_C6))
    else:
        gam1 = (gammi - gampl) / (2.0 * mu)
    gam2 = 0.5 * (gammi + gampl)
    return gam1, gam2, gampl, gammi


def _seed_temme(mu, x):
    """K_mu(x), K_{mu+1}(x) for |mu| <= 1/2 and x < 2 (unscaled)."""
    x2 = 0.5 * x
    pimu = math.pi * mu
    fact = 1.0 if abs(pimu) < _EPS else pimu / math.sin(pimu)
    d = -math.log(x2)
    e = mu * d
    fact2 = 1.0 if abs(e) < _EPS else math.sinh(e) / e
    gam1, gam2, gampl, gammi = _temme_gammas(mu)
    ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
    total = ff
    e = math.exp(e)
    p = 0.5 * e / gampl
    q = 0.5 / (e * gammi)
    c = 1.0
    d = x2 * x2
    total1 = p
    mu2 = mu * mu
    for i in range(1, _MAXIT):
        ff = (i * ff + p + q) / (i * i - mu2)
        c *= d / i
        p /= i - mu
        q /= i + mu
        term = c * ff
        total += term
        total1 += c * (p - i * ff)
        if abs(term) < abs(total) * _EPS:
            break
    else:  # pragma: no cover - the series converges in < 30 terms for x < 2
        raise ArithmeticError("Temme series failed to converge")
    return total, total1 * 2.0 / x


def _seed_steed(mu, x):
    """e^x K_mu(x), e^x K_{mu+1}(x) for |mu| <= 1/2 and x >= 2."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25 - mu * mu
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:  # pragma: no cover
        raise ArithmeticError("Steed continued fraction failed to converge")
    h *= a1
    kmu = math.sqrt(math.pi / (2.0 * x)) / s
    return kmu, kmu * (mu + x + 0.5 - h) / x


def _recur_up(kmu, k1, mu, x, steps, log_scale):
    """Climb ``steps`` orders from (K_mu, K_{mu+1}); returns (K_{mu+steps}, log_scale)."""
    two_over_x = 2.0 / x
    for i in range(1, steps + 1):
        knext = (mu + i) * two_over_x * k1 + kmu
        kmu, k1 = k1, knext
        if k1 > _RESCALE:
            kmu /= _RESCALE
            k1 /= _RESCALE
            log_scale += _LOG_RESCALE
    return kmu, log_scale


def _log_kv_half_integer(nu, z):
    # nu = nl - 1/2 with K_{-1/2} = K_{1/2} = sqrt(pi/2z) e^{-z}
    nl = int(round(nu + 0.5))
    k_half = math.sqrt(math.pi / (2.0 * z))
    kmu, log_scale = _recur_up(k_half, k_half, -0.5, z, nl, -z)
    return math.log(kmu) + log_scale


def _log_kv_general(nu, z):
    nl = int(nu + 0.5)
    mu = nu - nl
    if z < _TEMME_CUTOFF:
        kmu, k1 = _seed_temme(mu, z)
        log_scale = 0.0
    else:
        kmu, k1 = _seed_steed(mu, z)
        log_scale = -z
    kmu, log_scale = _recur_up(kmu, k1, mu, z, nl, log_scale)
    return math.log(kmu) + log_scale


def _exp_checked(log_value, nu, z):
    if log_value > _LOG_MAX:
        raise MacdonaldOverflow(f"K_{nu}({z}) overflows double precision (log K = {log_value:.6g})")
    if log_value < _LOG_MIN_NORMAL:
        raise MacdonaldUnderflow(f"K_{nu}({z}) underflows double precision (log K = {log_value:.6g})")
    return math.exp(log_value)


def log_macdonald_k(nu, z) -> float:
    """Natural logarithm of ``K_nu(z)``; never overflows.

    Dispatches to the half-integer closed-form route when ``2 nu`` is odd.
    """
    nu = float(nu.nu if isinstance(nu, MacdonaldOrder) else nu)
    z = float(z)
    _check_args(nu, z)
    if MacdonaldOrder(nu).half_integer_flag:
        return _log_kv_half_integer(nu, z)
    return _log_kv_general(nu, z)


def macdonald_k(order, z) -> float:
    """Evaluate ``K_nu(z)``.

    Parameters
    ----------
    order : MacdonaldOrder or float
        Order ``nu >= 0``.
    z : float
        Argument, ``z > 0``.

    Raises
    ------
    DomainError
        For ``z <= 0`` or a negative/non-finite order.
    MacdonaldOverflow, MacdonaldUnderflow
        When the value is not representable as a normal double.
    """
    nu = float(order.nu if isinstance(order, MacdonaldOrder) else order)
    log_value = log_macdonald_k(nu, z)
    return _exp_checked(log_value, nu, z)


def macdonald_k_half_integer(nu, z) -> float:
    """Closed-form route only; ``nu`` must be a half-integer."""
    nu = float(nu)
    _check_args(nu, float(z))
    if not MacdonaldOrder(nu).half_integer_flag:
        raise DomainError(f"order {nu} is not a half-integer")
    return _exp_checked(_log_kv_half_integer(nu, float(z)), nu, z)


def macdonald_k_general(nu, z) -> float:
    """Series / continued-fraction route, valid for every order including half-integers."""
    nu = float(nu)
    _check_args(nu, float(z))
    return _exp_checked(_log_kv_general(nu, float(z)), nu, z)
