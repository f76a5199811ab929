"""SVI slices: critical moments, MGF asymptote, wing prices and the local-vol wing.

A slice prescribes the implied variance

    sigma^2(k) = a + b (rho (k - m) + sqrt((k - m)^2 + eta^2))

at one maturity ``t``.  Its large-strike total-variance slopes
``s_+- = b t (1 +- rho)`` fix the critical moments and all leading
constants below.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

from ..core import SQRT_2PI, Side, bs_call, bs_put
from ..errors import DegenerateSlope, DegenerateWing, DomainError, RegimeError
from ..wings import WingPoint, sigma0

# relative maturity step for the central differences of the local-vol wing
TIME_STEP = 1e-3


@dataclass(frozen=True)
class SviSlice:
    """One maturity of an SVI implied-variance surface."""

    t: float
    a_svi: float
    b_svi: float
    rho: float
    m: float
    eta: float

    def __post_init__(self) -> None:
        for name in ("t", "a_svi", "b_svi", "rho", "m", "eta"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not self.t > 0.0:
            raise DomainError(f"t must be positive, got {self.t}")
        if self.b_svi < 0.0:
            raise DomainError(f"b must be nonnegative, got {self.b_svi}")
        if not -1.0 < self.rho < 1.0:
            raise DomainError(f"rho must lie in (-1, 1), got {self.rho}")
        if not self.eta > 0.0:
            raise DomainError(f"eta must be positive, got {self.eta}")
        if self.a_svi + self.b_svi * self.eta * math.sqrt(1.0 - self.rho ** 2) < 0.0:
            raise DomainError("SVI variance becomes negative: a + b eta sqrt(1 - rho^2) < 0")

    def variance(self, k: float) -> float:
        """Implied variance ``sigma^2(k)``."""
        z = k - self.m
        return self.a_svi + self.b_svi * (self.rho * z + math.hypot(z, self.eta))

    def total_vol(self, k: float) -> float:
        """``sqrt(t sigma^2(k))``."""
        return math.sqrt(self.t * self.variance(k))

    def call(self, k: float) -> float:
        """Black-Scholes call priced at the slice's implied volatility."""
        return bs_call(k, self.total_vol(k))

    def put(self, k: float) -> float:
        """Black-Scholes put struck at ``exp(k)``."""
        return bs_put(k, self.total_vol(k))

    def slope(self, side: Side | str) -> float:
        """Large-strike total-variance slope ``b t (1 +- rho)``."""
        side = Side.parse(side)
        return self.b_svi * self.t * (1.0 + side.sign * self.rho)


class SviCriticalMoments(NamedTuple):
    mu_plus: float
    mu_minus: float
    degenerate: bool


def _mu_star(s: float, sign: int) -> float:
    if s == 0.0:
        raise DegenerateSlope("zero wing slope: the critical moment is infinite")
    return 0.5 * (1.0 / s + 0.25 * s + sign)


def svi_critical_moments(s: SviSlice) -> SviCriticalMoments:
    """``mu*_+- = (1/s_+- + s_+-/4 +- 1) / 2``; flags ``mu*_- = 0`` (slope exactly 2)."""
    plus = _mu_star(s.slope(Side.RIGHT), 1)
    minus = _mu_star(s.slope(Side.LEFT), -1)
    return SviCriticalMoments(plus, minus, minus <= 0.0)


def svi_mu_star(s: SviSlice, side: Side | str) -> float:
    side = Side.parse(side)
    return _mu_star(s.slope(side), side.sign)


def svi_d0(s: SviSlice, side: Side | str) -> float:
    """Constant of the Gaussian exponent ``-d^2/2 = -mu* y + d0 + O(1/y)`` along the wing."""
    side = Side.parse(side)
    w = s.slope(side)
    if w == 0.0:
        raise DegenerateSlope("zero wing slope")
    at = s.a_svi * s.t
    return 0.5 * (-s.m + at / (w * w) - side.sign * 2.0 * s.m / w - 0.25 * at)


def svi_xi(s: SviSlice, side: Side | str) -> float:
    """``(2 mu*)^(-1/2) - sqrt(s)/2``, the ``y^(-1/2)`` coefficient of the tail prefactor."""
    side = Side.parse(side)
    mu = svi_mu_star(s, side)
    if not mu > 0.0:
        raise DegenerateSlope(f"critical moment {mu} is not positive")
    return (2.0 * mu) ** -0.5 - 0.5 * math.sqrt(s.slope(side))


def svi_mgf_asymptote(s: SviSlice, side: Side | str, x: float) -> float:
    """Leading behaviour of ``E exp((mu* - 1/x)(+-X))`` for a large pole distance ``x``.

    Equals ``mu* xi exp(d0 +- mu* m) sqrt(x/2)``: integrating the tail
    ``P(+-X >= z) ~ xi exp(d0 - mu* (z -+ m)) / sqrt(2 pi (z -+ m))``
    against ``exp((mu* - 1/x) z)`` gives ``sqrt(pi x) / sqrt(2 pi)``.
    """
    side = Side.parse(side)
    if not x > 0.0:
        raise DomainError(f"pole distance must be positive, got {x}")
    mu = svi_mu_star(s, side)
    xi = svi_xi(s, side)
    if xi <= 0.0:
        warnings.warn(f"xi = {xi:.4g} <= 0: the SVI asymptote is not a valid MGF approximation here",
                      RuntimeWarning, stacklevel=2)
    return mu * xi * math.exp(svi_d0(s, side) + side.sign * mu * s.m) * math.sqrt(0.5 * x)


def svi_price_prefactor(s: SviSlice, side: Side | str) -> float:
    """``sqrt(s) / (sqrt(2 pi) (2 mu* -+ sqrt(2 mu* s)))``, the ``k^(-1/2)`` coefficient of the wing price."""
    side = Side.parse(side)
    w = s.slope(side)
    mu = svi_mu_star(s, side)
    den = 2.0 * mu - side.sign * math.sqrt(2.0 * mu * w)
    if not den > 0.0:
        raise DegenerateSlope(f"price prefactor denominator {den} is not positive")
    return math.sqrt(w) / (SQRT_2PI * den)


def svi_log_constant(s: SviSlice, side: Side | str) -> float:
    """``c = ln(prefactor) + d0 +- m mu*``: the price is ``exp(c - (mu* -+ 1) k) / sqrt(k)``."""
    side = Side.parse(side)
    mu = svi_mu_star(s, side)
    return math.log(svi_price_prefactor(s, side)) + svi_d0(s, side) + side.sign * s.m * mu


def svi_price_expansion(s: SviSlice, side: Side | str, k: float) -> float:
    """Wing price: the call at ``e^k`` (right) or the put at ``e^-k`` (left).

    Raises :class:`RegimeError` below ``k = |m| + 5 eta``.
    """
    side = Side.parse(side)
    if k < abs(s.m) + 5.0 * s.eta:
        raise RegimeError(f"k={k} is below the SVI wing guard |m| + 5 eta = {abs(s.m) + 5.0 * s.eta}")
    mu = svi_mu_star(s, side)
    return math.exp(svi_log_constant(s, side) - (mu - side.sign) * k) / math.sqrt(k)


def svi_local_vol_wing(
    family: Callable[[float], SviSlice],
    t: float,
    side: Side | str,
    y: float,
) -> WingPoint:
    """Local variance ``Sigma^2(t, +-y)`` from the wing prices of an SVI family.

    With ``D = mu*^2 -+ mu*`` the Dupire ratio of the wing price gives
    ``sigma0 (y - (2 mu* -+ 1) / (2 D)) + 2 c'(t) / D``; ``mu*'`` and ``c'``
    are central differences with step ``1e-3 t``.
    """
    side = Side.parse(side)
    if not t > 0.0:
        raise DomainError(f"maturity must be positive, got {t}")
    h = TIME_STEP * t
    up, mid, dn = family(t + h), family(t), family(t - h)
    mu = svi_mu_star(mid, side)
    dmu = (svi_mu_star(up, side) - svi_mu_star(dn, side)) / (2.0 * h)
    if dmu == 0.0 or abs(dmu) < 1e-12 * max(1.0, abs(mu)):
        raise DegenerateWing("the SVI critical moment does not move with maturity")
    dc = (svi_log_constant(up, side) - svi_log_constant(dn, side)) / (2.0 * h)
    s = side.sign
    d = mu * mu - s * mu
    s0 = sigma0(mu, dmu, side)
    shift = (2.0 * mu - s) / (2.0 * d)
    leading = s0 * y
    numerator = -s0 * shift * d + 2.0 * dc
    value = leading + numerator / d
    terms = {"sigma0": s0, "leading": leading, "numerator": numerator, "denominator": d,
             "shift": shift, "dc_dt": dc, "mu_star": mu, "dmu_star_dt": dmu}
    return WingPoint("local", side, y, value, terms, True, 0.5)
