"""Model-free extreme-strike formulas for local and implied volatility.

Both wings are driven only by a :class:`~wingtail.core.MgfCurve`: its
critical moment, the motion of that moment in maturity, and the log-MGF
close to the pole.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import MgfCurve, Side, bisect, legendre, lee_slope
from .errors import DegenerateWing, DomainError, NegativeDiscriminant, RegimeError

__all__ = [
    "WingPoint",
    "WingGuards",
    "local_vol_wing",
    "implied_vol_wing",
    "lee_slope",
    "implied_from_conjugate",
    "local_variance_from_pole",
    "SIGMA0_DRIFT_WEIGHT",
]

# Weight of the sigma_0 drift term in the local-variance correction; the
# second-order Ito term of exp(p X) contributes one half.
SIGMA0_DRIFT_WEIGHT = 0.5


@dataclass(frozen=True)
class WingGuards:
    """Onset thresholds for the asymptotic regime."""

    min_nu: float = 5.0
    min_k: float = 3.0


DEFAULT_GUARDS = WingGuards()


@dataclass(frozen=True)
class WingPoint:
    """One abscissa of a wing: local variance ``Sigma^2`` or total implied variance ``t sigma^2``."""

    kind: str  # "local" or "implied"
    side: Side
    abscissa: float
    value: float
    terms: dict = field(default_factory=dict)
    regime_ok: bool = True
    error_order: float = 0.0  # decay exponent of the neglected remainder, metadata only

    def recombine(self) -> float:
        """Rebuild ``value`` from the stored terms."""
        tm = self.terms
        if self.kind == "local":
            return tm["leading"] + tm["numerator"] / tm["denominator"]
        s = self.side.sign
        return (4.0 * tm["lambda_star"] + 2.0 * tm["c_tilde"] - 2.0 * s * self.abscissa
                - 4.0 * tm["sqrt_term"])


def sigma0(mu_star: float, dmu_star_dt: float, side: Side) -> float:
    """Leading local-variance slope ``-2 dmu*/dt / (mu*^2 -+ mu*)``."""
    s = side.sign
    return -2.0 * dmu_star_dt / (mu_star * mu_star - s * mu_star)


def local_variance_from_pole(
    side: Side,
    y: float,
    nu: float,
    dnu_dy: float,
    mu_star: float,
    dmu_star_dt: float,
    dt_delta: float,
    gamma: float,
    q: float = 0.0,
) -> WingPoint:
    """Assemble the local-variance wing from pole-side quantities.

    ``nu`` is the pole distance ``x`` at which ``Lambda'(mu* - 1/x) = y``,
    ``dnu_dy`` its derivative and ``dt_delta`` the maturity derivative of
    ``Lambda(t, mu*(t) - 1/x)`` at fixed ``x = nu``.
    """
    s = side.sign
    if dmu_star_dt == 0.0:
        raise DegenerateWing("critical moment is constant in maturity; the local-variance slope vanishes")
    s0 = sigma0(mu_star, dmu_star_dt, side)
    leading = s0 * y
    p = mu_star - 1.0 / nu
    drift = SIGMA0_DRIFT_WEIGHT * s0 * (1.0 - s * 2.0 * mu_star + s / nu) * y / nu
    numerator = dt_delta - s * q - s * drift
    ratio = nu * nu / (2.0 * y * y * dnu_dy)
    denominator = 0.5 * (p * p - s * p) * (1.0 + (gamma * gamma - gamma) * ratio)
    value = leading + numerator / denominator
    terms = {
        "sigma0": s0,
        "leading": leading,
        "nu": nu,
        "dnu_dy": dnu_dy,
        "dt_delta": dt_delta,
        "drift": drift,
        "numerator": numerator,
        "ratio_term": ratio,
        "denominator": denominator,
    }
    return WingPoint("local", side, y, value, terms, True, gamma)


def local_vol_wing(
    curve: MgfCurve,
    t: float,
    y: float,
    q: float = 0.0,
    guards: WingGuards = DEFAULT_GUARDS,
) -> WingPoint:
    """Local variance ``Sigma^2(t, +-y)`` for large ``y`` from a log-MGF curve.

    ``nu(y)`` is found by bisection on the monotone map
    ``x -> dLambda/dmu(t, mu* - 1/x)``; the maturity derivative of
    ``Lambda(t, mu*(t) - 1/x)`` uses central differences with ``h = 1e-3 t``.

    Raises
    ------
    DegenerateWing
        If the critical moment does not move with ``t``.
    RegimeError
        If ``nu(y)`` falls below ``guards.min_nu``.
    """
    side = curve.side
    mu_star = curve.mu_star(t)
    dmu = curve.dmu_star_dt(t)
    if dmu == 0.0:
        raise DegenerateWing("critical moment is constant in maturity; the local-variance slope vanishes")

    def slope_at(x: float) -> float:
        return curve.derivatives(t, mu_star - 1.0 / x)[1]

    # the pole variable cannot go below the edge of the MGF domain
    x_edge = 1.0 / (mu_star - curve.mu_min) if math.isfinite(curve.mu_min) else 0.0
    lo = max(guards.min_nu, x_edge * (1.0 + 1e-6))
    if slope_at(lo) > y:
        raise RegimeError(f"nu({y}) is below the regime guard {guards.min_nu}")
    hi = 2.0 * lo
    while slope_at(hi) < y:
        lo, hi = hi, 2.0 * hi
        if hi > 1e15:
            raise RegimeError(f"could not bracket nu({y})")
    nu = bisect(lambda x: slope_at(x) - y, lo, hi, xtol=0.0, rtol=1e-14)

    _, d1, d2 = curve.derivatives(t, mu_star - 1.0 / nu)
    # y = Lambda'(mu* - 1/nu) so dy/dnu = Lambda''/nu^2
    dnu_dy = nu * nu / d2

    h = 1e-3 * t

    def delta(tt: float) -> float:
        return curve.lam(tt, curve.mu_star(tt) - 1.0 / nu)

    dt_delta = (delta(t + h) - delta(t - h)) / (2.0 * h)
    return local_variance_from_pole(side, y, nu, dnu_dy, mu_star, dmu, dt_delta, curve.gamma, q)


def _c_tilde_constant(mu_star: float, side: Side) -> float:
    half = 0.5 * mu_star
    inner = math.sqrt(half) - half * math.sqrt(lee_slope(mu_star, side))
    if not inner > 0.0:
        raise DomainError(f"critical moment {mu_star} leaves the c-tilde logarithm undefined")
    return 2.0 * math.log(inner)


def implied_from_conjugate(
    side: Side,
    k: float,
    mu_star: float,
    lambda_star: float,
    k_times_curvature: float,
    alpha: float = 1.0,
) -> WingPoint:
    """Total implied variance from the conjugate value and ``k * d^2Lambda*/dk^2``."""
    s = side.sign
    if side is Side.RIGHT and not mu_star > 1.0:
        raise DomainError(f"right critical moment must exceed 1, got {mu_star}")
    c_tilde = -math.log(k_times_curvature) + _c_tilde_constant(mu_star, side)
    shifted = lambda_star + 0.5 * c_tilde
    disc = shifted * (shifted - s * k)
    if disc < 0.0:
        raise NegativeDiscriminant(
            f"(Lambda* + c/2)(Lambda* + c/2 -+ k) = {disc} < 0 at k={k}; strike too small for the wing"
        )
    sqrt_term = math.sqrt(disc)
    value = 4.0 * lambda_star + 2.0 * c_tilde - 2.0 * s * k - 4.0 * sqrt_term
    terms = {"lambda_star": lambda_star, "c_tilde": c_tilde, "sqrt_term": sqrt_term,
             "lee_slope": lee_slope(mu_star, side), "mu_star": mu_star}
    return WingPoint("implied", side, k, value, terms, True, min(alpha, 1.0) / (alpha + 1.0))


def implied_vol_wing(
    curve: MgfCurve,
    t: float,
    k: float,
    guards: WingGuards = DEFAULT_GUARDS,
) -> WingPoint:
    """Total implied variance ``t sigma^2(t, +-k)`` for large ``k``.

    The conjugate ``Lambda*`` and its curvature come from
    :func:`~wingtail.core.legendre`.
    """
    if k < guards.min_k:
        raise RegimeError(f"k={k} is below the regime guard {guards.min_k}")
    mu_star = curve.mu_star(t)
    if curve.side is Side.RIGHT and not mu_star > 1.0:
        raise DomainError(f"right critical moment must exceed 1, got {mu_star}")
    cp = legendre(curve, t, k)
    return implied_from_conjugate(curve.side, k, mu_star, cp.lambda_star,
                                  k * cp.lambda_star_second, curve.alpha)
