"""Sharp tail expansion of ``P(X >= x)`` and the tilted-ratio correction.

Both results need only a log-MGF curve whose pole-side behaviour is
regularly varying in the pole distance ``x = 1/(mu* - mu)`` with index
``alpha``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .core import SQRT_2PI, MgfCurve, legendre
from .errors import DomainError, RegimeError

# p*(x) must exceed this fraction of mu* before the expansion is reported
REGIME_FRACTION = 0.9
# slack on the guard so that exact boundary cases are not rejected by rounding
REGIME_SLACK = 1e-9


@dataclass(frozen=True)
class TailEstimate:
    """``P(X >= x) ~ exp(-Lambda*(x)) (leading - correction)``."""

    x: float
    log_prob: float
    leading: float
    correction: float
    prob: float
    lambda_star: float
    p_star: float


def tail_constant(alpha: float, mu_star: float) -> float:
    """``(2 + alpha/(alpha+1)^2) / (24 mu* sqrt(2 pi))``."""
    return (2.0 + alpha / (alpha + 1.0) ** 2) / (24.0 * mu_star * SQRT_2PI)


def tail_expansion(
    curve: MgfCurve,
    t: float,
    x: float,
    regime_fraction: float = REGIME_FRACTION,
) -> TailEstimate:
    """Two-term tail expansion built on the conjugate point at ``x``.

    Parameters
    ----------
    curve : MgfCurve
        Log-MGF of ``+X`` (right) or ``-X`` (left); for a left curve the
        result is ``P(-X >= x)``.
    t : float
        Maturity.
    x : float
        Tail argument.
    regime_fraction : float
        The estimate is only returned when ``p*(x) > regime_fraction * mu*``.

    Raises
    ------
    RegimeError
        If the maximiser is still far from the pole.
    """
    mu_star = curve.mu_star(t)
    if not math.isfinite(mu_star):
        raise DomainError("tail expansion needs a finite critical moment")
    cp = legendre(curve, t, x)
    if cp.p_star < regime_fraction * mu_star * (1.0 - REGIME_SLACK):
        raise RegimeError(
            f"p*({x}) = {cp.p_star:.6g} is below {regime_fraction} mu* = {regime_fraction * mu_star:.6g}"
        )
    if not cp.p_star > 0.0:
        raise RegimeError(f"p*({x}) = {cp.p_star} is not positive")
    root = math.sqrt(cp.p_star_prime)
    leading = root / (cp.p_star * SQRT_2PI)
    correction = tail_constant(curve.alpha, mu_star) / (x * x * root)
    bracket = leading - correction
    log_prob = -cp.lambda_star + math.log(bracket) if bracket > 0.0 else -math.inf
    prob = math.exp(log_prob) if bracket > 0.0 else 0.0
    return TailEstimate(x, log_prob, leading, correction, prob, cp.lambda_star, cp.p_star)


def ratio_correction(curve: MgfCurve, t: float, x: float, gamma: float) -> tuple[float, float]:
    """Evaluation point and factor for ``E[g(X) e^{p X}] / E[e^{p X}]`` at ``p = mu* - 1/x``.

    Returns ``(Lambda'(p), 1 + (gamma^2 - gamma) Lambda''(p) / (2 Lambda'(p)^2))``;
    the caller evaluates ``g`` at the first entry and multiplies by the second.
    """
    mu = curve.mu_star(t) - 1.0 / x
    if mu < curve.mu_min:
        raise DomainError(f"mu* - 1/x = {mu} is outside the domain of the curve")
    _, d1, d2 = curve.derivatives(t, mu)
    factor = 1.0 + (gamma * gamma - gamma) * d2 / (2.0 * d1 * d1)
    return d1, factor
