"""Stein-Stein adapter and curves built directly from a pole expansion."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from ..core import MgfCurve, Side
from ..errors import DomainError
from .heston import MgfExpansion

TIME_STEP = 1e-3


def expansion_curve(
    expansion_at: Callable[[float], MgfExpansion],
    alpha: float = 1.0,
    name: str = "pole",
) -> MgfCurve:
    """Curve whose log-MGF is the truncated expansion ``omega/e + L ln(1/e) + m`` with ``e = mu* - mu``.

    ``expansion_at(t)`` supplies the coefficients at each maturity; the
    derivatives in ``mu`` are exact.  The curve is not shifted, so
    ``Lambda(0)`` is generally nonzero.
    """
    probe = expansion_at(1.0)

    def lam(t: float, mu: float) -> float:
        return expansion_at(t).lambda_tilde(mu)

    def dlam(t: float, mu: float) -> float:
        e = expansion_at(t)
        eps = e.mu_star - mu
        return e.omega / (eps * eps) + e.log_coeff / eps

    def d2lam(t: float, mu: float) -> float:
        e = expansion_at(t)
        eps = e.mu_star - mu
        return 2.0 * e.omega / eps ** 3 + e.log_coeff / (eps * eps)

    def dmu(t: float) -> float:
        h = TIME_STEP * t
        return (expansion_at(t + h).mu_star - expansion_at(t - h).mu_star) / (2.0 * h)

    return MgfCurve(
        side=probe.side,
        lam=lam,
        mu_star=lambda t: expansion_at(t).mu_star,
        dmu_star_dt=dmu,
        alpha=alpha,
        mu_min=-math.inf,
        dlam=dlam,
        d2lam=d2lam,
        name=name,
    )


def pole_curve(omega: float, mu_star: float, log_coeff: float = 0.0, m_const: float = 0.0,
               side: Side | str = Side.RIGHT) -> MgfCurve:
    """Time-independent synthetic curve ``omega/(mu* - mu) + log_coeff ln(1/(mu* - mu)) + m_const``."""
    if not omega > 0.0:
        raise DomainError(f"omega must be positive, got {omega}")
    e = MgfExpansion(Side.parse(side), mu_star, omega, log_coeff, m_const)
    return expansion_curve(lambda t: e, name="pure-pole")


@dataclass(frozen=True)
class SteinSteinCoeffs:
    """Maturity-dependent coefficients ``B1 > 1``, ``B2 > 0`` and ``B3`` of the Stein-Stein expansion."""

    B1: Callable[[float], float]
    B2: Callable[[float], float]
    B3: Callable[[float], float]


def stein_stein_expansion(c: SteinSteinCoeffs, t: float) -> MgfExpansion:
    """``mu* = B1``, ``omega = B2^2/4``, log coefficient ``1/2``, ``m = B3 - ln(B2/(8 pi B1))/2``."""
    b1, b2, b3 = c.B1(t), c.B2(t), c.B3(t)
    if not b1 > 1.0:
        raise DomainError(f"B1({t}) = {b1} must exceed 1")
    if not b2 > 0.0:
        raise DomainError(f"B2({t}) = {b2} must be positive")
    m = b3 - 0.5 * math.log(b2 / (8.0 * math.pi * b1))
    return MgfExpansion(Side.RIGHT, b1, 0.25 * b2 * b2, 0.5, m, t=t)


def stein_stein_curve(c: SteinSteinCoeffs) -> tuple[MgfCurve, Callable[[float], MgfExpansion]]:
    """Right-side curve from the reconstructed expansion, with its coefficient map ``t -> MgfExpansion``."""

    def at(t: float) -> MgfExpansion:
        return stein_stein_expansion(c, t)

    return expansion_curve(at, alpha=1.0, name="stein-stein"), at
