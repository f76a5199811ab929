"""Heston model: closed-form log-MGF, explosion times, critical moments and wings.

The variance follows ``dV = (a - b V) dt + sigma sqrt(V) dW`` with
``a = kappa * theta``.  For a real tilt ``m`` (``m = mu`` on the right,
``m = -mu`` on the left) the log-MGF is ``a phi(t; m) + v0 psi(t; m)``
where ``psi`` solves the Riccati equation

    psi' = (m^2 - m)/2 - (b - rho sigma m) psi + sigma^2 psi^2 / 2,  psi(0) = 0

and ``phi`` is its time integral.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from ..core import MgfCurve, Side, bisect
from ..errors import DegenerateWing, DomainError, ExtrapolationUnstable, RegimeError
from ..wings import (
    DEFAULT_GUARDS,
    WingGuards,
    WingPoint,
    implied_from_conjugate,
    local_variance_from_pole,
)

# below this |c1| the tangent branch is replaced by its c1 -> 0 limit
BRANCH_EPS = 1e-10


@dataclass(frozen=True)
class HestonParams:
    """Heston parameters with ``a = kappa theta`` and ``b = kappa``."""

    a: float
    b: float
    sigma: float
    rho: float
    v0: float
    q: float = 0.0

    def __post_init__(self) -> None:
        for name in ("a", "b", "sigma", "rho", "v0", "q"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.a < 0.0:
            raise DomainError(f"a must be nonnegative, got {self.a}")
        if self.b < 0.0:
            raise DomainError(f"b must be nonnegative, got {self.b}")
        if not self.sigma > 0.0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if not -1.0 < self.rho < 1.0:
            raise DomainError(f"rho must lie in (-1, 1), got {self.rho}")
        if not self.v0 > 0.0:
            raise DomainError(f"v0 must be positive, got {self.v0}")


def _tilt(mu: float, side: Side) -> float:
    return mu if side is Side.RIGHT else -mu


def c1(p: HestonParams, m: float) -> float:
    """Discriminant ``(b - rho sigma m)^2 - sigma^2 (m^2 - m)`` at tilt ``m``."""
    beta = p.b - p.rho * p.sigma * m
    return beta * beta - p.sigma ** 2 * (m * m - m)


def c2(p: HestonParams, m: float) -> float:
    """Ratio ``(beta + sqrt(c1)) / (beta - sqrt(c1))`` of the hyperbolic branch."""
    beta = p.b - p.rho * p.sigma * m
    d = math.sqrt(c1(p, m))
    return (beta + d) / (beta - d)


def riccati_closed(p: HestonParams, t: float, m: float) -> tuple[float, float]:
    """``(phi, psi)`` at maturity ``t`` and real tilt ``m``.

    Raises :class:`DomainError` once the moment has exploded (``t >= T*(m)``).
    """
    s2 = p.sigma * p.sigma
    A = 0.5 * (m * m - m)
    beta = p.b - p.rho * p.sigma * m
    disc = beta * beta - 2.0 * s2 * A
    if disc >= -BRANCH_EPS:
        d = math.sqrt(max(disc, 0.0))
        # beta - d without cancellation when both are positive
        bmd = 2.0 * s2 * A / (beta + d) if beta > 0.0 else beta - d
        ed = -math.expm1(-d * t) / d if d > 0.0 else t
        den = 2.0 + bmd * ed
        if not den > 0.0:
            raise DomainError(f"moment of order {m} has exploded before t={t}")
        psi = 2.0 * A * ed / den
        phi = (bmd * t - 2.0 * math.log1p(0.5 * bmd * ed)) / s2
        return phi, psi
    s = math.sqrt(-disc)
    # distance of the tangent argument to pi/2
    gap = math.atan2(s, -beta) - 0.5 * s * t
    if not gap > 0.0:
        raise DomainError(f"moment of order {m} has exploded before t={t}")
    psi = (beta + s * math.cos(gap) / math.sin(gap)) / s2
    phi = (beta * t - 2.0 * math.log(math.sin(gap) * math.hypot(s, beta) / s)) / s2
    return phi, psi


def heston_log_mgf(p: HestonParams, t: float, mu: float, side: Side | str) -> float:
    """``ln E exp(mu X_t)`` (right) or ``ln E exp(-mu X_t)`` (left).

    The right side rejects ``0 < mu < 1``; both sides reject ``mu`` at or
    beyond the critical moment.
    """
    side = Side.parse(side)
    if side is Side.RIGHT and not mu >= 1.0:
        raise DomainError(f"right-side tilt must be >= 1 (0 < mu < 1 is not handled), got {mu}")
    if side is Side.LEFT and not mu > 0.0:
        raise DomainError(f"left-side tilt must be > 0, got {mu}")
    return _log_mgf(p, t, _tilt(mu, side))


def _log_mgf(p: HestonParams, t: float, m: float) -> float:
    phi, psi = riccati_closed(p, t, m)
    return p.a * phi + p.v0 * psi


def heston_mu_hat(p: HestonParams, side: Side | str) -> float:
    """Smallest positive ``mu`` with ``c1(+-mu) = 0``: where the tangent branch starts."""
    side = Side.parse(side)
    s2 = p.sigma * p.sigma
    lin = s2 - 2.0 * p.b * p.rho * p.sigma
    root = math.sqrt(lin * lin + 4.0 * p.b * p.b * s2 * (1.0 - p.rho ** 2))
    den = 2.0 * s2 * (1.0 - p.rho ** 2)
    if side is Side.RIGHT:
        return (lin + root) / den
    # -lin + root without cancellation
    return (4.0 * p.b * p.b * s2 * (1.0 - p.rho ** 2) / (lin + root) if lin > 0.0 else root - lin) / den


def heston_explosion_time(p: HestonParams, mu: float, side: Side | str) -> float:
    """Maturity at which ``E exp(+-mu X_t)`` first becomes infinite (``inf`` if never)."""
    side = Side.parse(side)
    return _explosion_time(p, _tilt(mu, side))


def _explosion_time(p: HestonParams, m: float) -> float:
    s2 = p.sigma * p.sigma
    A = 0.5 * (m * m - m)
    if A <= 0.0:
        return math.inf
    beta = p.b - p.rho * p.sigma * m
    disc = beta * beta - 2.0 * s2 * A
    # same branch tolerance as the closed form, so that mu_hat itself never explodes
    if disc >= -BRANCH_EPS:
        if beta >= 0.0:
            return math.inf
        d = math.sqrt(max(disc, 0.0))
        if d == 0.0:
            return 2.0 / -beta
        # ln((beta - d)/(beta + d)) / d for beta < 0
        return math.log1p(2.0 * d / (-beta - d)) / d
    s = math.sqrt(-disc)
    return 2.0 * math.atan2(s, -beta) / s


class CriticalMoment(NamedTuple):
    mu_star: float
    dmu_star_dt: float
    degenerate: bool = False


def heston_critical_moment(p: HestonParams, t: float, side: Side | str) -> CriticalMoment:
    """Critical moment ``mu*(t)`` and its maturity derivative.

    ``mu*`` solves ``T*(mu) = t`` by bisection to machine precision;
    ``dmu*/dt = 1 / (dT*/dmu)`` with a central difference of step
    ``1e-5 mu*``.
    """
    side = Side.parse(side)
    if not t > 0.0:
        raise DomainError(f"maturity must be positive, got {t}")
    sg = side.sign
    lo = 1.0 if side is Side.RIGHT else 0.0
    mu_hat = heston_mu_hat(p, side)
    if mu_hat > lo and math.isinf(heston_explosion_time(p, mu_hat, side)):
        lo = mu_hat
    T = lambda mu: _explosion_time(p, sg * mu)  # noqa: E731

    degenerate = False
    probe = lo + 1e-12 * max(1.0, lo)
    if T(probe) <= t:
        # t beyond the maturity cap where mu* collapses onto its lower limit
        mu_star = probe
        degenerate = True
    else:
        hi = lo + max(1.0, lo)
        n = 0
        while T(hi) > t:
            lo, hi = hi, hi + 2.0 * (hi - lo)
            n += 1
            if n > 200:
                raise DomainError(f"no critical moment found for t={t}")
        mu_star = bisect(lambda mu: T(mu) - t, lo, hi, xtol=0.0, rtol=2e-16, polish_steps=0)

    h = 1e-5 * mu_star
    dT = (T(mu_star + h) - T(mu_star - h)) / (2.0 * h) if not degenerate else -math.inf
    dmu = 1.0 / dT if math.isfinite(dT) and dT != 0.0 else 0.0
    return CriticalMoment(mu_star, dmu, degenerate)


# ---------------------------------------------------------------------------
# Pole expansion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MgfExpansion:
    """Singular expansion ``omega/(mu* - mu) + log_coeff ln(1/(mu* - mu)) + m_const + d1 (mu* - mu)``."""

    side: Side
    mu_star: float
    omega: float
    log_coeff: float
    m_const: float
    d1: float = 0.0
    omega_residual: float = 0.0
    m_residual: float = 0.0
    t: float = math.nan

    def lambda_tilde(self, mu: float) -> float:
        """Truncated expansion (pole, logarithm and constant) at ``mu``."""
        eps = self.mu_star - mu
        if not eps > 0.0:
            raise DomainError(f"mu={mu} is not below the critical moment {self.mu_star}")
        return self.omega / eps - self.log_coeff * math.log(eps) + self.m_const


def richardson(values: list[float], ratio: float = 2.0) -> tuple[float, float, list[float]]:
    """Richardson table for a sequence sampled at ``h_j = h_0 / ratio^j`` with a power series in ``h``.

    Returns ``(estimate, residual, diagonal)``.  The estimate is the diagonal
    entry whose change from the previous diagonal entry is smallest, and the
    residual is that change.
    """
    n = len(values)
    table = [list(values)]
    for i in range(1, n):
        prev = table[-1]
        f = ratio ** i
        table.append([prev[j] + (prev[j] - prev[j - 1]) / (f - 1.0) for j in range(1, len(prev))])
    diag = [row[-1] for row in table]
    best, resid = diag[0], math.inf
    for i in range(1, n):
        change = abs(diag[i] - diag[i - 1])
        if change <= resid:
            best, resid = diag[i], change
    return best, resid, diag


def extract_expansion(
    lam,
    mu_star: float,
    log_coeff: float,
    side: Side,
    *,
    eps0: float = 1e-2,
    depth: int = 8,
    tol: float = 1e-4,
    t: float = math.nan,
) -> MgfExpansion:
    """Pole coefficient, constant and first regular coefficient of ``lam`` at ``mu_star``.

    ``lam`` is a one-argument callable ``mu -> Lambda(mu)``; the logarithmic
    coefficient is supplied.  Samples are taken at ``eps_j = eps0 2^-j``,
    ``j = 0..depth``.
    """
    eps = [eps0 * 0.5 ** j for j in range(depth + 1)]
    vals = [lam(mu_star - e) for e in eps]
    logs = [log_coeff * math.log(1.0 / e) for e in eps]

    g = [e * (v - lg) for e, v, lg in zip(eps, vals, logs)]
    omega, res_w, _ = richardson(g)
    if not omega > 0.0:
        raise ExtrapolationUnstable(f"extracted pole coefficient {omega} is not positive")
    if res_w > tol * abs(omega):
        raise ExtrapolationUnstable(f"pole coefficient unstable: residual {res_w:.3e} vs {omega:.6e}")

    h = [v - omega / e - lg for e, v, lg in zip(eps, vals, logs)]
    m_const, res_m, _ = richardson(h)
    if res_m > tol * max(1.0, abs(m_const)):
        raise ExtrapolationUnstable(f"constant term unstable: residual {res_m:.3e} vs {m_const:.6e}")

    r = [(hv - m_const) / e for e, hv in zip(eps[:-3], h[:-3])]
    d1, _, _ = richardson(r) if len(r) > 1 else (r[0], 0.0, r)
    return MgfExpansion(side, mu_star, omega, log_coeff, m_const, d1, res_w, res_m, t)


def heston_expansion_coeffs(p: HestonParams, t: float, side: Side | str, depth: int = 8) -> MgfExpansion:
    """Pole data of the Heston log-MGF at ``mu*(t)``; the log coefficient is ``2a/sigma^2``."""
    side = Side.parse(side)
    cm = heston_critical_moment(p, t, side)
    log_coeff = 2.0 * p.a / (p.sigma * p.sigma)
    lower = 1.0 if side is Side.RIGHT else 0.0
    eps0 = min(1e-2, 0.25 * (cm.mu_star - lower))
    sg = side.sign
    return extract_expansion(lambda mu: _log_mgf(p, t, sg * mu), cm.mu_star, log_coeff, side,
                             eps0=eps0, depth=depth, t=t)


def heston_nu_tilde(e: MgfExpansion, y: float) -> float:
    """Positive root of ``omega x^2 + log_coeff x = y``."""
    if not (e.omega > 0.0 and y > 0.0):
        raise DomainError("need omega > 0 and y > 0")
    L = e.log_coeff
    # (sqrt(L^2 + 4 omega y) - L) / (2 omega) rationalised
    return 2.0 * y / (math.sqrt(L * L + 4.0 * e.omega * y) + L)


def _nu_tilde_prime(e: MgfExpansion, y: float) -> float:
    return 1.0 / math.sqrt(e.log_coeff ** 2 + 4.0 * e.omega * y)


def heston_curve(p: HestonParams, side: Side | str) -> MgfCurve:
    """The Heston log-MGF of ``+-X`` as a generic :class:`MgfCurve` (index 1)."""
    side = Side.parse(side)
    sg = side.sign
    cache: dict[float, CriticalMoment] = {}

    def moment(t: float) -> CriticalMoment:
        if t not in cache:
            cache[t] = heston_critical_moment(p, t, side)
        return cache[t]

    return MgfCurve(
        side=side,
        lam=lambda t, mu: _log_mgf(p, t, sg * mu),
        mu_star=lambda t: moment(t).mu_star,
        dmu_star_dt=lambda t: moment(t).dmu_star_dt,
        alpha=1.0,
        mu_min=1.0 if side is Side.RIGHT else 0.0,
        name=f"heston-{side.value}",
    )


def _expansion_time_derivatives(p: HestonParams, t: float, side: Side) -> tuple[float, float]:
    h = 1e-3 * t
    up = heston_expansion_coeffs(p, t + h, side)
    dn = heston_expansion_coeffs(p, t - h, side)
    return (up.omega - dn.omega) / (2.0 * h), (up.m_const - dn.m_const) / (2.0 * h)


def heston_local_vol_wing(
    p: HestonParams,
    t: float,
    side: Side | str,
    y: float,
    guards: WingGuards = DEFAULT_GUARDS,
) -> WingPoint:
    """Local variance ``Sigma^2(t, +-y)`` from the Heston pole expansion.

    Uses the quadratic approximation of ``nu`` and maturity derivatives of
    ``omega`` and ``m`` by central differences (``h = 1e-3 t``).
    """
    side = Side.parse(side)
    cm = heston_critical_moment(p, t, side)
    if cm.dmu_star_dt == 0.0:
        raise DegenerateWing("critical moment is constant in maturity")
    e = heston_expansion_coeffs(p, t, side)
    nu = heston_nu_tilde(e, y)
    if nu < guards.min_nu:
        raise RegimeError(f"nu_tilde({y}) = {nu:.4g} is below the regime guard {guards.min_nu}")
    d_omega, d_m = _expansion_time_derivatives(p, t, side)
    point = local_variance_from_pole(side, y, nu, _nu_tilde_prime(e, y), cm.mu_star, cm.dmu_star_dt,
                                     d_omega * nu + d_m, 0.5, p.q)
    point.terms.update({"omega": e.omega, "m_const": e.m_const, "d_omega": d_omega, "d_m": d_m})
    return point


def heston_implied_wing(
    p: HestonParams,
    t: float,
    side: Side | str,
    k: float,
    guards: WingGuards = DEFAULT_GUARDS,
) -> WingPoint:
    """Total implied variance from the truncated expansion and its exact conjugate."""
    side = Side.parse(side)
    if k < guards.min_k:
        raise RegimeError(f"k={k} is below the regime guard {guards.min_k}")
    e = heston_expansion_coeffs(p, t, side)
    nu = heston_nu_tilde(e, k)
    p_star = e.mu_star - 1.0 / nu
    lam_star = p_star * k - e.lambda_tilde(p_star)
    curvature = _nu_tilde_prime(e, k) / (nu * nu)
    point = implied_from_conjugate(side, k, e.mu_star, lam_star, k * curvature, 1.0)
    point.terms.update({"nu": nu, "omega": e.omega, "m_const": e.m_const})
    return point
