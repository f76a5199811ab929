"""Black-Scholes primitives, convex conjugation and pole-aware differentiation.

Everything here works with a forward normalised to one and zero rates, so a
call price is a function of the log-strike ``k`` and the total volatility
``v = sigma * sqrt(t)`` only.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

from scipy.special import erfcx, ndtr

from .errors import BracketingError, DomainError, NonConvergence, OutOfBounds

SQRT2 = math.sqrt(2.0)
SQRT_2PI = math.sqrt(2.0 * math.pi)

# root-finder protocol shared by every solver in the package
BISECTION_WIDTH = 1e-13
MAX_ITERATIONS = 200


class Side(str, enum.Enum):
    """Which tail of the log-price is being studied.

    ``RIGHT`` refers to ``+X`` (large strikes, call wing) and ``LEFT`` to
    ``-X`` (small strikes, put wing).
    """

    RIGHT = "right"
    LEFT = "left"

    @property
    def sign(self) -> int:
        return 1 if self is Side.RIGHT else -1

    @classmethod
    def parse(cls, value: "Side | str") -> "Side":
        if isinstance(value, Side):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown side {value!r}; expected 'right' or 'left'") from None


# ---------------------------------------------------------------------------
# Black-Scholes
# ---------------------------------------------------------------------------

def norm_cdf(x: float) -> float:
    return float(ndtr(x))


def norm_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / SQRT_2PI


def d_call(k: float, v: float) -> float:
    """The tail argument ``d(k) = (k + v^2/2) / v`` of the right wing."""
    return (k + 0.5 * v * v) / v


def d_put(k: float, v: float) -> float:
    """The tail argument ``(k - v^2/2) / v`` of the left wing (put struck at ``exp(-k)``)."""
    return (k - 0.5 * v * v) / v


def _otm_call(k: float, v: float) -> float:
    # N(d1) - e^k N(d2) = exp(-d1^2/2)/2 * (erfcx(-d1/sqrt2) - erfcx(-d2/sqrt2))
    # because k - d2^2/2 = -d1^2/2; no cancellation of two tiny numbers.
    d1 = -k / v + 0.5 * v
    d2 = d1 - v
    a = float(erfcx(-d1 / SQRT2))
    b = float(erfcx(-d2 / SQRT2))
    return max(0.5 * math.exp(-0.5 * d1 * d1) * (a - b), 0.0)


def bs_call(k: float, v: float) -> float:
    """Forward-normalised Black-Scholes call ``C_BS(k, v)``.

    Parameters
    ----------
    k : float
        Log-strike ``ln(K / F)``.
    v : float
        Total volatility ``sigma * sqrt(t)``; ``v = 0`` returns the intrinsic value.
    """
    if v < 0.0 or not math.isfinite(v):
        raise DomainError(f"total volatility must be finite and nonnegative, got {v}")
    if v == 0.0:
        return max(1.0 - math.exp(k), 0.0)
    if k >= 0.0:
        return _otm_call(k, v)
    # in-the-money: parity with the out-of-the-money put
    return 1.0 - math.exp(k) + bs_put(k, v)


def bs_put(k: float, v: float) -> float:
    """Forward-normalised Black-Scholes put struck at ``exp(k)``."""
    if v < 0.0 or not math.isfinite(v):
        raise DomainError(f"total volatility must be finite and nonnegative, got {v}")
    if v == 0.0:
        return max(math.exp(k) - 1.0, 0.0)
    if k <= 0.0:
        # P(k, v) = e^k * C(-k, v) by the symmetry of the lognormal law
        return math.exp(k) * _otm_call(-k, v)
    return math.exp(k) - 1.0 + bs_call(k, v)


def bs_vega(k: float, v: float) -> float:
    """Derivative of :func:`bs_call` with respect to ``v``."""
    return norm_pdf(-k / v + 0.5 * v)


def implied_total_vol(price: float, k: float) -> float:
    """Invert :func:`bs_call` in ``v``.

    Bisection on the monotone map ``v -> C_BS(k, v)`` down to a width of
    ``1e-14`` and then two guarded Newton steps.

    Raises
    ------
    OutOfBounds
        If ``price`` lies outside ``(max(1 - e^k, 0), 1)``.
    NonConvergence
        If the bracket cannot be established or bisection exceeds its budget.
    """
    lower = max(1.0 - math.exp(k), 0.0)
    if not (lower < price < 1.0):
        raise OutOfBounds(f"call price {price!r} outside the no-arbitrage bracket ({lower}, 1) at k={k}")

    lo, hi = 0.0, 1.0
    n = 0
    while bs_call(k, hi) < price:
        lo, hi = hi, 2.0 * hi
        n += 1
        if n > 60:
            raise NonConvergence(f"could not bracket implied volatility for price={price}, k={k}")

    for _ in range(MAX_ITERATIONS):
        if hi - lo <= 1e-14 * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if bs_call(k, mid) < price:
            lo = mid
        else:
            hi = mid
    else:
        raise NonConvergence(f"implied volatility bisection did not converge for price={price}, k={k}")

    v = 0.5 * (lo + hi)
    err = bs_call(k, v) - price
    for _ in range(2):
        vega = bs_vega(k, v)
        if vega <= 0.0:
            break
        cand = v - err / vega
        if not (lo <= cand <= hi):
            break
        cand_err = bs_call(k, cand) - price
        if abs(cand_err) >= abs(err):
            break
        v, err = cand, cand_err
    return v


def implied_total_vol_put(price: float, k: float) -> float:
    """Total volatility implied by a put struck at ``exp(k)``.

    Uses ``P(k, v) = e^k C(-k, v)`` so that deep out-of-the-money puts are
    inverted through an out-of-the-money call without cancellation.
    """
    return implied_total_vol(price * math.exp(-k), -k)


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------

def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    xtol: float = BISECTION_WIDTH,
    rtol: float = 0.0,
    fprime: Optional[Callable[[float], float]] = None,
    polish_steps: int = 2,
) -> float:
    """Bisection on a sign change of ``f`` in ``[lo, hi]`` followed by guarded Newton polish.

    ``f(lo)`` and ``f(hi)`` must have opposite signs (zero counts as either).
    """
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise BracketingError(f"no sign change on [{lo}, {hi}]: f={flo}, {fhi}")
    lo_positive = flo > 0.0
    for _ in range(MAX_ITERATIONS):
        if hi - lo <= xtol + rtol * max(abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == lo_positive:
            lo = mid
        else:
            hi = mid
    else:
        raise NonConvergence(f"bisection exhausted {MAX_ITERATIONS} iterations on [{lo}, {hi}]")

    x = 0.5 * (lo + hi)
    if fprime is None or polish_steps <= 0:
        return x
    fx = f(x)
    for _ in range(polish_steps):
        d = fprime(x)
        if d == 0.0 or not math.isfinite(d):
            break
        cand = x - fx / d
        if not (lo <= cand <= hi):
            break
        fc = f(cand)
        if abs(fc) >= abs(fx):
            break
        x, fx = cand, fc
    return x


# ---------------------------------------------------------------------------
# Moment generating function curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MgfCurve:
    """Log-MGF ``Lambda(t, mu)`` of ``+X`` or ``-X`` with a finite explosion moment.

    ``lam(t, mu)`` is defined for ``mu_min <= mu < mu_star(t)``.  Optional
    ``dlam``/``d2lam`` supply exact derivatives in ``mu``; otherwise they are
    obtained by finite differences in the pole variable ``x = 1/(mu* - mu)``.
    """

    side: Side
    lam: Callable[[float, float], float]
    mu_star: Callable[[float], float]
    dmu_star_dt: Callable[[float], float]
    alpha: float
    mu_min: float = 0.0
    dlam: Optional[Callable[[float, float], float]] = None
    d2lam: Optional[Callable[[float, float], float]] = None
    name: str = "curve"

    def __post_init__(self) -> None:
        if not self.alpha > 0.0:
            raise DomainError(f"regular-variation index must be positive, got {self.alpha}")

    @property
    def gamma(self) -> float:
        return self.alpha / (self.alpha + 1.0)

    def derivatives(self, t: float, mu: float) -> tuple[float, float, float]:
        """Return ``(Lambda, Lambda', Lambda'')`` at ``mu``."""
        if self.dlam is not None and self.d2lam is not None:
            return self.lam(t, mu), self.dlam(t, mu), self.d2lam(t, mu)
        return mgf_derivatives(self.lam, t, mu, self.mu_star(t), self.mu_min)


# forward stencils for the edge of the domain, centred otherwise
_D1_CENTRAL = ((-2, 1.0 / 12), (-1, -8.0 / 12), (1, 8.0 / 12), (2, -1.0 / 12))
_D2_CENTRAL = ((-2, -1.0 / 12), (-1, 16.0 / 12), (0, -30.0 / 12), (1, 16.0 / 12), (2, -1.0 / 12))
_D1_FORWARD = ((0, -25.0 / 12), (1, 48.0 / 12), (2, -36.0 / 12), (3, 16.0 / 12), (4, -3.0 / 12))
_D2_FORWARD = ((0, 35.0 / 12), (1, -104.0 / 12), (2, 114.0 / 12), (3, -56.0 / 12), (4, 11.0 / 12))

# relative steps: ~eps^(1/5) for the first derivative, ~eps^(1/6) for the second
_C1 = 1e-3
_C2 = 5e-3


def _stencil(g: Callable[[float], float], z: float, h: float, rule) -> float:
    return sum(w * g(z + j * h) for j, w in rule)


def mgf_derivatives(
    lam: Callable[[float, float], float],
    t: float,
    mu: float,
    mu_star: float,
    mu_min: float = -math.inf,
) -> tuple[float, float, float]:
    """Finite-difference ``(Lambda, Lambda', Lambda'')`` for a log-MGF with a pole at ``mu_star``.

    Differentiation happens in ``x = 1/(mu_star - mu)`` where ``Lambda`` is
    close to linear, so a step proportional to ``x`` keeps full relative
    accuracy arbitrarily close to the singularity.
    """
    if not mu < mu_star:
        raise DomainError(f"mu={mu} is not below the critical moment {mu_star}")
    value = lam(t, mu)

    if math.isinf(mu_star):
        scale = max(1.0, abs(mu))
        h1, h2 = _C1 * scale, _C2 * scale
        g = lambda z: lam(t, z)  # noqa: E731
        if mu - 2.0 * h2 >= mu_min:
            d1 = _stencil(g, mu, h1, _D1_CENTRAL) / h1
            d2 = _stencil(g, mu, h2, _D2_CENTRAL) / (h2 * h2)
        else:
            d1 = _stencil(g, mu, h1, _D1_FORWARD) / h1
            d2 = _stencil(g, mu, h2, _D2_FORWARD) / (h2 * h2)
        return value, d1, d2

    x = 1.0 / (mu_star - mu)
    x_min = 1.0 / (mu_star - mu_min) if math.isfinite(mu_min) else 0.0
    f = lambda z: lam(t, mu_star - 1.0 / z)  # noqa: E731
    h1, h2 = _C1 * x, _C2 * x
    if x - 2.0 * h2 > x_min:
        f1 = _stencil(f, x, h1, _D1_CENTRAL) / h1
        f2 = _stencil(f, x, h2, _D2_CENTRAL) / (h2 * h2)
    else:
        f1 = _stencil(f, x, h1, _D1_FORWARD) / h1
        f2 = _stencil(f, x, h2, _D2_FORWARD) / (h2 * h2)
    # chain rule for mu = mu* - 1/x, dx/dmu = x^2
    d1 = x * x * f1
    d2 = 2.0 * x ** 3 * f1 + x ** 4 * f2
    return value, d1, d2


@dataclass(frozen=True)
class ConjugatePoint:
    """Fenchel-Legendre data at ``x``: maximiser, transform value and curvature."""

    x: float
    p_star: float
    lambda_star: float
    p_star_prime: float
    lambda_star_second: float


def legendre(curve: MgfCurve, t: float, x: float) -> ConjugatePoint:
    """Fenchel-Legendre transform ``sup_p (p x - Lambda(t, p))``.

    The maximiser solves ``Lambda'(t, p) = x`` on ``[mu_min, mu*)``; the
    bracket grows geometrically towards the pole and is then bisected.

    Raises
    ------
    BracketingError
        If ``x`` does not exceed ``Lambda'`` at the lower end of the domain.
    """
    mu_star = curve.mu_star(t)
    lo = max(curve.mu_min, 0.0)

    def slope(p: float) -> float:
        return curve.derivatives(t, p)[1]

    def curvature(p: float) -> float:
        return curve.derivatives(t, p)[2]

    g_lo = slope(lo) - x
    if g_lo > 1e-9 * max(1.0, abs(x)):
        raise BracketingError(f"x={x} lies below Lambda'({lo})={g_lo + x}; no maximiser in the domain")

    if g_lo >= 0.0:
        p = lo
    else:
        if math.isinf(mu_star):
            hi = lo + 1.0
            while slope(hi) < x:
                lo, hi = hi, hi + 2.0 * (hi - lo)
                if hi > 1e300:
                    raise BracketingError(f"no maximiser found for x={x}")
        else:
            gap = mu_star - lo
            hi = mu_star - 0.5 * gap
            n = 0
            while slope(hi) < x:
                lo = hi
                gap *= 0.5
                hi = mu_star - gap
                n += 1
                if n > 1000 or gap <= 1e-300:
                    raise BracketingError(f"no maximiser found for x={x}")
        p = bisect(lambda q: slope(q) - x, lo, hi, xtol=BISECTION_WIDTH * max(1.0, abs(hi)),
                   rtol=0.0, fprime=curvature)

    value, _, second = curve.derivatives(t, p)
    if not second > 0.0:
        raise DomainError(f"Lambda''({p}) = {second} is not positive; curve is not strictly convex")
    pprime = 1.0 / second
    return ConjugatePoint(x=x, p_star=p, lambda_star=p * x - value, p_star_prime=pprime,
                          lambda_star_second=pprime)


def lee_slope(mu_star: float, side: Side | str) -> float:
    """Limiting total-variance slope of the implied wing for a critical moment ``mu_star``."""
    side = Side.parse(side)
    if side is Side.RIGHT:
        if not mu_star >= 1.0:
            raise DomainError(f"right critical moment must be >= 1, got {mu_star}")
        # -2 + 4mu - 4 sqrt(mu(mu-1)) written without cancellation
        return 2.0 / (2.0 * mu_star - 1.0 + 2.0 * math.sqrt(mu_star * (mu_star - 1.0))) if mu_star > 1.0 else 2.0
    if not mu_star > 0.0:
        raise DomainError(f"left critical moment must be > 0, got {mu_star}")
    return 2.0 / (2.0 * mu_star + 1.0 + 2.0 * math.sqrt(mu_star * (mu_star + 1.0)))
