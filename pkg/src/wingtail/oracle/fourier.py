"""Fourier pricing and tail probabilities for the Heston model.

All transforms are evaluated along a vertical line ``Re z = c`` inside the
strip where ``E exp(z X)`` is finite.  The integrand is normalised by
``E exp(c X)`` before exponentiation so that very small prices keep their
relative accuracy.
"""
from __future__ import annotations

import math

import numpy as np

from ..core import Side
from ..errors import DomainError, QuadratureNonConvergence
from ..models.heston import HestonParams, heston_critical_moment, riccati_closed

GL_NODES = 32
ABS_TOL = 1e-12
REL_TOL = 1e-9
MAX_PANELS = 4000

_gl_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _gl_cache:
        _gl_cache[n] = np.polynomial.legendre.leggauss(n)
    return _gl_cache[n]


def heston_log_mgf_complex(p: HestonParams, t: float, z) -> np.ndarray:
    """``ln E exp(z X_t)`` for complex ``z`` inside the strip of analyticity.

    Uses the rotation-free form with ``g = (beta - d)/(beta + d)`` and
    ``Re d >= 0``, which keeps the complex logarithm on its principal branch.
    """
    z = np.asarray(z, dtype=complex)
    s2 = p.sigma * p.sigma
    beta = p.b - p.rho * p.sigma * z
    d = np.sqrt(beta * beta - s2 * (z * z - z))
    e = np.exp(-d * t)
    bpd = beta + d
    # beta - d = s2 (z^2 - z) / (beta + d) avoids cancellation
    bmd = s2 * (z * z - z) / bpd
    g = bmd / bpd
    psi = bmd / s2 * (1.0 - e) / (1.0 - g * e)
    phi = (bmd * t - 2.0 * np.log((1.0 - g * e) / (1.0 - g))) / s2
    return p.a * phi + p.v0 * psi


def heston_cf(p: HestonParams, t: float, u) -> complex:
    """Characteristic function ``E exp(i u X_t)``; ``u`` may be complex."""
    if not t > 0.0:
        raise DomainError(f"maturity must be positive, got {t}")
    u = complex(u)
    if u == 0.0:
        return 1.0 + 0.0j
    z = 1j * u
    if z.imag == 0.0:
        # real tilt: use the real closed form and its branch logic
        phi, psi = riccati_closed(p, t, z.real)
        return complex(math.exp(p.a * phi + p.v0 * psi))
    return complex(np.exp(heston_log_mgf_complex(p, t, z)))


def _real_log_mgf(p: HestonParams, t: float, c: float) -> float:
    phi, psi = riccati_closed(p, t, c)
    return p.a * phi + p.v0 * psi


def _curvature(p: HestonParams, t: float, c: float) -> float:
    h = 1e-4 * max(1.0, abs(c))
    lp, l0, lm = (_real_log_mgf(p, t, c + s * h) for s in (1.0, 0.0, -1.0))
    return max((lp - 2.0 * l0 + lm) / (h * h), 1e-8)


def integrate_half_line(f, scale: float, *, n: int = GL_NODES, abs_tol: float = ABS_TOL,
                        rel_tol: float = REL_TOL) -> float:
    """``int_0^inf f(u) du`` for a vectorised, decaying ``f``.

    Panels start at width ``scale`` and widen by 1.25; each panel is
    computed with ``n`` and ``2n`` Gauss-Legendre nodes and the two must
    agree.  Integration stops after three consecutive negligible panels.
    """
    x1, w1 = _gauss_legendre(n)
    x2, w2 = _gauss_legendre(2 * n)
    total = 0.0
    lo = 0.0
    width = scale
    quiet = 0
    for _ in range(MAX_PANELS):
        hi = lo + width
        half, mid = 0.5 * width, lo + 0.5 * width
        coarse = half * float(np.dot(w1, f(mid + half * x1)))
        fine = half * float(np.dot(w2, f(mid + half * x2)))
        if not (math.isfinite(coarse) and math.isfinite(fine)):
            raise QuadratureNonConvergence(f"non-finite integrand on [{lo}, {hi}]")
        if abs(fine - coarse) > max(abs_tol, rel_tol * abs(fine)) and width > 1e-6 * scale:
            width *= 0.5
            continue
        total += fine
        if abs(fine) <= 1e-3 * max(abs_tol, rel_tol * abs(total)):
            quiet += 1
            if quiet >= 3:
                return total
        else:
            quiet = 0
        lo = hi
        width *= 1.25
    raise QuadratureNonConvergence(f"half-line quadrature did not settle after {MAX_PANELS} panels")


def _contour_integral(p: HestonParams, t: float, c: float, x: float, denom) -> float:
    """``(1/pi) int_0^inf Re[exp(-(c+iu) x) M(c+iu) / denom(c+iu)] du`` as ``(value, log_scale)``.

    The true integral is ``value * exp(log_scale)`` with ``log_scale = ln M(c) - c x``.
    """
    lc = _real_log_mgf(p, t, c)

    def f(u):
        z = c + 1j * u
        rel = heston_log_mgf_complex(p, t, z) - lc - 1j * u * x
        return (np.exp(rel) / denom(z)).real

    scale = 1.0 / math.sqrt(_curvature(p, t, c))
    integral = integrate_half_line(f, scale, abs_tol=0.0)
    return integral / math.pi, lc - c * x


def _saddle(p: HestonParams, t: float, x: float, lo: float, hi: float) -> float:
    """Root of ``Lambda'(c) = x`` in ``(lo, hi)``, clipped into the interior."""
    def slope(c: float) -> float:
        h = 1e-6 * max(1.0, abs(c))
        return (_real_log_mgf(p, t, c + h) - _real_log_mgf(p, t, c - h)) / (2.0 * h)

    a, b = lo, hi
    if slope(a) >= x:
        return a
    if slope(b) <= x:
        return b
    for _ in range(200):
        m = 0.5 * (a + b)
        if slope(m) < x:
            a = m
        else:
            b = m
        if b - a < 1e-10 * max(1.0, abs(b)):
            break
    return 0.5 * (a + b)


def default_damping(p: HestonParams, t: float) -> float:
    """``min(0.75 (mu*_+(t) - 1), 4)``."""
    return min(0.75 * (heston_critical_moment(p, t, Side.RIGHT).mu_star - 1.0), 4.0)


def _call_damping(p: HestonParams, t: float, k: float) -> float:
    mu_plus = heston_critical_moment(p, t, Side.RIGHT).mu_star
    alpha = default_damping(p, t)
    if k > 0.0:
        # deep out-of-the-money: move the contour towards the saddle of the damped integrand
        edge = 1.0 + 0.98 * (mu_plus - 1.0)
        alpha = max(alpha, _saddle(p, t, k, 1.0 + alpha, edge) - 1.0)
    return alpha


def _put_damping(p: HestonParams, t: float, k: float) -> float:
    mu_minus = heston_critical_moment(p, t, Side.LEFT).mu_star
    c = -min(0.75 * mu_minus, 4.0)
    if k < 0.0:
        edge = -0.98 * mu_minus
        c = min(c, _saddle(p, t, k, edge, c))
    return c - 1.0


def _damped_price(p: HestonParams, t: float, k: float, alpha: float) -> float:
    integral, log_scale = _contour_integral(p, t, alpha + 1.0, k,
                                            lambda z: (z - 1.0) * z)
    # the payoff transform carries exp((1 - z) k), one factor e^k more than the tail
    return integral * math.exp(log_scale + k)


def fourier_call(p: HestonParams, t: float, k: float, alpha: float | None = None) -> float:
    """Forward-normalised call ``E (e^X - e^k)^+`` by damped Fourier inversion.

    ``alpha`` defaults to ``min(0.75 (mu*_+ - 1), 4)`` and moves towards the
    saddle point for strikes far out of the money.  In the money the call is
    obtained from the put by parity.
    """
    if not t > 0.0:
        raise DomainError(f"maturity must be positive, got {t}")
    if alpha is None and k < 0.0:
        return max(fourier_put(p, t, k) + 1.0 - math.exp(k), 0.0)
    if alpha is None:
        alpha = _call_damping(p, t, k)
    return max(_damped_price(p, t, k, alpha), 0.0)


def fourier_put(p: HestonParams, t: float, k: float, alpha: float | None = None) -> float:
    """Forward-normalised put ``E (e^k - e^X)^+``; ``alpha < -1`` selects the put contour."""
    if not t > 0.0:
        raise DomainError(f"maturity must be positive, got {t}")
    if alpha is None and k > 0.0:
        return max(fourier_call(p, t, k) - 1.0 + math.exp(k), 0.0)
    if alpha is None:
        alpha = _put_damping(p, t, k)
    if not alpha < -1.0:
        raise DomainError(f"put damping must be below -1, got {alpha}")
    return max(_damped_price(p, t, k, alpha), 0.0)


def fourier_tail(p: HestonParams, t: float, x: float, c: float | None = None,
                 lower: bool = False) -> float:
    """``P(X_t >= x)``, or ``P(X_t <= x)`` with ``lower=True``, by inversion along ``Re z = c``.

    For ``c > 0`` the line integral is the survival function itself; for
    ``c < 0`` it equals minus the distribution function.  By default the
    line passes through the saddle point of ``E exp(zX) e^{-zx}``, which
    lies on the side of the origin where the requested probability is the
    small one, so both tails keep full relative accuracy.
    """
    if not t > 0.0:
        raise DomainError(f"maturity must be positive, got {t}")
    if c is None:
        mu_plus = heston_critical_moment(p, t, Side.RIGHT).mu_star
        mu_minus = heston_critical_moment(p, t, Side.LEFT).mu_star
        mean = (_real_log_mgf(p, t, 1e-6) - _real_log_mgf(p, t, -1e-6)) / 2e-6
        if x >= mean:
            c = max(_saddle(p, t, x, 1e-3, 0.98 * mu_plus), 0.05)
        else:
            c = min(_saddle(p, t, x, -0.98 * mu_minus, -1e-3), -0.05)
    if c == 0.0:
        raise DomainError("the inversion line must avoid the origin")
    integral, log_scale = _contour_integral(p, t, c, x, lambda z: z)
    value = integral * math.exp(log_scale)
    if c > 0.0:
        prob = 1.0 - value if lower else value
    else:
        prob = -value if lower else 1.0 + value
    return min(max(prob, 0.0), 1.0)


def gil_pelaez_tail(p: HestonParams, t: float, x: float) -> float:
    """Classical Gil-Pelaez ``1/2 + (1/pi) int_0^inf Im[e^{-iux} phi(u)] / u du``.

    Only accurate to absolute ``~1e-12``; kept as an independent check of
    :func:`fourier_tail` at moderate ``x``.
    """
    def f(u):
        u = np.maximum(u, 1e-300)
        val = np.exp(heston_log_mgf_complex(p, t, 1j * u) - 1j * u * x)
        return val.imag / u

    scale = 1.0 / math.sqrt(_curvature(p, t, 0.0))
    return 0.5 + integrate_half_line(f, scale, rel_tol=0.0) / math.pi
