import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.special import ndtri

from wingtail.core import (
    MgfCurve,
    Side,
    bisect,
    bs_call,
    bs_put,
    bs_vega,
    implied_total_vol,
    implied_total_vol_put,
    legendre,
    mgf_derivatives,
)
from wingtail.errors import BracketingError, DomainError, OutOfBounds
from wingtail.models.heston import heston_curve

from conftest import HESTON, chi_square_curve

mp.mp.dps = 40


def quadratic_curve():
    return MgfCurve(Side.RIGHT, lambda t, p: 0.5 * p * p, lambda t: math.inf, lambda t: 0.0, 1.0,
                    mu_min=-math.inf, dlam=lambda t, p: p, d2lam=lambda t, p: 1.0)


def exp_curve():
    return MgfCurve(Side.RIGHT, lambda t, p: math.expm1(p), lambda t: math.inf, lambda t: 0.0, 1.0,
                    mu_min=-math.inf)


def shifted_pole():
    # 1/(2 - p) - 1/2 so that Lambda(0) = 0
    return MgfCurve(Side.RIGHT, lambda t, p: 1.0 / (2.0 - p) - 0.5, lambda t: 2.0, lambda t: 0.0, 1.0,
                    mu_min=-math.inf)


def mp_call(k, v):
    k, v = mp.mpf(k), mp.mpf(v)
    d = -k / v + v / 2
    return mp.ncdf(d) - mp.e ** k * mp.ncdf(d - v)


# ---------------------------------------------------------------------------
# Black-Scholes
# ---------------------------------------------------------------------------

def test_bs_call_zero_vol_otm():
    assert bs_call(2.0, 1e-12) == 0.0


def test_bs_call_deep_itm():
    assert bs_call(-30.0, 0.5) == pytest.approx(1.0 - math.exp(-30.0), abs=1e-12)


def test_bs_call_atm_against_gaussian_quadrature():
    # C(0, v) = 2 N(v/2) - 1 with the Gaussian mass integrated directly
    density = lambda z: mp.e ** (-z * z / 2) / mp.sqrt(2 * mp.pi)  # noqa: E731
    oracle = 2 * mp.quad(density, [-mp.inf, 0, mp.mpf("0.1")]) - 1
    assert bs_call(0.0, 0.2) == pytest.approx(float(oracle), abs=1e-6)
    assert float(oracle) == pytest.approx(0.0796557, abs=1e-6)


@pytest.mark.parametrize("k,v", [(0.0, 0.2), (3.0, 0.4), (-2.0, 1.5), (8.0, 0.3), (0.5, 2.5)])
def test_bs_call_matches_high_precision(k, v):
    assert bs_call(k, v) == pytest.approx(float(mp_call(k, v)), rel=1e-13)


@pytest.mark.parametrize("k,v", [(-1.0, 0.3), (-6.0, 0.5), (1.0, 0.7)])
def test_put_call_parity(k, v):
    assert bs_call(k, v) - bs_put(k, v) == pytest.approx(1.0 - math.exp(k), abs=1e-15)


def test_bs_call_shape_on_grid():
    ks = np.linspace(-3.0, 3.0, 50)
    vs = np.linspace(0.05, 3.0, 50)
    c = np.array([[bs_call(k, v) for k in ks] for v in vs])
    assert np.all(np.diff(c, axis=1) <= 1e-15)  # decreasing in k
    # convex in the strike e^k (in k itself deep in-the-money calls are concave)
    slopes = np.diff(c, axis=1) / np.diff(np.exp(ks))[None, :]
    assert np.all(np.diff(slopes, axis=1) >= -1e-12)
    assert np.all(np.diff(c, axis=0) >= -1e-15)  # increasing in v
    lower = np.maximum(1.0 - np.exp(ks), 0.0)
    assert np.all(c >= lower[None, :] - 1e-15) and np.all(c <= 1.0)


def test_bs_rejects_negative_vol():
    with pytest.raises(DomainError):
        bs_call(0.0, -0.1)


# ---------------------------------------------------------------------------
# implied volatility
# ---------------------------------------------------------------------------

def _plain_bisection(price, k):
    lo, hi = 1e-8, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if float(mp_call(k, mid)) < price:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_implied_round_trip_against_plain_bisection():
    price = bs_call(0.1, 0.3)
    v = implied_total_vol(price, 0.1)
    assert v == pytest.approx(0.3, abs=1e-10)
    assert v == pytest.approx(_plain_bisection(price, 0.1), abs=1e-10)


def test_implied_atm_against_quantile():
    # 2 N(v/2) - 1 = 1/2  =>  v = 2 N^-1(3/4)
    oracle = 2.0 * ndtri(0.75)
    v = implied_total_vol(0.5, 0.0)
    assert v == pytest.approx(oracle, abs=1e-10)
    assert v == pytest.approx(1.348980, abs=1e-5)


@pytest.mark.parametrize("price,k", [(1.0, 0.0), (0.0, 1.0), (0.3, -1.0), (1.2, 0.5)])
def test_implied_out_of_bounds(price, k):
    with pytest.raises(OutOfBounds):
        implied_total_vol(price, k)


@given(st.floats(-5.0, 5.0), st.floats(0.05, 3.0))
def test_implied_inverts_bs_call(k, v):
    price = bs_call(k, v)
    assume(price > 1e-300)
    # in the money the time value must survive rounding of the call price
    assume(k >= 0.0 or bs_vega(k, v) > 1e-3)
    assert abs(bs_call(k, implied_total_vol(price, k)) - price) < 1e-12
    assert implied_total_vol(price, k) == pytest.approx(v, abs=1e-10)


@given(st.floats(-5.0, 5.0), st.floats(0.05, 3.0))
def test_out_of_the_money_round_trip(k, v):
    price = bs_call(k, v) if k >= 0.0 else bs_put(k, v)
    assume(price > 1e-300)
    w = implied_total_vol(price, k) if k >= 0.0 else implied_total_vol_put(price, k)
    assert w == pytest.approx(v, abs=1e-10)


# ---------------------------------------------------------------------------
# root finding and differentiation
# ---------------------------------------------------------------------------

def test_bisect_finds_root_and_polishes():
    r = bisect(lambda x: x * x - 2.0, 0.0, 2.0, fprime=lambda x: 2.0 * x)
    assert r == pytest.approx(math.sqrt(2.0), abs=1e-13)


def test_bisect_requires_sign_change():
    with pytest.raises(BracketingError):
        bisect(lambda x: x * x + 1.0, -1.0, 1.0)


@pytest.mark.parametrize("eps", [1e-1, 1e-3, 1e-6, 1e-9])
def test_pole_variable_differentiation(eps):
    lam = lambda t, mu: 3.0 / (2.0 - mu) - 0.5 * math.log(2.0 - mu)  # noqa: E731
    mu = 2.0 - eps
    eps = 2.0 - mu  # the distance actually represented
    _, d1, d2 = mgf_derivatives(lam, 1.0, mu, 2.0)
    # mu itself is rounded, so the stencils see noise of relative size ~1e-16 / eps
    assert d1 == pytest.approx(3.0 / eps ** 2 + 0.5 / eps, rel=1e-8 + 1e-12 / eps)
    assert d2 == pytest.approx(6.0 / eps ** 3 + 0.5 / eps ** 2, rel=1e-6 + 1e-10 / eps)


def test_differentiation_rejects_points_past_the_pole():
    with pytest.raises(DomainError):
        mgf_derivatives(lambda t, mu: 1.0 / (1.0 - mu), 1.0, 1.0, 1.0)


def test_side_parse():
    assert Side.parse("LEFT") is Side.LEFT
    assert Side.RIGHT.sign == 1 and Side.LEFT.sign == -1
    with pytest.raises(DomainError):
        Side.parse("up")


# ---------------------------------------------------------------------------
# Legendre transform
# ---------------------------------------------------------------------------

def test_legendre_quadratic():
    cp = legendre(quadratic_curve(), 1.0, 3.0)
    assert cp.p_star == pytest.approx(3.0, abs=1e-12)
    assert cp.lambda_star == pytest.approx(4.5, abs=1e-12)


def test_legendre_pure_pole():
    cp = legendre(shifted_pole(), 1.0, 4.0)
    assert cp.p_star == pytest.approx(1.5, abs=1e-10)
    # sup_p (4p - 1/(2-p) + 1/2) = 4.0 + 1/2 for the unshifted pole
    assert cp.lambda_star == pytest.approx(4.5, abs=1e-9)
    assert cp.lambda_star + 0.5 - 0.5 - 0.5 == pytest.approx(4.0, abs=1e-9)


def test_legendre_identity_point():
    cp = legendre(exp_curve(), 1.0, 1.0)
    assert cp.p_star == pytest.approx(0.0, abs=1e-12)
    assert cp.lambda_star == pytest.approx(0.0, abs=1e-12)


def test_legendre_below_range():
    with pytest.raises(BracketingError):
        legendre(chi_square_curve(), 1.0, 1.0)  # the mean of Z^2 is 2


FIXTURES = {
    "chi-square": (chi_square_curve, [4.0, 9.0, 16.0, 36.0]),
    "heston-right": (lambda: heston_curve(HESTON, "right"), [0.5, 1.0, 3.0, 6.0]),
    "heston-left": (lambda: heston_curve(HESTON, "left"), [0.5, 1.0, 3.0, 6.0]),
    "pole": (shifted_pole, [1.0, 4.0, 25.0, 100.0]),
}


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_conjugate_invariants(name):
    make, xs = FIXTURES[name]
    curve = make()
    pts = [legendre(curve, 1.0, x) for x in xs]
    mu_star = curve.mu_star(1.0)
    for cp in pts:
        assert cp.p_star < mu_star
        value, _, second = curve.derivatives(1.0, cp.p_star)
        assert cp.lambda_star == pytest.approx(cp.p_star * cp.x - value, rel=1e-12, abs=1e-12)
        assert cp.p_star_prime * second == pytest.approx(1.0, rel=1e-8)
        lo = max(curve.mu_min, 0.0)
        for p in np.linspace(lo, cp.p_star + 0.999 * (mu_star - cp.p_star) if math.isfinite(mu_star)
                             else cp.p_star + 5.0, 25):
            assert cp.lambda_star >= p * cp.x - curve.lam(1.0, p) - 1e-9 * max(1.0, abs(cp.lambda_star))
    ps = [cp.p_star for cp in pts]
    assert all(b > a for a, b in zip(ps, ps[1:]))
    # convexity in x: slopes of Lambda* are the increasing p*
    ls = [cp.lambda_star for cp in pts]
    chords = [(ls[i + 1] - ls[i]) / (xs[i + 1] - xs[i]) for i in range(len(xs) - 1)]
    assert all(b >= a for a, b in zip(chords, chords[1:]))


@given(st.floats(2.5, 400.0))
def test_fenchel_inequality_chi_square(x):
    curve = chi_square_curve()
    cp = legendre(curve, 1.0, x)
    for p in np.linspace(0.0, 0.4999, 40):
        assert cp.lambda_star >= p * x - curve.lam(1.0, p) - 1e-9 * cp.lambda_star
