import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wingtail.core import bs_call, bs_put
from wingtail.errors import DomainError, EdgeOfGrid
from wingtail.models.heston import heston_log_mgf
from wingtail.oracle.dupire import PriceGrid, build_grid, dupire_fd, stencil_grid
from wingtail.oracle.fourier import (
    fourier_call,
    fourier_put,
    fourier_tail,
    gil_pelaez_tail,
    heston_cf,
)
from wingtail.oracle.montecarlo import mc_terminal, simulate_terminal
from wingtail.oracle.riccati import ode_cf, ode_log_mgf, riccati_blowup

from conftest import HESTON

T = 1.0


# ---------------------------------------------------------------------------
# characteristic function
# ---------------------------------------------------------------------------

def test_cf_normalisation():
    assert abs(heston_cf(HESTON, T, 0.0) - 1.0) < 1e-14
    # E e^X = 1: the forward is a martingale
    assert abs(heston_cf(HESTON, T, -1j) - 1.0) < 1e-12


@given(st.floats(-200.0, 200.0))
def test_cf_bounded(u):
    assert abs(heston_cf(HESTON, T, u)) <= 1.0 + 1e-12


@pytest.mark.parametrize("u", [1.0, 5.0, -3.0])
def test_cf_matches_ode(u):
    assert abs(heston_cf(HESTON, T, u) - ode_cf(HESTON, T, u)) < 1e-8


def test_cf_on_real_axis_is_mgf():
    for mu, side, sign in ((2.0, "right", 1.0), (1.5, "left", -1.0)):
        cf = heston_cf(HESTON, T, -1j * sign * mu)
        assert cf.real == pytest.approx(math.exp(heston_log_mgf(HESTON, T, mu, side)), rel=1e-10)


# ---------------------------------------------------------------------------
# Fourier prices and tails
# ---------------------------------------------------------------------------

def test_deep_itm_call_is_intrinsic():
    assert fourier_call(HESTON, T, -30.0) == pytest.approx(1.0 - math.exp(-30.0), abs=1e-12)


@pytest.mark.parametrize("k", [-1.0, -0.2, 0.0, 0.3, 1.0])
def test_put_call_parity(k):
    c = fourier_call(HESTON, T, k, alpha=2.0)
    p = fourier_put(HESTON, T, k, alpha=-3.0)
    assert c - p == pytest.approx(1.0 - math.exp(k), abs=1e-12)


def test_default_and_explicit_damping_agree():
    for k in (0.0, 0.5):
        assert fourier_call(HESTON, T, k) == pytest.approx(fourier_call(HESTON, T, k, alpha=1.5), rel=1e-9)


def test_tail_limits():
    assert fourier_tail(HESTON, T, -30.0, c=0.5) == pytest.approx(1.0, abs=1e-12)
    assert fourier_tail(HESTON, T, 30.0) < 1e-30


def test_tail_monotone():
    xs = np.linspace(-1.0, 3.0, 17)
    tails = [fourier_tail(HESTON, T, x) for x in xs]
    assert all(b < a for a, b in zip(tails, tails[1:]))


@pytest.mark.parametrize("x", [-0.5, 0.0, 0.2, 0.6])
def test_tail_complement(x):
    upper = fourier_tail(HESTON, T, x, c=0.5)
    lower = fourier_tail(HESTON, T, x, c=-0.5, lower=True)
    assert upper + lower == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("x", [-0.4, 0.0, 0.3])
def test_tail_matches_gil_pelaez(x):
    assert fourier_tail(HESTON, T, x) == pytest.approx(gil_pelaez_tail(HESTON, T, x), abs=1e-10)


def test_contour_choice_does_not_matter():
    x = 1.0
    ref = fourier_tail(HESTON, T, x)
    for c in (1.0, 4.0):
        assert fourier_tail(HESTON, T, x, c=c) == pytest.approx(ref, rel=1e-8)


def test_fourier_grid_is_arbitrage_free():
    grid = build_grid(lambda t, k: fourier_call(HESTON, t, k), [0.5, 1.0, 2.0], np.linspace(-1.0, 2.0, 13),
                      "fourier")
    assert grid.shape_defects() == []


def test_shape_defects_detects_violations():
    ks = np.linspace(-0.5, 0.5, 5)
    calls = np.array([[bs_call(k, 0.3) for k in ks]])
    calls[0, 2] += 0.05
    bad = PriceGrid(np.array([1.0]), ks, calls, "bumped")
    assert any("convex" in d for d in bad.shape_defects())


# ---------------------------------------------------------------------------
# Dupire finite differences
# ---------------------------------------------------------------------------

def _flat_grid(vol):
    return stencil_grid(lambda t, k: bs_call(k, vol * math.sqrt(t)), 1.0, 0.5, "flat",
                        lambda t, k: bs_put(k, vol * math.sqrt(t)))


def test_flat_surface_recovers_its_volatility():
    for k in (0.5,):
        assert math.sqrt(dupire_fd(_flat_grid(0.3), 1.0, k)) == pytest.approx(0.3, abs=1e-4)
    grid = stencil_grid(lambda t, k: bs_call(k, 0.3 * math.sqrt(t)), 1.0, -0.8, "flat",
                        lambda t, k: bs_put(k, 0.3 * math.sqrt(t)))
    assert math.sqrt(dupire_fd(grid, 1.0, -0.8)) == pytest.approx(0.3, abs=1e-4)


def test_off_grid_raises():
    grid = _flat_grid(0.3)
    with pytest.raises(EdgeOfGrid):
        dupire_fd(grid, 1.0, 0.51)
    with pytest.raises(EdgeOfGrid):
        dupire_fd(grid, 1.0, 0.5, step_k=0.05)


def test_grid_csv_round_trip():
    grid = build_grid(lambda t, k: bs_call(k, 0.2 * math.sqrt(t)), [0.5, 1.0], [-0.25, 0.0, 0.25], "bs")
    back = PriceGrid.from_csv(grid.to_csv(), "bs")
    np.testing.assert_array_equal(back.maturities, grid.maturities)
    np.testing.assert_array_equal(back.log_strikes, grid.log_strikes)
    np.testing.assert_array_equal(back.calls, grid.calls)


def test_grid_shape_validation():
    with pytest.raises(DomainError):
        PriceGrid(np.array([1.0, 0.5]), np.array([0.0, 1.0]), np.zeros((2, 2)), "x")
    with pytest.raises(DomainError):
        PriceGrid(np.array([1.0]), np.array([0.0, 1.0]), np.zeros((2, 2)), "x")


def test_heston_dupire_agrees_with_short_step():
    grid = stencil_grid(lambda t, k: fourier_call(HESTON, t, k), T, 0.5, "fourier")
    rich = dupire_fd(grid, T, 0.5)
    plain = dupire_fd(grid, T, 0.5, richardson=False)
    # the O(h^2) term removed by the halving is a fraction of a percent here
    assert rich == pytest.approx(plain, rel=5e-3)
    assert 0.0 < rich < 1.0


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def test_mc_needs_enough_paths():
    with pytest.raises(DomainError):
        mc_terminal(HESTON, T, 9_999, seed=1)


def test_mc_deterministic_and_block_independent():
    a = simulate_terminal(HESTON, 0.2, 3_000, seed=11, block_size=1_000)
    b = simulate_terminal(HESTON, 0.2, 3_000, seed=11, block_size=1_000)
    np.testing.assert_array_equal(a, b)
    # the first block does not depend on how many blocks follow
    c = simulate_terminal(HESTON, 0.2, 1_000, seed=11, block_size=1_000)
    np.testing.assert_array_equal(a[:1_000], c)
    d = simulate_terminal(HESTON, 0.2, 3_000, seed=12, block_size=1_000)
    assert not np.array_equal(a, d)


@pytest.mark.slow
def test_mc_agrees_with_fourier():
    s = mc_terminal(HESTON, T, 2_000_000, seed=2024, strikes=(0.0, 0.2), tail_points=(0.3,))
    assert abs(s.forward_mean - 1.0) < 4.0 * s.forward_stderr
    for k, m, se in zip(s.strikes, s.call_mean, s.call_stderr):
        # Euler bias at 500 steps is well below the 4-sigma band at this path count
        assert abs(m - fourier_call(HESTON, T, k)) < 4.0 * se + 2e-4
    assert abs(s.tail_freq[0] - fourier_tail(HESTON, T, 0.3)) < 4.0 * s.tail_stderr[0] + 2e-4


# ---------------------------------------------------------------------------
# Riccati integration
# ---------------------------------------------------------------------------

def test_unit_tilt_is_martingale():
    path = riccati_blowup(HESTON, 1.0, "right", 5.0)
    assert path.blow_up_time is None
    assert np.max(np.abs(path.psi_values)) < 1e-12
    assert ode_log_mgf(HESTON, T, 1.0, "right") == pytest.approx(0.0, abs=1e-12)


def test_psi_monotone_before_blowup():
    path = riccati_blowup(HESTON, 25.0, "right", 2.0)
    assert path.blow_up_time is not None
    assert np.all(np.diff(path.psi_values) > 0.0)


def test_bs_limit_of_ode():
    # sigma -> 0 with v0 = theta: the log-MGF is Black-Scholes
    from wingtail.models.heston import HestonParams

    p = HestonParams(a=0.04, b=1.0, sigma=1e-6, rho=0.0, v0=0.04)
    mu = 3.0
    assert ode_log_mgf(p, T, mu, "right") == pytest.approx(0.5 * 0.04 * mu * (mu - 1.0), rel=1e-6)
