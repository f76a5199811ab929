"""Shared fixtures and the acceptance report printed at the end of the run."""
from __future__ import annotations

import math

import pytest
from hypothesis import HealthCheck, settings

from wingtail.config import SviFamily
from wingtail.core import MgfCurve, Side
from wingtail.models.heston import HestonParams
from wingtail.models.steinstein import pole_curve
from wingtail.models.svi import SviSlice

settings.register_profile("wingtail", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("wingtail")

HESTON = HestonParams(a=0.048, b=1.2, sigma=0.4, rho=-0.6, v0=0.04)
SVI_SLICE = SviSlice(t=1.0, a_svi=0.04, b_svi=0.4, rho=-0.4, m=0.1, eta=0.3)
SVI_FAMILY = SviFamily((SVI_SLICE,))


def chi_square_curve() -> MgfCurve:
    """Log-MGF of ``Z^2`` with ``Z ~ N(1, 1)``; pole at 1/2."""

    def lam(t, mu):
        return -0.5 * math.log1p(-2.0 * mu) + mu / (1.0 - 2.0 * mu)

    def dlam(t, mu):
        u = 1.0 / (1.0 - 2.0 * mu)
        return u + u * u

    def d2lam(t, mu):
        u = 1.0 / (1.0 - 2.0 * mu)
        return 2.0 * u * u + 4.0 * u ** 3

    return MgfCurve(Side.RIGHT, lam, lambda t: 0.5, lambda t: 0.0, 1.0, mu_min=-math.inf,
                    dlam=dlam, d2lam=d2lam, name="chi-square")


@pytest.fixture
def heston():
    return HESTON


@pytest.fixture
def svi_slice():
    return SVI_SLICE


@pytest.fixture
def svi_family():
    return SVI_FAMILY


@pytest.fixture
def chi_square():
    return chi_square_curve()


@pytest.fixture
def unit_pole():
    """``1/(1 - mu)``: omega 1, critical moment 1."""
    return pole_curve(1.0, 1.0)


# ---------------------------------------------------------------------------
# acceptance report
# ---------------------------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture
def report():
    """Record one PASS/FAIL line for the acceptance summary and return the verdict."""

    def _report(name: str, passed: bool, detail: str) -> bool:
        line = f"{'PASS' if passed else 'FAIL'}  {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return _report
