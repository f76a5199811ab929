"""Numerical integration of the Heston Riccati system."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import _kernels
from ..core import Side
from ..errors import DomainError
from ..models.heston import HestonParams

FIXED_STEP = 1e-4
BLOWUP_THRESHOLD = 1e12
ADAPTIVE_TOL = 1e-11
MAX_STEPS = 2_000_000


@dataclass(frozen=True)
class OdePath:
    """Adaptive RK4 trajectory of ``psi`` (and ``phi``) at a real tilt."""

    mu: float
    grid: np.ndarray
    psi_values: np.ndarray
    phi_values: np.ndarray
    blow_up_time: Optional[float]


def riccati_rk4(p: HestonParams, t: float, z: complex, step: float = FIXED_STEP) -> tuple[complex, complex]:
    """``(phi, psi)`` at ``t`` for a complex tilt ``z`` by fixed-step RK4."""
    if not t > 0.0:
        raise DomainError(f"maturity must be positive, got {t}")
    n = max(1, int(math.ceil(t / step - 1e-9)))
    z = complex(z)
    return _kernels.riccati_fixed(z.real, z.imag, p.b, p.rho, p.sigma, t, n)


def ode_log_mgf(p: HestonParams, t: float, mu: float, side: Side | str, step: float = FIXED_STEP) -> float:
    """``a phi + v0 psi`` from :func:`riccati_rk4` at tilt ``+-mu``."""
    side = Side.parse(side)
    phi, psi = riccati_rk4(p, t, side.sign * mu, step)
    return p.a * phi.real + p.v0 * psi.real


def ode_cf(p: HestonParams, t: float, u: float, step: float = FIXED_STEP) -> complex:
    """Characteristic function ``E exp(i u X_t)`` by RK4 along the imaginary tilt."""
    phi, psi = riccati_rk4(p, t, 1j * u, step)
    return complex(np.exp(p.a * phi + p.v0 * psi))


def riccati_blowup(
    p: HestonParams,
    mu: float,
    side: Side | str,
    t_max: float,
    tol: float = ADAPTIVE_TOL,
    threshold: float = BLOWUP_THRESHOLD,
) -> OdePath:
    """Integrate ``psi`` from zero with step-doubling RK4 until ``t_max`` or blow-up.

    The blow-up time is where ``|psi|`` crosses ``threshold``, located by
    bisection on the last step and corrected by the Riccati asymptote
    ``psi ~ 2 / (sigma^2 (T - s))``.
    """
    side = Side.parse(side)
    if not t_max > 0.0:
        raise DomainError(f"t_max must be positive, got {t_max}")
    m = side.sign * mu
    times, psis, phis, blow = _kernels.riccati_adaptive(m, p.b, p.rho, p.sigma, t_max, tol, threshold,
                                                        MAX_STEPS)
    return OdePath(mu, np.asarray(times), np.asarray(psis), np.asarray(phis),
                   None if math.isnan(blow) else float(blow))


def ode_critical_moment(p: HestonParams, t: float, side: Side | str, lo: float, hi: float,
                        rtol: float = 1e-10) -> float:
    """Smallest tilt in ``[lo, hi]`` whose ODE solution blows up before ``t``, by bisection."""
    side = Side.parse(side)

    def explodes(mu: float) -> bool:
        return riccati_blowup(p, mu, side, t).blow_up_time is not None

    if explodes(lo) or not explodes(hi):
        raise DomainError(f"[{lo}, {hi}] does not bracket the ODE critical moment at t={t}")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if explodes(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
