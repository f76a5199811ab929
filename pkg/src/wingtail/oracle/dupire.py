"""Price surfaces and finite-difference Dupire local variance."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import DenominatorVanished, DomainError, EdgeOfGrid

DENOMINATOR_FLOOR = 1e-300
STEP_K = 0.01
STEP_T = 1e-3


@dataclass(frozen=True)
class PriceGrid:
    """Forward-normalised option prices on a ``(t, k)`` lattice.

    ``calls[i, j]`` is the call at maturity ``maturities[i]`` and log-strike
    ``log_strikes[j]``.  ``puts`` optionally holds the matching put prices
    computed directly, which keeps relative accuracy on the far left where
    the call is ``1 - e^k`` up to rounding.
    """

    maturities: np.ndarray
    log_strikes: np.ndarray
    calls: np.ndarray
    source: str
    puts: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        t = np.asarray(self.maturities, dtype=float)
        k = np.asarray(self.log_strikes, dtype=float)
        c = np.asarray(self.calls, dtype=float)
        if t.ndim != 1 or k.ndim != 1 or c.shape != (t.size, k.size):
            raise DomainError(f"calls must have shape ({t.size}, {k.size}), got {c.shape}")
        if np.any(np.diff(t) <= 0.0) or np.any(t <= 0.0):
            raise DomainError("maturities must be positive and strictly increasing")
        if np.any(np.diff(k) <= 0.0):
            raise DomainError("log-strikes must be strictly increasing")
        object.__setattr__(self, "maturities", t)
        object.__setattr__(self, "log_strikes", k)
        object.__setattr__(self, "calls", c)
        if self.puts is not None:
            object.__setattr__(self, "puts", np.asarray(self.puts, dtype=float).reshape(c.shape))

    def shape_defects(self, tol: float = 1e-10) -> list[str]:
        """No-arbitrage checks per maturity: bounds, decreasing in ``k``, convex in the strike ``e^k``.

        Returns a description of every violation beyond ``tol``; an empty list
        means the grid is clean.
        """
        out = []
        strikes = np.exp(self.log_strikes)
        lower = np.maximum(1.0 - strikes, 0.0)
        for i, t in enumerate(self.maturities):
            row = self.calls[i]
            if np.any(row < lower - tol) or np.any(row > 1.0 + tol):
                out.append(f"t={t}: price outside [max(1 - e^k, 0), 1]")
            if np.any(np.diff(row) > tol):
                out.append(f"t={t}: call increases with strike")
            slopes = np.diff(row) / np.diff(strikes)
            if np.any(np.diff(slopes) < -tol * np.maximum(1.0, 1.0 / np.diff(strikes)[1:])):
                out.append(f"t={t}: call not convex in strike")
        return out

    def to_csv(self) -> str:
        """Row-major CSV with header ``t,k,call`` and 17 significant digits."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "k", "call"])
        for i, t in enumerate(self.maturities):
            for j, k in enumerate(self.log_strikes):
                w.writerow([f"{t:.17g}", f"{k:.17g}", f"{self.calls[i, j]:.17g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, source: str = "csv") -> "PriceGrid":
        rows = list(csv.DictReader(io.StringIO(text)))
        ts = sorted({float(r["t"]) for r in rows})
        ks = sorted({float(r["k"]) for r in rows})
        ti = {t: i for i, t in enumerate(ts)}
        ki = {k: j for j, k in enumerate(ks)}
        calls = np.full((len(ts), len(ks)), np.nan)
        for r in rows:
            calls[ti[float(r["t"])], ki[float(r["k"])]] = float(r["call"])
        if np.isnan(calls).any():
            raise DomainError("CSV does not describe a full rectangular grid")
        return cls(np.array(ts), np.array(ks), calls, source)


def build_grid(
    call: Callable[[float, float], float],
    maturities: Sequence[float],
    log_strikes: Sequence[float],
    source: str,
    put: Optional[Callable[[float, float], float]] = None,
) -> PriceGrid:
    """Tabulate ``call(t, k)`` (and ``put(t, k)`` when given) on a lattice."""
    ts = np.asarray(maturities, dtype=float)
    ks = np.asarray(log_strikes, dtype=float)
    calls = np.array([[call(t, k) for k in ks] for t in ts])
    puts = None if put is None else np.array([[put(t, k) for k in ks] for t in ts])
    return PriceGrid(ts, ks, calls, source, puts)


def stencil_grid(
    call: Callable[[float, float], float],
    t: float,
    k: float,
    source: str,
    put: Optional[Callable[[float, float], float]] = None,
    step_k: float = STEP_K,
    step_t: float = STEP_T,
) -> PriceGrid:
    """Smallest grid that :func:`dupire_fd` needs at ``(t, k)`` with one Richardson halving."""
    offsets = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
    return build_grid(call, t + step_t * offsets, k + step_k * offsets, source, put)


def _locate(axis: np.ndarray, value: float, name: str) -> int:
    j = int(np.argmin(np.abs(axis - value)))
    if abs(axis[j] - value) > 1e-9 * max(1.0, abs(value)):
        raise EdgeOfGrid(f"{name}={value} is not a grid node")
    return j


def _node(axis: np.ndarray, value: float, name: str) -> int:
    try:
        return _locate(axis, value, name)
    except EdgeOfGrid:
        raise EdgeOfGrid(f"{name}={value} needs a neighbour outside the grid") from None


def _local_variance(prices: np.ndarray, ts: np.ndarray, ks: np.ndarray, t: float, k: float,
                    hk: float, ht: float) -> float:
    i0 = _locate(ts, t, "t")
    j0 = _locate(ks, k, "k")
    i_up, i_dn = _node(ts, t + ht, "t"), _node(ts, t - ht, "t")
    j_up, j_dn = _node(ks, k + hk, "k"), _node(ks, k - hk, "k")
    c0 = prices[i0, j0]
    dt = (prices[i_up, j0] - prices[i_dn, j0]) / (2.0 * ht)
    dk = (prices[i0, j_up] - prices[i0, j_dn]) / (2.0 * hk)
    dkk = (prices[i0, j_up] - 2.0 * c0 + prices[i0, j_dn]) / (hk * hk)
    # (d_kk - d_k) annihilates the parity term 1 - e^k, so calls and puts share the formula
    den = dkk - dk
    if abs(den) < DENOMINATOR_FLOOR:
        raise DenominatorVanished(f"Dupire denominator {den} below {DENOMINATOR_FLOOR} at t={t}, k={k}")
    return 2.0 * dt / den


def dupire_fd(
    grid: PriceGrid,
    t: float,
    k: float,
    step_k: float = STEP_K,
    step_t: float = STEP_T,
    richardson: bool = True,
) -> float:
    """Local variance ``2 dC/dt / (d2C/dk2 - dC/dk)`` by centred differences.

    For ``k < 0`` and a grid carrying puts, the put prices are used; in the
    reflected variable ``y = -k`` this is ``2 dP/dt / (d2P/dy2 + dP/dy)``.
    With ``richardson`` the estimate at steps ``h`` and ``h/2`` is combined
    as ``(4 D(h/2) - D(h)) / 3``.

    Raises
    ------
    EdgeOfGrid
        If a required neighbour is not a grid node.
    DenominatorVanished
        If the denominator is below ``1e-300`` in magnitude.
    """
    left = k < 0.0 and grid.puts is not None
    prices = grid.puts if left else grid.calls
    coarse = _local_variance(prices, grid.maturities, grid.log_strikes, t, k, step_k, step_t)
    if not richardson:
        return coarse
    fine = _local_variance(prices, grid.maturities, grid.log_strikes, t, k, 0.5 * step_k, 0.5 * step_t)
    value = (4.0 * fine - coarse) / 3.0
    if not math.isfinite(value):
        raise DenominatorVanished(f"non-finite local variance at t={t}, k={k}")
    return value
