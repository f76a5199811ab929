"""Command-line front end: ``wingtail <task> --config <path> [options]``.

Every task writes one CSV table.  Grid points are evaluated concurrently
when ``--threads`` exceeds one, but rows are always written in grid order
so that identical inputs give byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

from . import tauberian
from .config import TASKS, ConfigError, ScenarioConfig, load_config
from .core import Side, implied_total_vol, implied_total_vol_put
from .errors import WingtailError
from .models import heston as hm
from .models import steinstein as ss
from .models import svi as sm
from .oracle import dupire, fourier, riccati
from .wings import implied_vol_wing, local_vol_wing

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class TaskFailure(Exception):
    """A numerical operation failed; ``operation`` names it."""

    def __init__(self, operation: str, cause: Exception):
        super().__init__(f"{operation}: {type(cause).__name__}: {cause}")
        self.operation = operation


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    v = float(value)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {v}")
    return f"{v:.17g}"


def _guarded(operation: str, fn: Callable, *args):
    try:
        return fn(*args)
    except WingtailError as exc:
        raise TaskFailure(operation, exc) from exc


def _require(cfg: ScenarioConfig, allowed: Sequence[str]) -> None:
    if cfg.model_type not in allowed:
        raise ConfigError("model.type", f"task {cfg.task!r} supports {list(allowed)}, got {cfg.model_type!r}")


# ---------------------------------------------------------------------------
# critical moments
# ---------------------------------------------------------------------------

def _critical_moments(cfg: ScenarioConfig) -> tuple[list[str], list[list]]:
    header = ["side", "mu_star", "dmu_star_dt", "mu_hat", "alpha"]
    rows = []
    t = cfg.t
    if cfg.model_type == "heston":
        for side in (Side.RIGHT, Side.LEFT):
            cm = _guarded("heston_critical_moment", hm.heston_critical_moment, cfg.model, t, side)
            rows.append([side.value, cm.mu_star, cm.dmu_star_dt, hm.heston_mu_hat(cfg.model, side), 1.0])
    elif cfg.model_type == "svi":
        h = sm.TIME_STEP * t
        for side in (Side.RIGHT, Side.LEFT):
            mu = _guarded("svi_critical_moments", sm.svi_mu_star, cfg.model(t), side)
            dmu = (sm.svi_mu_star(cfg.model(t + h), side) - sm.svi_mu_star(cfg.model(t - h), side)) / (2.0 * h)
            # infimum of the SVI critical moment over all slopes (slope 2)
            floor = 1.0 if side is Side.RIGHT else 0.0
            rows.append([side.value, mu, dmu, floor, 1.0])
    else:
        curve, at = ss.stein_stein_curve(cfg.model)
        e = _guarded("stein_stein_curve", at, t)
        rows.append([Side.RIGHT.value, e.mu_star, curve.dmu_star_dt(t), 1.0, 1.0])
    return header, rows


# ---------------------------------------------------------------------------
# per-point tasks
# ---------------------------------------------------------------------------

def _mgf_point(cfg: ScenarioConfig, mu: float) -> list:
    closed = _guarded("heston_log_mgf", hm.heston_log_mgf, cfg.model, cfg.t, mu, cfg.side)
    ode = riccati.ode_log_mgf(cfg.model, cfg.t, mu, cfg.side)
    return [mu, closed, ode, abs(closed - ode)]


def _curve(cfg: ScenarioConfig):
    if cfg.model_type == "heston":
        return hm.heston_curve(cfg.model, cfg.side)
    if cfg.side is Side.LEFT:
        raise ConfigError("side", "the Stein-Stein curve only describes the right wing")
    return ss.stein_stein_curve(cfg.model)[0]


def _tail_point(cfg: ScenarioConfig, curve, x: float) -> list:
    est = _guarded("tail_expansion", tauberian.tail_expansion, curve, cfg.t, x, cfg.regime_fraction)
    row = [x, est.p_star, est.lambda_star, est.leading, est.correction, est.prob, est.log_prob]
    if cfg.model_type == "heston":
        xs = x if cfg.side is Side.RIGHT else -x
        ref = _guarded("fourier_tail", fourier.fourier_tail, cfg.model, cfg.t, xs, None, cfg.side is Side.LEFT)
        if not ref > 0.0:
            raise TaskFailure("fourier_tail", ValueError(f"oracle tail underflowed at x={x}"))
        log_ref = math.log(ref)
        row += [ref, abs(est.log_prob - log_ref) / abs(log_ref)]
    return row


_TAIL_HEADER = ["x", "p_star", "lambda_star", "leading", "correction", "tauberian", "log_tauberian"]
_IMPLIED_HEADER = ["k", "total_variance", "lambda_star", "c_tilde", "sqrt_term", "lee_slope"]
_LOCAL_HEADER = ["y", "local_variance", "sigma0", "leading", "numerator", "denominator"]
_PRICE_HEADER = ["k", "price", "mu_star", "log_constant"]


def _wing_point(cfg: ScenarioConfig, x: float) -> list:
    q, side, t = cfg.quantity, cfg.side, cfg.t
    if cfg.model_type == "heston":
        if q == "implied":
            w = _guarded("heston_implied_wing", hm.heston_implied_wing, cfg.model, t, side, x, cfg.guards)
        else:
            w = _guarded("heston_local_vol_wing", hm.heston_local_vol_wing, cfg.model, t, side, x, cfg.guards)
    elif cfg.model_type == "svi":
        if q == "price":
            s = cfg.model(t)
            price = _guarded("svi_price_expansion", sm.svi_price_expansion, s, side, x)
            return [x, price, sm.svi_mu_star(s, side), sm.svi_log_constant(s, side)]
        w = _guarded("svi_local_vol_wing", sm.svi_local_vol_wing, cfg.model, t, side, x)
        return [x, w.value, w.terms["sigma0"], w.terms["leading"], w.terms["numerator"] / w.terms["denominator"],
                w.terms["denominator"]]
    else:
        curve = _curve(cfg)
        if q == "implied":
            w = _guarded("implied_vol_wing", implied_vol_wing, curve, t, x, cfg.guards)
        else:
            w = _guarded("local_vol_wing", local_vol_wing, curve, t, x, 0.0, cfg.guards)
    tm = w.terms
    if w.kind == "implied":
        return [x, w.value, tm["lambda_star"], tm["c_tilde"], tm["sqrt_term"], tm["lee_slope"]]
    return [x, w.value, tm["sigma0"], tm["leading"], tm["numerator"], tm["denominator"]]


def _oracle_value(cfg: ScenarioConfig, x: float) -> float:
    """Reference value for the wing quantity at abscissa ``x``."""
    side, t = cfg.side, cfg.t
    k = x if side is Side.RIGHT else -x
    if cfg.model_type == "heston":
        p = cfg.model
        if cfg.quantity == "implied":
            if side is Side.RIGHT:
                price = _guarded("fourier_call", fourier.fourier_call, p, t, k)
                return _guarded("implied_total_vol", implied_total_vol, price, k) ** 2
            put = _guarded("fourier_put", fourier.fourier_put, p, t, k)
            return _guarded("implied_total_vol", implied_total_vol_put, put, k) ** 2
        grid = _guarded("fourier_call", dupire.stencil_grid,
                        lambda tt, kk: fourier.fourier_call(p, tt, kk), t, k, "fourier",
                        lambda tt, kk: fourier.fourier_put(p, tt, kk))
        return _guarded("dupire_fd", dupire.dupire_fd, grid, t, k)
    if cfg.model_type == "svi":
        fam = cfg.model
        if cfg.quantity == "price":
            s = fam(t)
            return s.call(k) if side is Side.RIGHT else s.put(k)
        grid = dupire.stencil_grid(lambda tt, kk: fam(tt).call(kk), t, k, "svi",
                                   lambda tt, kk: fam(tt).put(kk))
        return _guarded("dupire_fd", dupire.dupire_fd, grid, t, k)
    raise ConfigError("model.type", "compare needs a model with an oracle (heston or svi)")


def _compare_point(cfg: ScenarioConfig, x: float) -> list:
    row = _wing_point(cfg, x)
    ref = _oracle_value(cfg, x)
    return row + [ref, abs(row[1] - ref) / abs(ref)]


def _validate_quantity(cfg: ScenarioConfig) -> None:
    if cfg.model_type == "svi" and cfg.quantity == "implied":
        raise ConfigError("quantity", "SVI slices already are implied volatilities; use 'local' or 'price'")
    if cfg.model_type != "svi" and cfg.quantity == "price":
        raise ConfigError("quantity", "'price' is only available for SVI slices")
    if cfg.model_type == "stein_stein" and cfg.side is Side.LEFT:
        raise ConfigError("side", "the Stein-Stein curve only describes the right wing")


def build_table(cfg: ScenarioConfig) -> tuple[list[str], list[list]]:
    """Compute the CSV header and rows for a validated configuration."""
    if cfg.task == "critical_moments":
        return _critical_moments(cfg)
    xs = cfg.grid.values()
    if cfg.task == "mgf":
        _require(cfg, ["heston"])
        header = ["mu", "closed_form", "ode", "abs_error"]
        fn = lambda x: _mgf_point(cfg, x)  # noqa: E731
    elif cfg.task == "tail":
        _require(cfg, ["heston", "stein_stein"])
        curve = _curve(cfg)
        header = _TAIL_HEADER + (["fourier", "log_rel_error"] if cfg.model_type == "heston" else [])
        fn = lambda x: _tail_point(cfg, curve, x)  # noqa: E731
    else:
        _validate_quantity(cfg)
        header = {"implied": _IMPLIED_HEADER, "local": _LOCAL_HEADER, "price": _PRICE_HEADER}[cfg.quantity]
        if cfg.task == "compare":
            _require(cfg, ["heston", "svi"])
            header = header + ["oracle", "rel_error"]
            fn = lambda x: _compare_point(cfg, x)  # noqa: E731
        else:
            fn = lambda x: _wing_point(cfg, x)  # noqa: E731
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            rows = list(pool.map(fn, xs))
    else:
        rows = [fn(x) for x in xs]
    return header, rows


def render_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def run(cfg: ScenarioConfig) -> str:
    """Execute a configuration and return the CSV text (also written to ``cfg.output`` if set)."""
    header, rows = build_table(cfg)
    try:
        text = render_csv(header, rows)
    except ValueError as exc:
        raise TaskFailure(cfg.task, exc) from exc
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wingtail",
                                 description="Extreme-strike asymptotics from moment explosion.")
    ap.add_argument("task", choices=TASKS)
    ap.add_argument("--config", required=True, help="JSON scenario file")
    ap.add_argument("--out", help="CSV output path (default: stdout)")
    ap.add_argument("--side", choices=("right", "left"))
    ap.add_argument("--t", type=float, help="maturity")
    ap.add_argument("--grid", help="abscissa grid as start:stop:step")
    ap.add_argument("--threads", type=int, help="worker threads for grid points")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    overrides = {"task": args.task, "side": args.side, "t": args.t, "grid": args.grid,
                 "out": args.out, "threads": args.threads}
    try:
        cfg = load_config(args.config, overrides)
        text = run(cfg)
    except ConfigError as exc:
        print(f"wingtail: invalid configuration at {exc.path}: {exc.message}", file=sys.stderr)
        return EXIT_CONFIG
    except TaskFailure as exc:
        print(f"wingtail: {exc.operation} failed: {exc.__cause__}", file=sys.stderr)
        return EXIT_NUMERIC
    if not cfg.output:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
