"""JSON scenario configuration with field-path diagnostics."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .core import Side
from .errors import WingtailError
from .models.heston import HestonParams
from .models.steinstein import SteinSteinCoeffs
from .models.svi import SviSlice
from .wings import WingGuards

TASKS = ("critical_moments", "mgf", "tail", "wing", "compare")
QUANTITIES = ("implied", "local", "price")


class ConfigError(Exception):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    step: float

    def values(self) -> list[float]:
        """``start + i step`` up to and including ``stop`` (within rounding)."""
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [self.start + i * self.step for i in range(n)]

    @classmethod
    def parse(cls, text: str, path: str = "grid") -> "Grid":
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(path, f"expected start:stop:step, got {text!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(path, f"non-numeric grid {text!r}") from None
        return _checked_grid(start, stop, step, path)


def _checked_grid(start: float, stop: float, step: float, path: str) -> Grid:
    for name, v in (("start", start), ("stop", stop), ("step", step)):
        if not math.isfinite(v):
            raise ConfigError(f"{path}.{name}", "must be finite")
    if not start < stop:
        raise ConfigError(f"{path}.start", f"start ({start}) must be below stop ({stop})")
    if not step > 0.0:
        raise ConfigError(f"{path}.step", f"step must be positive, got {step}")
    return Grid(start, stop, step)


@dataclass(frozen=True)
class SviFamily:
    """Slices at several maturities; parameters are interpolated linearly in ``t``.

    Outside the quoted maturities the nearest slice's parameters are kept,
    so a single slice describes a family with constant SVI parameters.
    """

    slices: tuple

    def __call__(self, t: float) -> SviSlice:
        ts = np.array([s.t for s in self.slices])

        def interp(name: str) -> float:
            return float(np.interp(t, ts, [getattr(s, name) for s in self.slices]))

        return SviSlice(t, interp("a_svi"), interp("b_svi"), interp("rho"), interp("m"), interp("eta"))


@dataclass(frozen=True)
class ScenarioConfig:
    model_type: str
    model: Any
    task: str
    side: Side
    t: float
    grid: Grid
    guards: WingGuards = field(default_factory=WingGuards)
    regime_fraction: float = 0.9
    quantity: str = "implied"
    output: Optional[str] = None
    mc_seed: int = 42
    threads: int = 1


def _number(obj: dict, key: str, path: str, default: Optional[float] = None) -> float:
    if key not in obj:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{path}.{key}", "must be finite")
    return float(v)


def _build(path_of: Callable[[str], str], ctor, kwargs: dict):
    """Construct a model record, mapping its invariant failures onto field paths."""
    try:
        return ctor(**kwargs)
    except WingtailError as exc:
        msg = str(exc)
        raise ConfigError(path_of(msg.split(" ", 1)[0]), msg) from None


def _heston(obj: dict) -> HestonParams:
    kw = {k: _number(obj, k, "model") for k in ("a", "b", "sigma", "rho", "v0")}
    kw["q"] = _number(obj, "q", "model", 0.0)
    return _build(lambda n: f"model.{n}" if n in kw else "model", HestonParams, kw)


_SVI_KEYS = {"t": "t", "a": "a_svi", "b": "b_svi", "rho": "rho", "m": "m", "eta": "eta"}
# error-message subject -> JSON field name
_SVI_FIELD = {**{k: k for k in _SVI_KEYS}, **{v: k for k, v in _SVI_KEYS.items()}}


def _svi(obj: dict) -> SviFamily:
    slices = obj.get("slices")
    if not isinstance(slices, list) or not slices:
        raise ConfigError("model.slices", "expected a non-empty list of slices")
    out = []
    for i, s in enumerate(slices):
        path = f"model.slices[{i}]"
        if not isinstance(s, dict):
            raise ConfigError(path, "expected an object")
        kw = {dst: _number(s, src, path) for src, dst in _SVI_KEYS.items()}
        out.append(_build(lambda n, p=path: f"{p}.{_SVI_FIELD.get(n, n)}" if n in _SVI_FIELD else p,
                          SviSlice, kw))
    ts = [s.t for s in out]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ConfigError("model.slices", "slice maturities must be strictly increasing")
    return SviFamily(tuple(out))


def _table(obj: dict, key: str, lower: float) -> Callable[[float], float]:
    """Constant or piecewise-linear table; every entry must exceed ``lower``."""
    tab = obj.get(key)
    path = f"model.{key}"
    if isinstance(tab, (int, float)) and not isinstance(tab, bool):
        value = float(tab)
        if not (math.isfinite(value) and value > lower):
            raise ConfigError(path, f"must be finite and exceed {lower}, got {value}")
        return lambda t: value
    if not isinstance(tab, dict) or "t" not in tab or "value" not in tab:
        raise ConfigError(path, "expected a number or {\"t\": [...], \"value\": [...]}")
    ts, vs = tab["t"], tab["value"]
    if not (isinstance(ts, list) and isinstance(vs, list) and len(ts) == len(vs) and ts):
        raise ConfigError(path, "t and value must be lists of equal, nonzero length")
    try:
        ta, va = np.array(ts, dtype=float), np.array(vs, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(path, "table entries must be numbers") from None
    if np.any(np.diff(ta) <= 0.0) or not np.all(np.isfinite(va)):
        raise ConfigError(path, "t must be increasing and values finite")
    if not np.all(va > lower):
        raise ConfigError(path, f"every value must exceed {lower}")
    return lambda t: float(np.interp(t, ta, va))


def _stein_stein(obj: dict) -> SteinSteinCoeffs:
    return SteinSteinCoeffs(_table(obj, "B1", 1.0), _table(obj, "B2", 0.0), _table(obj, "B3", -math.inf))


_MODELS = {"heston": _heston, "svi": _svi, "stein_stein": _stein_stein}


def parse_config(raw: dict, overrides: Optional[dict] = None) -> ScenarioConfig:
    """Validate a decoded JSON document; ``overrides`` carries command-line values."""
    overrides = overrides or {}
    if not isinstance(raw, dict):
        raise ConfigError("$", "configuration must be a JSON object")
    model = raw.get("model")
    if not isinstance(model, dict):
        raise ConfigError("model", "missing model record")
    mtype = model.get("type")
    if mtype not in _MODELS:
        raise ConfigError("model.type", f"expected one of {sorted(_MODELS)}, got {mtype!r}")
    params = _MODELS[mtype](model)

    task = overrides.get("task") or raw.get("task")
    if task not in TASKS:
        raise ConfigError("task", f"expected one of {list(TASKS)}, got {task!r}")

    side_raw = overrides.get("side") or raw.get("side", "right")
    try:
        side = Side.parse(side_raw)
    except WingtailError:
        raise ConfigError("side", f"expected 'right' or 'left', got {side_raw!r}") from None

    t = overrides.get("t")
    if t is None:
        t = _number(raw, "t", "$", 1.0)
    if not (math.isfinite(t) and t > 0.0):
        raise ConfigError("t", f"maturity must be positive, got {t}")

    if overrides.get("grid") is not None:
        grid = Grid.parse(overrides["grid"], "grid")
    else:
        g = raw.get("grid")
        if not isinstance(g, dict):
            if task != "critical_moments":
                raise ConfigError("grid", "missing grid {start, stop, step}")
            g = {"start": 0.0, "stop": 1.0, "step": 1.0}
        grid = _checked_grid(_number(g, "start", "grid"), _number(g, "stop", "grid"),
                             _number(g, "step", "grid"), "grid")

    gd = raw.get("guards", {})
    if not isinstance(gd, dict):
        raise ConfigError("guards", "expected an object")
    guards = WingGuards(min_nu=_number(gd, "min_nu", "guards", 5.0),
                        min_k=_number(gd, "min_k", "guards", 3.0))
    regime = _number(gd, "regime_fraction", "guards", 0.9)
    if guards.min_nu < 0.0 or guards.min_k < 0.0 or not 0.0 <= regime < 1.0:
        raise ConfigError("guards", "thresholds must be nonnegative and regime_fraction in [0, 1)")

    quantity = raw.get("quantity", "implied")
    if quantity not in QUANTITIES:
        raise ConfigError("quantity", f"expected one of {list(QUANTITIES)}, got {quantity!r}")

    seed = raw.get("mc_seed", 42)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("mc_seed", f"expected a nonnegative integer, got {seed!r}")

    threads = overrides.get("threads") or raw.get("threads", 1)
    if isinstance(threads, bool) or not isinstance(threads, int) or threads < 1:
        raise ConfigError("threads", f"expected a positive integer, got {threads!r}")

    output = overrides.get("out") or raw.get("output")
    return ScenarioConfig(mtype, params, task, side, float(t), grid, guards, regime, quantity,
                          output, seed, threads)


def load_config(path: str, overrides: Optional[dict] = None) -> ScenarioConfig:
    """Read and validate a JSON configuration file."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError("$", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"$ (line {exc.lineno}, column {exc.colno})", exc.msg) from None
    return parse_config(raw, overrides)
