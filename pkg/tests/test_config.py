import json

import pytest

from wingtail.config import ConfigError, Grid, SviFamily, load_config, parse_config
from wingtail.core import Side
from wingtail.models.heston import HestonParams

HESTON_MODEL = {"type": "heston", "a": 0.048, "b": 1.2, "sigma": 0.4, "rho": -0.6, "v0": 0.04}
SVI_MODEL = {"type": "svi", "slices": [{"t": 1.0, "a": 0.04, "b": 0.4, "rho": -0.4, "m": 0.1, "eta": 0.3}]}


def doc(**kw):
    base = {"model": dict(HESTON_MODEL), "task": "wing", "grid": {"start": 3, "stop": 6, "step": 1}}
    base.update(kw)
    return base


def error_path(raw, overrides=None):
    with pytest.raises(ConfigError) as info:
        parse_config(raw, overrides)
    return info.value.path


def test_defaults():
    cfg = parse_config(doc())
    assert isinstance(cfg.model, HestonParams)
    assert cfg.side is Side.RIGHT and cfg.t == 1.0 and cfg.quantity == "implied"
    assert cfg.guards.min_nu == 5.0 and cfg.guards.min_k == 3.0 and cfg.regime_fraction == 0.9
    assert cfg.mc_seed == 42 and cfg.threads == 1 and cfg.output is None


def test_grid_values():
    assert Grid(3.0, 6.0, 1.0).values() == [3.0, 4.0, 5.0, 6.0]
    assert Grid.parse("0.1:0.3:0.1").values() == pytest.approx([0.1, 0.2, 0.3])


@pytest.mark.parametrize("text", ["1:2", "a:b:c", "2:1:0.5", "1:2:0", "1:inf:1"])
def test_grid_parse_rejects(text):
    with pytest.raises(ConfigError):
        Grid.parse(text)


@pytest.mark.parametrize("field,value", [("rho", 1.5), ("sigma", -0.1), ("v0", "x"), ("a", None)])
def test_heston_field_paths(field, value):
    raw = doc()
    if value is None:
        del raw["model"][field]
    else:
        raw["model"][field] = value
    assert error_path(raw) == f"model.{field}"


def test_svi_slice_field_path():
    model = json.loads(json.dumps(SVI_MODEL))
    model["slices"].append({"t": 2.0, "a": 0.04, "b": -1.0, "rho": -0.4, "m": 0.1, "eta": 0.3})
    assert error_path(doc(model=model)) == "model.slices[1].b"


def test_svi_family_built():
    cfg = parse_config(doc(model=SVI_MODEL))
    assert isinstance(cfg.model, SviFamily)
    assert cfg.model(1.0).b_svi == 0.4


def test_svi_maturities_must_increase():
    model = json.loads(json.dumps(SVI_MODEL))
    model["slices"].append(dict(model["slices"][0]))
    assert error_path(doc(model=model)) == "model.slices"


def test_stein_stein_tables():
    model = {"type": "stein_stein", "B1": {"t": [0.5, 2.0], "value": [3.0, 2.0]}, "B2": 2.0, "B3": 0.0}
    cfg = parse_config(doc(model=model, task="tail"))
    assert cfg.model.B1(1.25) == pytest.approx(2.5)
    bad = dict(model, B1={"t": [0.5, 2.0], "value": [3.0, 1.0]})
    assert error_path(doc(model=bad)) == "model.B1"
    assert error_path(doc(model=dict(model, B2=0.0))) == "model.B2"


@pytest.mark.parametrize("key,value,path", [
    ("task", "fly", "task"), ("side", "up", "side"), ("t", -1.0, "t"), ("quantity", "delta", "quantity"),
    ("mc_seed", -3, "mc_seed"), ("threads", 0, "threads"), ("guards", {"min_nu": -1.0}, "guards"),
    ("grid", {"start": 1, "stop": 0, "step": 1}, "grid.start"),
])
def test_top_level_paths(key, value, path):
    assert error_path(doc(**{key: value})) == path


def test_unknown_model_type():
    assert error_path(doc(model={"type": "sabr"})) == "model.type"


def test_overrides_take_precedence():
    cfg = parse_config(doc(), {"task": "tail", "side": "left", "t": 2.0, "grid": "1:2:0.5", "out": "o.csv",
                               "threads": 3})
    assert cfg.task == "tail" and cfg.side is Side.LEFT and cfg.t == 2.0
    assert cfg.grid.values() == [1.0, 1.5, 2.0]
    assert cfg.output == "o.csv" and cfg.threads == 3


def test_grid_optional_for_critical_moments():
    raw = doc(task="critical_moments")
    del raw["grid"]
    assert parse_config(raw).task == "critical_moments"
    raw["task"] = "wing"
    assert error_path(raw) == "grid"


def test_json_syntax_error_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "task": "wing",\n  "model": {,\n}\n')
    with pytest.raises(ConfigError) as info:
        load_config(str(path))
    assert "line 3" in info.value.path


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "nope.json"))
