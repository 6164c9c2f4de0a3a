import json

import numpy as np
import pytest

from envforge.errors import SceneError
from envforge.output import Table, dumps, parse_csv, parse_json, same_values, to_csv, to_json
from envforge.scene import load_scene, scene_from_dict
from envforge.svg import Figure, family_figure, surface_figure

CUBIC = {
    "schema": 1,
    "n": 1,
    "params": [{"name": "t", "domain": [-2, 2], "samples": 101}],
    "phi": ["t", "t^3"],
    "nu": ["-3*t^2/sqrt(1+9*t^4)", "1/sqrt(1+9*t^4)"],
}


def test_explicit_scene():
    sc = scene_from_dict(CUBIC)
    assert sc.family.n == 1 and sc.family.params == ("t",) and sc.family.samples == (101,)
    assert sc.options == {}


@pytest.mark.parametrize(
    "data, n",
    [
        ({"schema": 1, "n": 1, "derive": "tangent-line", "params": [{"name": "t", "domain": [-1, 1]}], "curve": ["t", "t^2"]}, 1),
        ({"schema": 1, "n": 2, "derive": "osculating", "params": [{"name": "s", "domain": [-1, 1]}, {"name": "u", "domain": [-1, 1]}], "curve": ["cos(s)", "sin(s)", "s"]}, 2),
        ({"schema": 1, "n": 2, "derive": "graph-normal", "params": [{"name": "x", "domain": [-1, 1]}, {"name": "y", "domain": [-1, 1]}], "phi": ["x", "y", "x^2+y^2"]}, 2),
        ({"schema": 1, "n": 2, "derive": "clairaut", "c": 1}, 2),
        ({"schema": 1, "n": 1, "derive": "clairaut", "g": "1 + p^2"}, 1),
    ],
)
def test_derived_scenes(data, n):
    fam = scene_from_dict(data).family
    assert fam.n == n
    fam.validate()


@pytest.mark.parametrize(
    "patch, path",
    [
        ({"schema": 2}, "schema"),
        ({"n": 3}, "n"),
        ({"params": []}, "params"),
        ({"params": [{"name": "t", "domain": [2, -2]}]}, "params[0].domain"),
        ({"params": [{"name": "t", "domain": [-2, "x"]}]}, "params[0].domain[1]"),
        ({"params": [{"name": "t", "domain": [-2, 2], "samples": 1}]}, "params[0].samples"),
        ({"phi": ["t"]}, "phi"),
        ({"phi": ["t", "t +"]}, "phi[1]"),
        ({"nu": ["q", "1"]}, "nu[0]"),
        ({"derive": "spiral"}, "derive"),
        ({"options": 3}, "options"),
    ],
)
def test_scene_errors_name_the_field(patch, path):
    with pytest.raises(SceneError) as info:
        scene_from_dict({**CUBIC, **patch})
    assert info.value.path == path


def test_missing_field():
    data = dict(CUBIC)
    del data["nu"]
    with pytest.raises(SceneError) as info:
        scene_from_dict(data)
    assert info.value.path == "nu"


def test_load_scene_file(tmp_path):
    p = tmp_path / "cubic.json"
    p.write_text(json.dumps(CUBIC))
    assert load_scene(p).family.samples == (101,)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SceneError):
        load_scene(bad)
    with pytest.raises(SceneError):
        load_scene(tmp_path / "missing.json")


def test_csv_json_parity():
    table = Table.from_columns({"t": np.linspace(0, 1, 5), "f_0": np.array([0.1, 1 / 3, np.pi, -2e-300, 1e300]), "flag": np.array([True, False, True, True, False])})
    a, b = parse_csv(to_csv(table)), parse_json(to_json(table, {"x": 1}))
    assert same_values(a, b) and same_values(a, table)


def test_seventeen_digit_floats_round_trip():
    rng = np.random.default_rng(0)
    vals = rng.normal(size=200) * 10.0 ** rng.integers(-20, 20, 200)
    text = to_csv(Table.from_columns({"v": vals}))
    back = np.array(parse_csv(text).rows)[:, 0]
    assert np.array_equal(back, vals)
    assert text.endswith("\n") and "\r" not in text


def test_dumps_writes_null_for_non_finite():
    assert dumps({"a": float("nan"), "b": [1, 2.5, np.float64(np.inf)], "c": None, "d": True}) == '{"a": null, "b": [1, 2.5, null], "c": null, "d": true}'
    assert json.loads(dumps({"x": 0.1}))["x"] == 0.1


def test_svg_figures(tmp_path):
    t = np.linspace(-1, 1, 41)
    phi = np.stack([t, t**3], -1)
    nu = np.stack([-3 * t**2, np.ones_like(t)], -1) / np.sqrt(1 + 9 * t**4)[:, None]
    fig = family_figure(phi, nu, [phi], "cubic")
    text = fig.render()
    assert text.startswith("<svg") and text.count("<line") == 5 and "<polyline" in text
    path = tmp_path / "f.svg"
    fig.save(str(path))
    assert path.read_text() == text
    f = np.random.default_rng(0).normal(size=(11, 11, 3))
    assert surface_figure(f).render().count("<polyline") == 6
    broken = Figure()
    broken.polyline(np.array([[0, 0], [1, 1], [np.nan, np.nan], [2, 2], [3, 1]]))
    assert broken.render().count("<polyline") == 2
