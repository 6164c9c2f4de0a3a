"""Scene files: JSON descriptions of hyperplane families (schema 1).

Example::

    {"schema": 1, "n": 1,
     "params": [{"name": "t", "domain": [-2, 2], "samples": 401}],
     "phi": ["t", "t^3"],
     "nu": ["-3*t^2/sqrt(1+9*t^4)", "1/sqrt(1+9*t^4)"]}

Instead of ``nu`` a scene may set ``derive`` to ``tangent-line`` or
``osculating`` (with ``curve``), ``graph-normal`` (nu from ``phi``) or
``clairaut`` (with ``c`` or ``g``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import expr as E
from .errors import EnvforgeError, ParseError, SceneError
from .family import (
    HyperplaneFamily,
    clairaut_family,
    graph_normal_family,
    osculating_plane_family,
    tangent_line_family,
)

SCHEMA = 1
DERIVATIONS = ("tangent-line", "osculating", "graph-normal", "clairaut")


@dataclass
class Scene:
    family: HyperplaneFamily
    options: dict = field(default_factory=dict)


def _need(obj: dict, key: str, path: str) -> Any:
    if key not in obj:
        raise SceneError(f"{path}.{key}" if path else key, "required field is missing")
    return obj[key]


def _number(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SceneError(path, f"expected a number, got {type(v).__name__}")
    return float(v)


def _exprs(v, count: int, params, path: str) -> tuple[E.Expr, ...]:
    if not isinstance(v, list) or len(v) != count:
        raise SceneError(path, f"expected a list of {count} expression strings")
    out = []
    for i, src in enumerate(v):
        if not isinstance(src, str):
            raise SceneError(f"{path}[{i}]", "expected an expression string")
        try:
            out.append(E.parse(src, list(params)))
        except ParseError as exc:
            raise SceneError(f"{path}[{i}]", str(exc)) from None
    return tuple(out)


def _params(data: dict):
    raw = _need(data, "params", "")
    if not isinstance(raw, list) or not raw:
        raise SceneError("params", "expected a non-empty list")
    names, domains, samples = [], [], []
    for i, p in enumerate(raw):
        path = f"params[{i}]"
        if not isinstance(p, dict):
            raise SceneError(path, "expected an object")
        name = _need(p, "name", path)
        if not isinstance(name, str) or not name.isidentifier():
            raise SceneError(f"{path}.name", "expected an identifier")
        dom = _need(p, "domain", path)
        if not isinstance(dom, list) or len(dom) != 2:
            raise SceneError(f"{path}.domain", "expected [lo, hi]")
        lo, hi = (_number(d, f"{path}.domain[{k}]") for k, d in enumerate(dom))
        if not lo < hi:
            raise SceneError(f"{path}.domain", "lo must be below hi")
        k = p.get("samples", 401 if len(raw) == 1 else 101)
        if isinstance(k, bool) or not isinstance(k, int) or k < 2:
            raise SceneError(f"{path}.samples", "expected an integer >= 2")
        names.append(name)
        domains.append((lo, hi))
        samples.append(k)
    if len(set(names)) != len(names):
        raise SceneError("params", "parameter names must be distinct")
    return names, domains, samples


def scene_from_dict(data: Any) -> Scene:
    if not isinstance(data, dict):
        raise SceneError("", "scene must be a JSON object")
    if data.get("schema") != SCHEMA:
        raise SceneError("schema", f"expected schema {SCHEMA}")
    n = _need(data, "n", "")
    if n not in (1, 2):
        raise SceneError("n", "dimension must be 1 or 2")
    options = data.get("options", {})
    if not isinstance(options, dict):
        raise SceneError("options", "expected an object")
    derive = data.get("derive")
    name = str(data.get("name", "scene"))
    try:
        if derive == "clairaut":
            c, g = data.get("c"), data.get("g")
            bound = _number(data.get("bound", 3.0), "bound")
            if (c is None) == (g is None):
                raise SceneError("c", "give exactly one of c or g")
            pnames = ["p"] if n == 1 else [f"p{i + 1}" for i in range(n)]
            gexpr = None if g is None else _exprs([g], 1, pnames, "g")[0]
            fam = clairaut_family(n, c=None if c is None else _number(c, "c"), g=gexpr, bound=bound, samples=data.get("samples"))
            return Scene(fam, options)
        names, domains, samples = _params(data)
        if derive is None:
            phi = _exprs(_need(data, "phi", ""), n + 1, names, "phi")
            nu = _exprs(_need(data, "nu", ""), n + 1, names, "nu")
            fam = HyperplaneFamily(n, tuple(names), tuple(domains), phi, nu, name=name, samples=tuple(samples))
        elif derive == "tangent-line":
            if n != 1 or len(names) != 1:
                raise SceneError("derive", "tangent-line needs n = 1 and one parameter")
            curve = _exprs(_need(data, "curve", ""), 2, names, "curve")
            fam = tangent_line_family(curve, names[0], domains[0], samples[0], name=name)
        elif derive == "osculating":
            if n != 2 or len(names) != 2:
                raise SceneError("derive", "osculating needs n = 2 and two parameters")
            curve = _exprs(_need(data, "curve", ""), 3, names[:1], "curve")
            fam = osculating_plane_family(curve, tuple(names), domains, samples, name=name)
        elif derive == "graph-normal":
            if n != 2 or len(names) != 2:
                raise SceneError("derive", "graph-normal needs n = 2 and two parameters")
            phi = _exprs(_need(data, "phi", ""), 3, names, "phi")
            fam = graph_normal_family(phi, tuple(names), domains, samples, name=name)
        else:
            raise SceneError("derive", f"unknown derivation {derive!r}; expected one of {', '.join(DERIVATIONS)}")
    except SceneError:
        raise
    except EnvforgeError as exc:
        raise SceneError("", str(exc)) from None
    return Scene(fam, options)


def load_scene(path: str | Path) -> Scene:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SceneError("", f"cannot read scene file: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError("", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return scene_from_dict(data)
