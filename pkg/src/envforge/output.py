"""Long-format result tables written as CSV or JSON with 17 significant digits."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np


@dataclass
class Table:
    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)

    @classmethod
    def from_columns(cls, data: dict[str, np.ndarray]) -> "Table":
        cols = list(data)
        arrays = [np.asarray(v, dtype=float).reshape(-1) for v in data.values()]
        n = max((a.size for a in arrays), default=0)
        arrays = [np.broadcast_to(a, (n,)) if a.size == 1 else a for a in arrays]
        return cls(cols, [list(map(float, r)) for r in zip(*arrays)])

    def extend(self, other: "Table") -> None:
        if self.columns != other.columns:
            raise ValueError("column mismatch")
        self.rows.extend(other.rows)


def fmt(x: float) -> str:
    return "%.17g" % x


def to_csv(table: Table) -> str:
    lines = [",".join(table.columns)]
    lines += [",".join(fmt(v) for v in row) for row in table.rows]
    return "\n".join(lines) + "\n"


def dumps(obj: Any) -> str:
    """JSON with floats at %.17g; non-finite floats become null."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(float(obj)) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if hasattr(obj, "value"):  # enums
        return dumps(obj.value)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(table: Table, summary: dict | None = None) -> str:
    body = {"columns": table.columns, "rows": table.rows}
    if summary is not None:
        body["summary"] = summary
    return dumps(body) + "\n"


def parse_csv(text: str) -> Table:
    lines = text.strip("\n").split("\n")
    cols = lines[0].split(",")
    return Table(cols, [[float(v) for v in ln.split(",")] for ln in lines[1:]])


def parse_json(text: str) -> Table:
    body = json.loads(text)
    rows = [[float("nan") if v is None else float(v) for v in r] for r in body["rows"]]
    return Table(body["columns"], rows)


def same_values(a: Table, b: Table) -> bool:
    if a.columns != b.columns or len(a.rows) != len(b.rows):
        return False
    x, y = np.array(a.rows, dtype=float), np.array(b.rows, dtype=float)
    return bool(np.array_equal(x, y, equal_nan=True))


def param_columns(points: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {f"param_{k}": v for k, v in points.items()}


def vector_columns(prefix: str, arr: np.ndarray) -> dict[str, np.ndarray]:
    arr = np.asarray(arr, dtype=float)
    return {f"{prefix}_{i}": arr[..., i] for i in range(arr.shape[-1])}


def merge(*parts: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {}
    for p in parts:
        out.update(p)
    return out
