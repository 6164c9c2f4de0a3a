"""Forward-mode automatic differentiation over expression trees.

A :class:`DualNumber` carries a value and one partial derivative per
declared parameter.  Values may be numpy arrays, in which case a single
evaluation produces exact first derivatives at every sample of a grid:
``value.shape == S`` and ``partials.shape == (m, *S)``.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError
from .expr import CONSTANTS, BinOp, Call, Const, Expr, Neg, Num, Var, free_vars, pretty


class DualNumber:
    __slots__ = ("value", "partials")

    def __init__(self, value, partials):
        self.value = value
        self.partials = partials

    @classmethod
    def constant(cls, value, nparams: int) -> "DualNumber":
        return cls(value, np.zeros((nparams,) + np.shape(value)))

    def __repr__(self) -> str:
        return f"DualNumber({self.value!r}, {self.partials!r})"

    # arithmetic on raw duals; domain checks live in the evaluator
    def __add__(self, o: "DualNumber") -> "DualNumber":
        return DualNumber(self.value + o.value, self.partials + o.partials)

    def __sub__(self, o: "DualNumber") -> "DualNumber":
        return DualNumber(self.value - o.value, self.partials - o.partials)

    def __mul__(self, o: "DualNumber") -> "DualNumber":
        return DualNumber(self.value * o.value, self.value * o.partials + o.value * self.partials)

    def __truediv__(self, o: "DualNumber") -> "DualNumber":
        q = self.value / o.value
        return DualNumber(q, (self.partials - q * o.partials) / o.value)

    def __neg__(self) -> "DualNumber":
        return DualNumber(-self.value, -self.partials)

    def chain(self, value, slope) -> "DualNumber":
        """Apply an outer function with the given value and derivative."""
        return DualNumber(value, slope * self.partials)


def _any(mask) -> bool:
    return bool(np.any(mask))


class _Evaluator:
    def __init__(self, params: Sequence[str], point: Mapping[str, object]):
        self.params = list(params)
        self.m = len(self.params)
        missing = [p for p in self.params if p not in point]
        if missing:
            raise KeyError(f"unbound parameter(s): {', '.join(missing)}")
        values = [np.asarray(point[p], dtype=float) for p in self.params]
        self.shape = np.broadcast_shapes(*(v.shape for v in values)) if values else ()
        self.seeds: dict[str, DualNumber] = {}
        for i, (name, v) in enumerate(zip(self.params, values)):
            v = np.broadcast_to(v, self.shape).copy() if self.shape else float(v)
            partials = np.zeros((self.m,) + self.shape)
            partials[i] = 1.0
            self.seeds[name] = DualNumber(v, partials)

    def const(self, value: float) -> DualNumber:
        return DualNumber(value, np.zeros((self.m,) + ((1,) * len(self.shape))))

    def ev(self, e: Expr) -> DualNumber:
        if isinstance(e, Num):
            return self.const(e.value)
        if isinstance(e, Const):
            return self.const(CONSTANTS[e.name])
        if isinstance(e, Var):
            try:
                return self.seeds[e.name]
            except KeyError:
                raise KeyError(f"parameter {e.name!r} not declared in this context") from None
        if isinstance(e, Neg):
            return -self.ev(e.operand)
        if isinstance(e, BinOp):
            return self._binop(e)
        if isinstance(e, Call):
            return self._call(e)
        raise TypeError(f"not an expression node: {e!r}")

    def _binop(self, e: BinOp) -> DualNumber:
        a = self.ev(e.left)
        if e.op == "^":
            return self._pow(e, a)
        b = self.ev(e.right)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if _any(np.asarray(b.value) == 0.0):
            raise DomainError("division by zero", pretty(e))
        return a / b

    def _pow(self, e: BinOp, base: DualNumber) -> DualNumber:
        u = np.asarray(base.value)
        if not free_vars(e.right):
            k = float(self.ev(e.right).value)
            if k == 0.0:
                return DualNumber(np.ones_like(u) if self.shape else 1.0, 0.0 * base.partials)
            if k.is_integer():
                if k < 0 and _any(u == 0.0):
                    raise DomainError("division by zero", pretty(e))
                return base.chain(u ** k, k * u ** (k - 1.0))
            if _any(u < 0.0):
                raise DomainError("non-integer power of a negative base", pretty(e))
            if k < 1.0 and _any(u == 0.0):
                raise DomainError("derivative of a fractional power undefined at zero", pretty(e))
            return base.chain(u ** k, k * u ** (k - 1.0))
        expo = self.ev(e.right)
        if _any(u <= 0.0):
            raise DomainError("variable exponent needs a positive base", pretty(e))
        value = u ** expo.value
        logu = np.log(u)
        return DualNumber(value, value * (expo.partials * logu + expo.value * base.partials / u))

    def _call(self, e: Call) -> DualNumber:
        if e.fn == "atan2":
            y, x = (self.ev(a) for a in e.args)
            r2 = np.asarray(x.value) ** 2 + np.asarray(y.value) ** 2
            if _any(r2 == 0.0):
                raise DomainError("atan2 undefined at the origin", pretty(e))
            value = np.arctan2(y.value, x.value)
            return DualNumber(value, (x.value * y.partials - y.value * x.partials) / r2)
        a = self.ev(e.args[0])
        u = a.value
        fn = e.fn
        if fn == "sin":
            return a.chain(np.sin(u), np.cos(u))
        if fn == "cos":
            return a.chain(np.cos(u), -np.sin(u))
        if fn == "tan":
            c = np.cos(u)
            if _any(c == 0.0):
                raise DomainError("tan pole", pretty(e))
            return a.chain(np.tan(u), 1.0 / (c * c))
        if fn == "exp":
            v = np.exp(u)
            return a.chain(v, v)
        if fn == "log":
            if _any(np.asarray(u) <= 0.0):
                raise DomainError("log of non-positive value", pretty(e))
            return a.chain(np.log(u), 1.0 / u)
        if fn == "sqrt":
            uu = np.asarray(u)
            if _any(uu < 0.0):
                raise DomainError("sqrt of negative value", pretty(e))
            v = np.sqrt(u)
            zero = uu == 0.0
            if _any(zero):
                if _any(np.any(a.partials != 0.0, axis=0) & zero):
                    raise DomainError("derivative of sqrt undefined at zero", pretty(e))
                safe = np.where(zero, 1.0, v)
                return a.chain(v, np.where(zero, 0.0, 0.5 / safe))
            return a.chain(v, 0.5 / v)
        if fn == "abs":
            return a.chain(np.abs(u), np.sign(u))
        raise ValueError(f"unsupported function {fn}")  # pragma: no cover


def eval_dual(e: Expr, point: Mapping[str, object], params: Sequence[str] | None = None) -> DualNumber:
    """Evaluate ``e`` at ``point`` with identity-seeded partials.

    ``params`` fixes the order of the partials; it defaults to the keys of
    ``point``.  Array-valued points are evaluated elementwise.
    """
    params = list(point) if params is None else list(params)
    ev = _Evaluator(params, point)
    out = ev.ev(e)
    value = out.value
    partials = np.broadcast_to(out.partials, (ev.m,) + ev.shape).copy() if ev.shape else np.asarray(out.partials, dtype=float).reshape(ev.m)
    if ev.shape:
        value = np.broadcast_to(np.asarray(value, dtype=float), ev.shape).copy()
    else:
        value = float(value)
    return DualNumber(value, partials)


def evaluate(e: Expr, point: Mapping[str, object], params: Sequence[str] | None = None):
    """Value only.  Shares the evaluator so domain checks are identical."""
    return eval_dual(e, point, params).value


def finite_difference(e: Expr, point: Mapping[str, float], params: Sequence[str], h: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient; an oracle independent of the AD path."""
    grads = []
    for p in params:
        hi = dict(point)
        lo = dict(point)
        hi[p] = point[p] + h
        lo[p] = point[p] - h
        grads.append((_plain(e, hi) - _plain(e, lo)) / (2.0 * h))
    return np.array(grads)


def _plain(e: Expr, point: Mapping[str, float]) -> float:
    """Float-only recursive evaluation, used by the finite-difference oracle."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Const):
        return CONSTANTS[e.name]
    if isinstance(e, Var):
        return float(point[e.name])
    if isinstance(e, Neg):
        return -_plain(e.operand, point)
    if isinstance(e, BinOp):
        a, b = _plain(e.left, point), _plain(e.right, point)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            return a / b
        if b.is_integer():
            return a ** int(b)
        return a ** b
    if isinstance(e, Call):
        args = [_plain(a, point) for a in e.args]
        if e.fn == "atan2":
            return math.atan2(*args)
        if e.fn == "abs":
            return abs(args[0])
        return getattr(math, e.fn)(args[0])
    raise TypeError(e)
