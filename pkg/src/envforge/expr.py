"""Closed-form expression language used to define hyperplane families.

Grammar (standard infix)::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := primary ('^' unary)?          # right associative
    primary  := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

so ``^`` binds tighter than unary minus (``-t^2 == -(t^2)``), which binds
tighter than ``*``/``/``, which bind tighter than ``+``/``-``.  Names are
either declared parameters, the constant ``pi`` or one of the functions in
:data:`FUNCTIONS`.

Trees are immutable dataclasses.  :func:`pretty` prints the canonical form,
and ``parse(pretty(parse(s))) == parse(s)`` for every accepted ``s``.
:func:`diff` differentiates symbolically; it is used to derive unit normals
(tangent-line and osculating families) in closed form so that downstream
Jacobians remain exact.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import ArityError, ExprSyntaxError, UnknownIdentifier

FUNCTIONS: dict[str, int] = {
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "sqrt": 1,
    "exp": 1,
    "log": 1,
    "abs": 1,
    "atan2": 2,
}
CONSTANTS: dict[str, float] = {"pi": math.pi}

_ADD, _MUL, _NEG, _POW, _ATOM = 1, 2, 3, 4, 5


class Expr:
    """Base class of expression nodes; supports operator construction."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, other):
        return power(self, as_expr(other))

    def __neg__(self):
        return neg(self)

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True, eq=True, repr=True)
class Num(Expr):
    value: float


@dataclass(frozen=True, eq=True, repr=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, eq=True, repr=True)
class Const(Expr):
    name: str


@dataclass(frozen=True, eq=True, repr=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True, repr=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True, eq=True, repr=True)
class Call(Expr):
    fn: str
    args: tuple


# --------------------------------------------------------------------------
# tokenizer / parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # 'num', 'name', 'op', 'end'
    text: str
    offset: int  # byte offset


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    byte = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", byte)
        text = m.group()
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, text, byte))
        byte += len(text.encode("utf-8"))
        pos = m.end()
    tokens.append(_Token("end", "", byte))
    return tokens


class _Parser:
    def __init__(self, source: str, params: Iterable[str]):
        self.tokens = _tokenize(source)
        self.i = 0
        self.params = set(params)

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def _advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def _expect(self, text: str) -> _Token:
        if self.tok.text != text or self.tok.kind != "op":
            raise ExprSyntaxError(f"expected {text!r}, found {self._describe()}", self.tok.offset)
        return self._advance()

    def _describe(self) -> str:
        return "end of input" if self.tok.kind == "end" else repr(self.tok.text)

    def parse(self) -> Expr:
        node = self._expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {self._describe()}", self.tok.offset)
        return node

    def _expr(self) -> Expr:
        node = self._term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self._advance().text
            node = BinOp(op, node, self._term())
        return node

    def _term(self) -> Expr:
        node = self._unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self._advance().text
            node = BinOp(op, node, self._unary())
        return node

    def _unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self._advance()
            return Neg(self._unary())
        return self._power()

    def _power(self) -> Expr:
        base = self._primary()
        if self.tok.kind == "op" and self.tok.text == "^":
            self._advance()
            return BinOp("^", base, self._unary())
        return base

    def _primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self._advance()
            return Num(float(tok.text))
        if tok.kind == "name":
            self._advance()
            if self.tok.kind == "op" and self.tok.text == "(":
                return self._call(tok)
            if tok.text in self.params:
                return Var(tok.text)
            if tok.text in CONSTANTS:
                return Const(tok.text)
            if tok.text in FUNCTIONS:
                raise ExprSyntaxError(f"function {tok.text!r} needs an argument list", self.tok.offset)
            raise UnknownIdentifier(f"unknown variable {tok.text!r}", tok.offset)
        if tok.kind == "op" and tok.text == "(":
            self._advance()
            node = self._expr()
            self._expect(")")
            return node
        raise ExprSyntaxError(f"unexpected {self._describe()}", tok.offset)

    def _call(self, name: _Token) -> Expr:
        if name.text not in FUNCTIONS:
            raise UnknownIdentifier(f"unknown function {name.text!r}", name.offset)
        self._expect("(")
        args = [self._expr()]
        while self.tok.kind == "op" and self.tok.text == ",":
            self._advance()
            args.append(self._expr())
        self._expect(")")
        want = FUNCTIONS[name.text]
        if len(args) != want:
            raise ArityError(f"{name.text} takes {want} argument(s), got {len(args)}", name.offset)
        return Call(name.text, tuple(args))


def parse(source: str, params: Sequence[str]) -> Expr:
    """Parse ``source`` with ``params`` as the only admissible variables."""
    return _Parser(source, params).parse()


# --------------------------------------------------------------------------
# printing

def _fmt_num(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _level(e: Expr) -> int:
    if isinstance(e, BinOp):
        return {"+": _ADD, "-": _ADD, "*": _MUL, "/": _MUL, "^": _POW}[e.op]
    if isinstance(e, Neg):
        return _NEG
    if isinstance(e, Num) and e.value < 0:
        return _NEG
    return _ATOM


def _wrap(e: Expr, need: bool) -> str:
    s = pretty(e)
    return f"({s})" if need else s


def pretty(e: Expr) -> str:
    """Canonical infix form with the minimum number of parentheses."""
    if isinstance(e, Num):
        if e.value < 0:
            return "-" + _fmt_num(-e.value)
        return _fmt_num(e.value)
    if isinstance(e, (Var, Const)):
        return e.name
    if isinstance(e, Neg):
        return "-" + _wrap(e.operand, _level(e.operand) < _NEG)
    if isinstance(e, Call):
        return f"{e.fn}({', '.join(pretty(a) for a in e.args)})"
    if isinstance(e, BinOp):
        lvl = _level(e)
        if e.op == "^":
            left = _wrap(e.left, _level(e.left) <= _POW)
            right = _wrap(e.right, _level(e.right) < _NEG)
            return f"{left}^{right}"
        left = _wrap(e.left, _level(e.left) < lvl)
        right = _wrap(e.right, _level(e.right) <= lvl)
        sep = f" {e.op} " if lvl == _ADD else f"{e.op}"
        return f"{left}{sep}{right}"
    raise TypeError(f"not an expression node: {e!r}")


# --------------------------------------------------------------------------
# construction helpers with light constant folding

def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float)):
        return Num(float(x))
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def _num(e: Expr) -> float | None:
    return e.value if isinstance(e, Num) else None


def add(a: Expr, b: Expr) -> Expr:
    if _num(a) == 0.0:
        return b
    if _num(b) == 0.0:
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return BinOp("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _num(b) == 0.0:
        return a
    if _num(a) == 0.0:
        return neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    return BinOp("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _num(a) == 0.0 or _num(b) == 0.0:
        return Num(0.0)
    if _num(a) == 1.0:
        return b
    if _num(b) == 1.0:
        return a
    if _num(a) == -1.0:
        return neg(b)
    if _num(b) == -1.0:
        return neg(a)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    return BinOp("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _num(a) == 0.0 and _num(b) != 0.0:
        return Num(0.0)
    if _num(b) == 1.0:
        return a
    return BinOp("/", a, b)


def power(a: Expr, b: Expr) -> Expr:
    if _num(b) == 1.0:
        return a
    if _num(b) == 0.0:
        return Num(1.0)
    return BinOp("^", a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def call(fn: str, *args: Expr) -> Expr:
    if FUNCTIONS.get(fn) != len(args):
        raise ArityError(f"{fn} takes {FUNCTIONS.get(fn)} argument(s)", 0)
    return Call(fn, tuple(as_expr(a) for a in args))


def sin(a) -> Expr:
    return call("sin", a)


def cos(a) -> Expr:
    return call("cos", a)


def sqrt(a) -> Expr:
    return call("sqrt", a)


# --------------------------------------------------------------------------
# tree utilities

def free_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, BinOp):
        return free_vars(e.left) | free_vars(e.right)
    if isinstance(e, Neg):
        return free_vars(e.operand)
    if isinstance(e, Call):
        out: frozenset[str] = frozenset()
        for a in e.args:
            out |= free_vars(a)
        return out
    return frozenset()


def node_count(e: Expr) -> int:
    if isinstance(e, BinOp):
        return 1 + node_count(e.left) + node_count(e.right)
    if isinstance(e, Neg):
        return 1 + node_count(e.operand)
    if isinstance(e, Call):
        return 1 + sum(node_count(a) for a in e.args)
    return 1


def depth(e: Expr) -> int:
    if isinstance(e, BinOp):
        return 1 + max(depth(e.left), depth(e.right))
    if isinstance(e, Neg):
        return 1 + depth(e.operand)
    if isinstance(e, Call):
        return 1 + max(depth(a) for a in e.args)
    return 1


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace variables by expressions (simultaneously)."""
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, BinOp):
        return BinOp(e.op, substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Neg):
        return Neg(substitute(e.operand, mapping))
    if isinstance(e, Call):
        return Call(e.fn, tuple(substitute(a, mapping) for a in e.args))
    return e


def diff(e: Expr, var: str) -> Expr:
    """Symbolic partial derivative of ``e`` with respect to ``var``."""
    if isinstance(e, (Num, Const)):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0 if e.name == var else 0.0)
    if isinstance(e, Neg):
        return neg(diff(e.operand, var))
    if isinstance(e, BinOp):
        u, v = e.left, e.right
        du, dv = diff(u, var), diff(v, var)
        if e.op == "+":
            return add(du, dv)
        if e.op == "-":
            return sub(du, dv)
        if e.op == "*":
            return add(mul(du, v), mul(u, dv))
        if e.op == "/":
            if _num(dv) == 0.0:
                return div(du, v)
            return div(sub(mul(du, v), mul(u, dv)), power(v, Num(2.0)))
        # '^'
        if var not in free_vars(v):
            if _num(du) == 0.0:
                return Num(0.0)
            k = _num(v)
            lowered = Num(k - 1.0) if k is not None else sub(v, Num(1.0))
            return mul(mul(v, power(u, lowered)), du)
        inner = add(mul(dv, call("log", u)), div(mul(v, du), u))
        return mul(e, inner)
    if isinstance(e, Call):
        if e.fn == "atan2":
            y, x = e.args
            dy, dx = diff(y, var), diff(x, var)
            num = sub(mul(x, dy), mul(y, dx))
            return div(num, add(power(x, Num(2.0)), power(y, Num(2.0))))
        (u,) = e.args
        du = diff(u, var)
        if _num(du) == 0.0:
            return Num(0.0)
        if e.fn == "sin":
            outer = call("cos", u)
        elif e.fn == "cos":
            outer = neg(call("sin", u))
        elif e.fn == "tan":
            outer = div(Num(1.0), power(call("cos", u), Num(2.0)))
        elif e.fn == "sqrt":
            outer = div(Num(1.0), mul(Num(2.0), e))
        elif e.fn == "exp":
            outer = e
        elif e.fn == "log":
            outer = div(Num(1.0), u)
        elif e.fn == "abs":
            outer = div(u, e)
        else:  # pragma: no cover - FUNCTIONS is closed
            raise ValueError(e.fn)
        return mul(outer, du)
    raise TypeError(f"not an expression node: {e!r}")
