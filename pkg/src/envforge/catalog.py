"""Named families with closed forms."""

from __future__ import annotations

import inspect
import math
from typing import Callable

from . import expr as E
from .errors import UnknownCatalogEntry
from .expr import Expr
from .family import (
    HyperplaneFamily,
    clairaut_family,
    osculating_plane_family,
    rotation2,
    tangent_line_family,
)

T = E.Var("t")


def _alpha(alpha: Expr | str | float | None, params=("t",)) -> Expr:
    if alpha is None:
        return E.Num(0.0)
    if isinstance(alpha, str):
        return E.parse(alpha, list(params))
    return E.as_expr(alpha)


def _rot(theta0: float, v: tuple[Expr, Expr]) -> tuple[Expr, Expr]:
    (a, b), (c, d) = rotation2(theta0)
    return (float(a) * v[0] + float(b) * v[1], float(c) * v[0] + float(d) * v[1])


def _quarter(v: tuple[Expr, Expr]) -> tuple[Expr, Expr]:
    return (-v[1], v[0])


def _shifted(base: tuple[Expr, Expr], alpha: Expr, nu: tuple[Expr, Expr]) -> tuple[Expr, Expr]:
    tau = _quarter(nu)
    return (base[0] + alpha * tau[0], base[1] + alpha * tau[1])


def ex1_1(theta0: float = 0.0, alpha=None) -> HyperplaneFamily:
    """Horizontal lines through (alpha(t), 0) spun by a fixed angle."""
    a = _alpha(alpha)
    nu = (E.Num(-math.sin(theta0)), E.Num(math.cos(theta0)))
    return HyperplaneFamily(1, ("t",), ((-2.0, 2.0),), (a, E.Num(0.0)), nu, name="ex1-1", samples=(401,), meta={"theta0": theta0, "alpha": a})


def ex1_2(theta0: float = 0.0, alpha=None) -> HyperplaneFamily:
    """Unit-circle normals spun by theta0; the envelope is a circle of radius |cos theta0|."""
    a = _alpha(alpha)
    nu = _rot(theta0, (E.cos(T), E.sin(T)))
    phi = _shifted((E.cos(T), E.sin(T)), a, nu)
    return HyperplaneFamily(1, ("t",), ((-3.0, 3.0),), phi, nu, name="ex1-2", samples=(401,), meta={"theta0": theta0, "alpha": a})


def ex1_3(theta0: float = 0.0, alpha=None) -> HyperplaneFamily:
    """Spun tangent lines of the cubic (t, t^3)."""
    a = _alpha(alpha)
    root = E.sqrt(1 + 9 * T ** 4)
    nu = _rot(theta0, (-3 * T ** 2 / root, 1 / root))
    phi = _shifted((T, T ** 3), a, nu)
    return HyperplaneFamily(1, ("t",), ((-2.0, 2.0),), phi, nu, name="ex1-3", samples=(401,), meta={"theta0": theta0, "alpha": a})


def ex1_4(theta0: float = 0.0, alpha=None) -> HyperplaneFamily:
    """Spun tangent lines of the curve (t^2, t^5)."""
    a = _alpha(alpha)
    root = E.sqrt(4 + 25 * T ** 6)
    nu = _rot(theta0, (-5 * T ** 3 / root, 2 / root))
    phi = _shifted((T ** 2, T ** 5), a, nu)
    return HyperplaneFamily(1, ("t",), ((-2.0, 2.0),), phi, nu, name="ex1-4", samples=(401,), meta={"theta0": theta0, "alpha": a})


def circle_tangents(radius: float = 1.0) -> HyperplaneFamily:
    r = (radius * E.cos(T), radius * E.sin(T))
    return tangent_line_family(r, "t", (-3.0, 3.0), 401, name="circle-tangents")


HELIX_SCALE = 1.0 / math.sqrt(2.0)


def helix_curve() -> tuple[Expr, Expr, Expr]:
    s = E.Var("s")
    arg = HELIX_SCALE * s
    return (E.cos(arg), E.sin(arg), HELIX_SCALE * s)


def helix_osculating(samples: int = 101) -> HyperplaneFamily:
    return osculating_plane_family(helix_curve(), ("s", "u"), [(-3.0, 3.0), (-1.0, 1.0)], samples, name="helix-osculating")


def shoe() -> HyperplaneFamily:
    x, y = E.Var("x"), E.Var("y")
    phi = (x, y, x ** 3 / 3 - y ** 2 / 2)
    root = E.sqrt(x ** 4 + y ** 2 + 1)
    nu = (-(x ** 2) / root, y / root, 1 / root)
    return HyperplaneFamily(2, ("x", "y"), ((-1.5, 1.5), (-1.5, 1.5)), phi, nu, name="shoe", samples=(101, 101))


def clairaut_const(c: float = 1.0, n: int = 1) -> HyperplaneFamily:
    return clairaut_family(n, c=c)


REGISTRY: dict[str, tuple[Callable[..., HyperplaneFamily], str]] = {
    "ex1-1": (ex1_1, "lines through (alpha(t), 0) with constant normal (-sin theta0, cos theta0); for non-constant alpha creative iff theta0 is a multiple of pi"),
    "ex1-2": (ex1_2, "normals (cos t, sin t) spun by theta0; envelope is the circle of radius |cos theta0|"),
    "ex1-3": (ex1_3, "tangent lines of (t, t^3) spun by theta0; unique envelope (t, t^3) when theta0 is a multiple of pi"),
    "ex1-4": (ex1_4, "tangent lines of (t^2, t^5) spun by theta0; unique envelope (t^2, t^5) when theta0 is a multiple of pi"),
    "circle-tangents": (circle_tangents, "tangent lines of the unit circle"),
    "helix-osculating": (helix_osculating, "osculating planes of the unit-speed helix; envelopes r(s) + beta(s,u) t(s)"),
    "shoe": (shoe, "tangent planes of the shoe surface (x, y, x^3/3 - y^2/2); the surface is its own unique envelope"),
    "clairaut-const": (clairaut_const, "Clairaut equation with constant support c; singular solution Y = -sign(c) sqrt(c^2 - |X|^2)"),
}


def names() -> list[str]:
    return list(REGISTRY)


def describe(name: str) -> str:
    return _lookup(name)[1]


def _lookup(name: str):
    try:
        return REGISTRY[name]
    except KeyError:
        raise UnknownCatalogEntry(f"unknown catalog entry {name!r}; known: {', '.join(REGISTRY)}") from None


def catalog(name: str, **kwargs) -> HyperplaneFamily:
    """Build a catalog family; unknown keyword arguments are ignored."""
    factory = _lookup(name)[0]
    accepted = inspect.signature(factory).parameters
    return factory(**{k: v for k, v in kwargs.items() if k in accepted and v is not None})
