"""Hyperplane families H(phi, nu) over rectangular parameter boxes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import expr as E
from .dual import eval_dual
from .errors import DegenerateCurve, FamilyError, VanishingCurvature
from .expr import Expr

DEFAULT_SAMPLES = 401
UNIT_TOL = 1e-9


@dataclass(frozen=True)
class SampleGrid:
    """Tensor grid; ``axes[k]`` holds the strictly increasing samples of parameter k."""

    params: tuple[str, ...]
    axes: tuple[np.ndarray, ...]

    def __post_init__(self):
        for name, ax in zip(self.params, self.axes):
            if ax.ndim != 1 or ax.size < 2:
                raise ValueError(f"grid axis {name!r} needs at least 2 points")
            if not np.all(np.diff(ax) > 0):
                raise ValueError(f"grid axis {name!r} must be strictly increasing")

    @classmethod
    def uniform(cls, params: Sequence[str], domain: Sequence[tuple[float, float]], counts: int | Sequence[int]) -> "SampleGrid":
        if isinstance(counts, int):
            counts = [counts] * len(params)
        axes = tuple(np.linspace(lo, hi, k) for (lo, hi), k in zip(domain, counts))
        return cls(tuple(params), axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(ax.size for ax in self.axes)

    @property
    def is_uniform(self) -> bool:
        return all(np.allclose(np.diff(ax), ax[1] - ax[0], rtol=1e-9, atol=0.0) for ax in self.axes)

    @property
    def steps(self) -> tuple[float, ...]:
        return tuple(float(ax[1] - ax[0]) for ax in self.axes)

    def mesh(self) -> dict[str, np.ndarray]:
        grids = np.meshgrid(*self.axes, indexing="ij")
        return dict(zip(self.params, grids))

    def point(self, index: Sequence[int]) -> dict[str, float]:
        return {p: float(ax[i]) for p, ax, i in zip(self.params, self.axes, index)}


@dataclass
class FamilySamples:
    """Values and exact first derivatives of a family on a set of points.

    Sample axes come first; the last axis is the ambient coordinate.
    ``dphi`` and ``dnu`` have shape ``(*S, m, n+1)``, ``dgamma`` ``(*S, m)``.
    """

    points: dict[str, np.ndarray]
    phi: np.ndarray
    dphi: np.ndarray
    nu: np.ndarray
    dnu: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray


def _eval_components(exprs: Sequence[Expr], points: Mapping[str, np.ndarray], params: Sequence[str]):
    shape = np.broadcast_shapes(*(np.shape(points[p]) for p in params))
    vals, parts = [], []
    for e in exprs:
        d = eval_dual(e, points, params)
        vals.append(np.broadcast_to(d.value, shape))
        parts.append(np.moveaxis(np.broadcast_to(d.partials, (len(params),) + shape), 0, -1))
    return np.stack(vals, axis=-1), np.stack(parts, axis=-1)


@dataclass(frozen=True)
class HyperplaneFamily:
    n: int
    params: tuple[str, ...]
    domain: tuple[tuple[float, float], ...]
    phi: tuple[Expr, ...]
    nu: tuple[Expr, ...]
    name: str = "custom"
    samples: tuple[int, ...] = ()
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n not in (1, 2):
            raise FamilyError(f"dimension n must be 1 or 2, got {self.n}")
        if len(self.phi) != self.n + 1 or len(self.nu) != self.n + 1:
            raise FamilyError(f"phi and nu need {self.n + 1} components")
        if len(self.domain) != len(self.params):
            raise FamilyError("one domain interval per parameter is required")
        for (lo, hi), p in zip(self.domain, self.params):
            if not lo < hi:
                raise FamilyError(f"empty domain for parameter {p!r}")
        allowed = set(self.params)
        for e in self.phi + self.nu:
            extra = E.free_vars(e) - allowed
            if extra:
                raise FamilyError(f"undeclared parameter(s) {sorted(extra)}")

    @property
    def m(self) -> int:
        return len(self.params)

    def grid(self, samples: int | Sequence[int] | None = None) -> SampleGrid:
        if samples is None:
            samples = self.samples or DEFAULT_SAMPLES
        return SampleGrid.uniform(self.params, self.domain, samples)

    def gamma_expr(self) -> Expr:
        out: Expr = E.Num(0.0)
        for a, b in zip(self.phi, self.nu):
            out = out + a * b
        return out

    def evaluate(self, where: SampleGrid | Mapping[str, object]) -> FamilySamples:
        points = where.mesh() if isinstance(where, SampleGrid) else {p: np.asarray(where[p], dtype=float) for p in self.params}
        phi, dphi = _eval_components(self.phi, points, self.params)
        nu, dnu = _eval_components(self.nu, points, self.params)
        gamma = np.sum(phi * nu, axis=-1)
        dgamma = np.sum(dphi * nu[..., None, :] + phi[..., None, :] * dnu, axis=-1)
        return FamilySamples(points, phi, dphi, nu, dnu, gamma, dgamma)

    def validate(self, grid: SampleGrid | None = None) -> FamilySamples:
        """Evaluate on ``grid`` and check that nu is a unit vector everywhere."""
        s = self.evaluate(grid or self.grid())
        err = np.abs(np.linalg.norm(s.nu, axis=-1) - 1.0)
        if np.max(err) > UNIT_TOL:
            idx = np.unravel_index(np.argmax(err), err.shape)
            raise FamilyError(f"nu is not a unit vector at sample {tuple(int(i) for i in idx)} (|nu|-1 = {err[idx]:.3g})")
        return s

    def replace(self, **changes) -> "HyperplaneFamily":
        data = {k: getattr(self, k) for k in ("n", "params", "domain", "phi", "nu", "name", "samples", "meta")}
        data.update(changes)
        return HyperplaneFamily(**data)


def support(fam: HyperplaneFamily, x: Mapping[str, float]) -> tuple[float, np.ndarray]:
    """gamma = phi . nu at a single point with its parameter gradient."""
    s = fam.evaluate(x)
    return float(s.gamma), np.asarray(s.dgamma, dtype=float)


# ---------------------------------------------------------------------------
# derived families


def _norm(vec: Sequence[Expr]) -> Expr:
    total: Expr = E.Num(0.0)
    for c in vec:
        total = total + c ** 2
    return E.sqrt(total)


def _cross(a: Sequence[Expr], b: Sequence[Expr]) -> list[Expr]:
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def _min_norm(vec: Sequence[Expr], grid: SampleGrid, params: Sequence[str]) -> float:
    vals, _ = _eval_components(vec, grid.mesh(), params)
    return float(np.min(np.linalg.norm(vals, axis=-1)))


def tangent_line_family(r: Sequence[Expr], param: str, domain: tuple[float, float], samples: int = DEFAULT_SAMPLES, name: str = "tangent-lines") -> HyperplaneFamily:
    """Affine tangent lines of a regular plane curve: phi = r, nu = unit normal."""
    r = [E.as_expr(c) for c in r]
    dr = [E.diff(c, param) for c in r]
    grid = SampleGrid.uniform([param], [domain], samples)
    if _min_norm(dr, grid, [param]) < 1e-9:
        raise DegenerateCurve("curve has a vanishing velocity on the sampled domain")
    speed = _norm(dr)
    nu = [-dr[1] / speed, dr[0] / speed]
    return HyperplaneFamily(1, (param,), (tuple(domain),), tuple(r), tuple(nu), name=name, samples=(samples,), meta={"curve": tuple(r)})


def osculating_plane_family(r: Sequence[Expr], params: tuple[str, str], domain: Sequence[tuple[float, float]], samples: int | Sequence[int] = 101, name: str = "osculating-planes") -> HyperplaneFamily:
    """Osculating planes of a space curve r(s); the second parameter is inert."""
    s, _ = params
    r = [E.as_expr(c) for c in r]
    d1 = [E.diff(c, s) for c in r]
    d2 = [E.diff(c, s) for c in d1]
    grid = SampleGrid.uniform([s], [domain[0]], samples if isinstance(samples, int) else samples[0])
    if _min_norm(d1, grid, [s]) < 1e-9:
        raise DegenerateCurve("curve has a vanishing velocity on the sampled domain")
    bvec = _cross(d1, d2)
    if _min_norm(bvec, grid, [s]) < 1e-9:
        raise VanishingCurvature("curvature vanishes on the sampled domain")
    bn = _norm(bvec)
    nu = [c / bn for c in bvec]
    counts = (samples, samples) if isinstance(samples, int) else tuple(samples)
    return HyperplaneFamily(2, tuple(params), tuple(tuple(d) for d in domain), tuple(r), tuple(nu), name=name, samples=counts, meta={"curve": tuple(r)})


def graph_normal_family(phi: Sequence[Expr], params: tuple[str, str], domain: Sequence[tuple[float, float]], samples: int | Sequence[int] = 101, name: str = "tangent-planes") -> HyperplaneFamily:
    """Tangent planes of a parametrized surface; nu = phi_x cross phi_y normalized."""
    phi = [E.as_expr(c) for c in phi]
    a = [E.diff(c, params[0]) for c in phi]
    b = [E.diff(c, params[1]) for c in phi]
    cr = _cross(a, b)
    grid = SampleGrid.uniform(params, domain, 21)
    if _min_norm(cr, grid, params) < 1e-9:
        raise DegenerateCurve("surface is not immersive on the sampled domain")
    cn = _norm(cr)
    counts = (samples, samples) if isinstance(samples, int) else tuple(samples)
    return HyperplaneFamily(2, tuple(params), tuple(tuple(d) for d in domain), tuple(phi), tuple(c / cn for c in cr), name=name, samples=counts)


def linear_transform(fam: HyperplaneFamily, R: np.ndarray, move_phi: bool = True) -> HyperplaneFamily:
    """Apply the matrix R to nu (and to phi when ``move_phi``)."""
    R = np.asarray(R, dtype=float)

    def apply(vec):
        out = []
        for row in R:
            acc: Expr = E.Num(0.0)
            for coef, c in zip(row, vec):
                acc = acc + float(coef) * c
            out.append(acc)
        return tuple(out)

    phi = apply(fam.phi) if move_phi else fam.phi
    return fam.replace(phi=phi, nu=apply(fam.nu))


def rotation2(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotate_family(fam: HyperplaneFamily, theta0: float, rotate_phi: bool = False) -> HyperplaneFamily:
    """nu -> R(theta0) nu for a line family; phi is kept unless asked."""
    if fam.n != 1:
        raise FamilyError("rotate_family needs a line family (n = 1)")
    return linear_transform(fam, rotation2(theta0), move_phi=rotate_phi)


def clairaut_family(n: int, c: float | None = None, g: Expr | None = None, bound: float = 3.0, samples: int | None = None) -> HyperplaneFamily:
    """Hyperplanes Y = sum X_i p_i + g(p) with nu the central projection of p.

    With ``c`` given the support function is the constant c, i.e.
    g(p) = -c sqrt(1 + |p|^2).
    """
    if (c is None) == (g is None):
        raise FamilyError("give exactly one of c or g")
    params = ("p",) if n == 1 else tuple(f"p{i + 1}" for i in range(n))
    ps = [E.Var(p) for p in params]
    root = _norm(ps + [E.Num(1.0)])
    nu = tuple([p / root for p in ps] + [E.Num(-1.0) / root])
    gamma = E.Num(float(c)) if c is not None else E.neg(E.as_expr(g)) / root
    phi = tuple(gamma * comp for comp in nu)
    counts = samples or (DEFAULT_SAMPLES if n == 1 else 101)
    meta = {"c": c, "g": g}
    return HyperplaneFamily(n, params, tuple((-bound, bound) for _ in params), phi, nu, name="clairaut", samples=(counts,) * n, meta=meta)
