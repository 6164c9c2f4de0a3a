"""Envelope construction f = omega + gamma nu, verification and E1 limits."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import expr as E
from .creative import CreativityReport, CreatorField, Uniqueness, solve_creator
from .dual import eval_dual
from .errors import NotApplicable, NotCreative, ParallelLines
from .expr import Expr
from .family import HyperplaneFamily, SampleGrid, clairaut_family

log = logging.getLogger(__name__)

VERIFY_RTOL = 1e-6
PARALLEL_DET = 1e-14
E1_LEVELS = 4
UNRELIABLE_ORDER = 0.5
E1_REFINE = 6


@dataclass
class EnvelopeMap:
    grid: SampleGrid
    f: np.ndarray  # (*S, n+1)
    omega: np.ndarray  # ambient creator
    gamma_nu: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return self.f.reshape(-1, self.f.shape[-1])


@dataclass
class VerificationReport:
    max_a: float
    argmax_a: tuple[int, ...]
    max_b: float
    argmax_b: tuple[int, ...]
    tolerance: float
    exact_jacobian: bool
    residual_a: np.ndarray | None = None
    residual_b: np.ndarray | None = None

    @property
    def passed(self) -> bool:
        return self.max_a <= self.tolerance and self.max_b <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "max_residual_a": self.max_a,
            "argmax_a": list(self.argmax_a),
            "max_residual_b": self.max_b,
            "argmax_b": list(self.argmax_b),
            "tolerance": self.tolerance,
            "exact_jacobian": self.exact_jacobian,
        }


def build_envelope(fam: HyperplaneFamily, creator: CreatorField) -> EnvelopeMap:
    omega = creator.ambient
    gnu = creator.gamma[..., None] * creator.nu
    return EnvelopeMap(creator.grid, omega + gnu, omega, gnu)


def envelope(fam: HyperplaneFamily, grid: SampleGrid | None = None, **kw) -> tuple[EnvelopeMap, CreatorField, CreativityReport]:
    """Solve for the creator and build the envelope; NotCreative is raised."""
    cf, rep = solve_creator(fam, grid, **kw)
    if not rep.creative:
        raise NotCreative(f"family is not creative (worst residual {rep.worst_residual:.3g} at {rep.worst_point})")
    return build_envelope(fam, cf), cf, rep


# ---------------------------------------------------------------------------
# verification


FD_POINTS = 7


def _fd_weights(offsets: np.ndarray) -> np.ndarray:
    """First-derivative weights on integer ``offsets`` (exact for polynomials of degree < len)."""
    k = len(offsets)
    V = np.vander(offsets.astype(float), k, increasing=True).T
    rhs = np.zeros(k)
    rhs[1] = 1.0
    return np.linalg.solve(V, rhs)


def grid_derivative(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Sixth-order finite difference along ``axis``; stencils shift one-sided near the ends."""
    v = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    k = v.shape[0]
    if k < FD_POINTS:
        return np.moveaxis(np.gradient(v, h, axis=0, edge_order=2 if k > 2 else 1), 0, axis)
    half = FD_POINTS // 2
    out = np.empty_like(v)
    w = _fd_weights(np.arange(-half, half + 1))
    out[half : k - half] = sum(c * v[i : k - 2 * half + i] for i, c in enumerate(w))
    for j in list(range(half)) + list(range(k - half, k)):
        start = min(max(j - half, 0), k - FD_POINTS)
        w = _fd_weights(np.arange(start, start + FD_POINTS) - j)
        out[j] = np.tensordot(w, v[start : start + FD_POINTS], axes=1)
    return np.moveaxis(out / h, 0, axis)


def closed_form(fmap: Sequence[Expr], points, params) -> tuple[np.ndarray, np.ndarray]:
    shape = np.broadcast_shapes(*(np.shape(points[p]) for p in params))
    vals, parts = [], []
    for e in fmap:
        d = eval_dual(E.as_expr(e), points, params)
        vals.append(np.broadcast_to(d.value, shape))
        parts.append(np.moveaxis(np.broadcast_to(d.partials, (len(params),) + shape), 0, -1))
    return np.stack(vals, -1), np.stack(parts, -1)


def verify_envelope(fam: HyperplaneFamily, f, grid: SampleGrid | None = None) -> VerificationReport:
    """Residuals of the two envelope conditions on ``grid``.

    ``f`` may be an :class:`EnvelopeMap`, an array of points on the grid, or a
    sequence of expressions in the family parameters (exact Jacobian).
    """
    if isinstance(f, EnvelopeMap):
        grid = grid or f.grid
    grid = grid or fam.grid()
    s = fam.evaluate(grid)
    exact = not isinstance(f, (EnvelopeMap, np.ndarray))
    if exact:
        values, jac = closed_form(f, s.points, fam.params)
    else:
        values = f.f if isinstance(f, EnvelopeMap) else np.asarray(f, dtype=float)
        if values.shape != s.phi.shape:
            raise ValueError(f"point cloud shape {values.shape} does not match the grid {s.phi.shape}")
        if grid.is_uniform:
            jac = np.stack([grid_derivative(values, k, h) for k, h in enumerate(grid.steps)], axis=-2)
        else:
            jac = np.stack([np.gradient(values, ax, axis=k, edge_order=2) for k, ax in enumerate(grid.axes)], axis=-2)
    res_a = np.abs(np.sum((values - s.phi) * s.nu, axis=-1))
    res_b = np.linalg.norm(np.einsum("...jk,...k->...j", jac, s.nu), axis=-1)
    tol = VERIFY_RTOL * (1.0 + float(np.max(np.abs(s.phi))))
    ia = tuple(int(i) for i in np.unravel_index(int(np.argmax(res_a)), res_a.shape))
    ib = tuple(int(i) for i in np.unravel_index(int(np.argmax(res_b)), res_b.shape))
    return VerificationReport(float(res_a[ia]), ia, float(res_b[ib]), ib, tol, exact, res_a, res_b)


# ---------------------------------------------------------------------------
# E1 envelopes


def richardson(values: Sequence[np.ndarray], ratio: float = 2.0, order: int = 1) -> np.ndarray:
    """Extrapolate a sequence computed at h, h/ratio, h/ratio^2, ... to h -> 0.

    The error is assumed to expand in powers h^order, h^(order+1), ...
    """
    table = [np.asarray(v, dtype=float) for v in values]
    p = order
    while len(table) > 1:
        fac = ratio ** p
        table = [(fac * table[i + 1] - table[i]) / (fac - 1.0) for i in range(len(table) - 1)]
        p += 1
    return table[0]


@dataclass
class E1Estimate:
    grid: SampleGrid
    points: np.ndarray  # (*S, 2), nan where undefined
    order: np.ndarray
    defined: np.ndarray
    parallel: np.ndarray
    unreliable: np.ndarray
    distance: np.ndarray | None = None

    def max_distance(self) -> float:
        if self.distance is None:
            raise ValueError("no reference envelope was supplied")
        mask = self.defined & ~self.unreliable
        return float(np.max(self.distance[mask])) if np.any(mask) else float("nan")

    def min_order(self) -> float:
        mask = self.defined & ~self.unreliable
        return float(np.min(self.order[mask])) if np.any(mask) else float("nan")


def _e1_pass(fam: HyperplaneFamily, t0: np.ndarray, h0: np.ndarray, sign: np.ndarray):
    base = fam.evaluate({fam.params[0]: t0})
    estimates, parallel = [], np.ones(t0.shape, dtype=bool)
    for level in range(E1_LEVELS):
        h = h0 / 2.0 ** level
        other = fam.evaluate({fam.params[0]: t0 + sign * h})
        a = np.stack([base.nu, other.nu], axis=-2)
        bad = np.abs(np.linalg.det(a)) <= PARALLEL_DET
        parallel &= bad
        safe = np.where(bad[..., None, None], np.eye(2), a)
        rhs = np.stack([base.gamma, other.gamma], axis=-1)
        x = np.linalg.solve(safe, rhs[..., None])[..., 0]
        estimates.append(np.where(bad[..., None], np.nan, x))
    defined = np.all(np.isfinite(np.stack(estimates)), axis=(0, -1))
    d1 = np.linalg.norm(estimates[0] - estimates[1], axis=-1)
    d2 = np.linalg.norm(estimates[1] - estimates[2], axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        order = np.log2(d1 / d2)
    # an exactly linear sequence has d1 = 2 d2; identical estimates mean h is irrelevant
    order = np.where((d1 == 0.0) & (d2 == 0.0), 1.0, order)
    return richardson(estimates), order, defined, parallel


def e1_envelope(fam: HyperplaneFamily, grid: SampleGrid | None = None, reference: EnvelopeMap | None = None) -> E1Estimate:
    """Intersection of H(t0) with H(t0 + h), extrapolated to h -> 0.

    Offsets are h0, h0/2, h0/4, h0/8 with h0 one percent of the domain
    width.  Samples whose order estimate is far from 1 (the step is beyond
    the radius of convergence, typically next to a singular point of nu)
    are recomputed with h0 divided by 4, up to E1_REFINE times.
    """
    if fam.n != 1 or fam.m != 1:
        raise ValueError("E1 envelopes are computed for one-parameter line families")
    grid = grid or fam.grid()
    t0 = grid.axes[0]
    lo, hi = fam.domain[0]
    sign = np.where(t0 <= 0.5 * (lo + hi), 1.0, -1.0)
    h0 = np.full(t0.shape, 1e-2 * (hi - lo))
    points, order, defined, parallel = _e1_pass(fam, t0, h0, sign)
    if not np.any(defined):
        raise ParallelLines("every pair of nearby lines is parallel; the E1 envelope is undefined")
    for _ in range(E1_REFINE):
        # a parallel pair at one offset (e.g. symmetric points of a cubic) is retried too
        redo = ~parallel & ~(defined & (order >= 0.8) & (order <= 1.25))
        if not np.any(redo):
            break
        h0 = np.where(redo, h0 / 4.0, h0)
        p2, o2, d2, _ = _e1_pass(fam, t0[redo], h0[redo], sign[redo])
        points[redo], order[redo], defined[redo] = p2, o2, d2
    if not np.any(defined):
        raise ParallelLines("no sample has a well-defined intersection limit")
    unreliable = defined & ~(order >= UNRELIABLE_ORDER)
    est = E1Estimate(grid, np.where(defined[..., None], points, np.nan), order, defined, parallel, unreliable)
    if reference is not None:
        est.distance = np.linalg.norm(est.points - reference.f, axis=-1)
    if np.any(unreliable):
        log.info("E1: %d samples with order estimate below %.1f", int(np.sum(unreliable)), UNRELIABLE_ORDER)
    return est


# ---------------------------------------------------------------------------
# alternative envelopes at singular points of nu


def bump(s: np.ndarray) -> np.ndarray:
    """exp(1 - 1/(1 - s^2)) on (-1, 1), zero outside; peak value 1 at s = 0."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    safe = np.where(inside, s, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe * safe)), 0.0)


def _box_bump(grid: SampleGrid, box: Sequence[tuple[float, float]]) -> np.ndarray:
    mesh = grid.mesh()
    out = np.ones(grid.shape)
    for p, (lo, hi) in zip(grid.params, box):
        if hi <= lo:
            return np.zeros(grid.shape)
        centre, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        out = out * bump((mesh[p] - centre) / half)
    return out


def _oriented_kernel(creator: CreatorField, reference: np.ndarray | None) -> np.ndarray:
    """Smooth unit kernel direction (ambient) at every singular sample, 0 elsewhere."""
    shape = creator.grid.shape
    n1 = creator.nu.shape[-1]
    out = np.zeros(shape + (n1,))
    prev = None
    for idx in np.ndindex(*shape):
        if not creator.singular[idx]:
            continue
        ker = creator.kernel(idx)
        if ker.shape[0] == creator.basis.shape[-2]:
            vec = creator.basis[idx][0]
        else:
            vec = ker[0] @ creator.basis[idx]
        if reference is not None:
            sgn = np.sign(vec @ reference[idx]) or 1.0
        elif prev is not None:
            sgn = np.sign(vec @ prev) or 1.0
        else:
            sgn = 1.0 if vec[np.argmax(np.abs(vec))] > 0 else -1.0
        out[idx] = sgn * vec
        prev = out[idx]
    return out


def alternative_envelopes(
    fam: HyperplaneFamily,
    creator: CreatorField,
    report: CreativityReport,
    alphas: Sequence[Expr | str | float],
    localize: bool = True,
    reference: np.ndarray | None = None,
) -> list[EnvelopeMap]:
    """One envelope per alpha: omega + alpha * (kernel direction) + gamma nu.

    With ``localize`` the alpha is multiplied by a bump supported on the
    flagged singular box so the perturbation vanishes off that box.
    ``reference`` fixes the orientation of the kernel direction.
    """
    if report.uniqueness is not Uniqueness.NON_UNIQUE:
        raise NotApplicable("the family creates a unique envelope; there are no alternatives")
    grid = creator.grid
    kdir = _oriented_kernel(creator, reference)
    weight = np.zeros(grid.shape)
    if localize:
        for box in report.flagged_boxes:
            weight = np.maximum(weight, _box_bump(grid, box))
    else:
        weight = creator.singular.astype(float)
    base = build_envelope(fam, creator)
    out = []
    mesh = grid.mesh()
    for a in alphas:
        a = E.parse(a, list(fam.params)) if isinstance(a, str) else E.as_expr(a)
        vals = np.broadcast_to(eval_dual(a, mesh, fam.params).value, grid.shape)
        shift = (vals * weight)[..., None] * kdir
        omega = base.omega + shift
        out.append(EnvelopeMap(grid, omega + base.gamma_nu, omega, base.gamma_nu))
    return out


# ---------------------------------------------------------------------------
# Clairaut equation


@dataclass
class ClairautSolution:
    X: np.ndarray  # (*S, n)
    Y: np.ndarray  # (*S,)
    report: CreativityReport


def clairaut_graph(c: float, X: np.ndarray) -> np.ndarray:
    """Closed-form singular solution for constant support c; X has a trailing axis of length n."""
    X = np.asarray(X, dtype=float)
    r2 = X * X if X.ndim == 0 else np.sum(X * X, axis=-1)
    return -np.sign(c) * np.sqrt(c * c - r2)


def clairaut_singular_solution(n: int = 1, c: float | None = None, g: Expr | None = None, samples: int | None = None, bound: float = 3.0) -> ClairautSolution:
    fam = clairaut_family(n, c=c, g=g, bound=bound, samples=samples)
    env, _, rep = envelope(fam)
    return ClairautSolution(env.f[..., :n], env.f[..., n], rep)
