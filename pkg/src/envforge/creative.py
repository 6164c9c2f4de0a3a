"""Creativity test, creator fields and the uniqueness verdict.

At every sample the 1-form omega is found from J^T omega = grad gamma, where
J[i, j] = e_i . d nu / d x_j in the tangent frame (e_i) at nu(x).  The
system is solved with a rank-revealing SVD.  At singular samples of nu
the kernel component of omega is fixed by continuity from the neighbouring
regular samples (the limit treatment).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import ndimage

from .errors import FullRank, GridTooCoarse
from .family import FamilySamples, HyperplaneFamily, SampleGrid
from .sphere import frame_basis

TOL_CREATIVE = 1e-7
RANK_RTOL = 1e-9
STENCIL = 4  # regular neighbours used by the limit treatment
STENCIL_REACH = 4
MIN_AXIS_SAMPLES = 5


class Verdict(str, enum.Enum):
    CREATIVE = "Creative"
    NOT_CREATIVE = "NotCreative"
    NON_UNIQUE = "CreativeNonUnique"


class Uniqueness(str, enum.Enum):
    UNIQUE = "Unique"
    NON_UNIQUE = "NonUnique"


@dataclass
class CreatorField:
    grid: SampleGrid
    samples: FamilySamples
    basis: np.ndarray  # (*S, n, n+1)
    jacobian: np.ndarray  # (*S, n, m)
    components: np.ndarray  # (*S, n)
    residual: np.ndarray  # (*S,)
    tolerance: np.ndarray  # (*S,)
    singular: np.ndarray  # (*S,) bool
    kernel_dim: np.ndarray  # (*S,) int
    treated: np.ndarray  # (*S,) bool
    sigma_threshold: float

    @property
    def ambient(self) -> np.ndarray:
        return np.einsum("...i,...ij->...j", self.components, self.basis)

    @property
    def nu(self) -> np.ndarray:
        return self.samples.nu

    @property
    def gamma(self) -> np.ndarray:
        return self.samples.gamma

    def kernel(self, index: Sequence[int]) -> np.ndarray:
        """Orthonormal kernel basis of J^T at a grid sample, as components."""
        return _kernel_basis(self.jacobian[tuple(index)], self.sigma_threshold)

    def with_components(self, components: np.ndarray) -> "CreatorField":
        out = CreatorField(**{k: getattr(self, k) for k in self.__dataclass_fields__})
        out.components = components
        return out


@dataclass
class CreativityReport:
    verdict: Verdict
    worst_residual: float
    worst_index: tuple[int, ...]
    worst_point: dict[str, float]
    singular_indices: list[tuple[int, ...]]
    regular_fraction: float
    kernel_dims: list[int]
    uniqueness: Uniqueness | None = None
    flagged_boxes: list[list[tuple[float, float]]] = field(default_factory=list)
    treated_count: int = 0
    max_jump_ratio: float = 0.0
    limit_mismatch: float = 0.0

    @property
    def creative(self) -> bool:
        return self.verdict is not Verdict.NOT_CREATIVE

    def to_dict(self, max_singular: int = 50) -> dict:
        return {
            "verdict": self.verdict.value,
            "uniqueness": self.uniqueness.value if self.uniqueness else None,
            "worst_residual": self.worst_residual,
            "worst_index": list(self.worst_index),
            "worst_point": self.worst_point,
            "regular_fraction": self.regular_fraction,
            "singular_count": len(self.singular_indices),
            "singular_indices": [list(i) for i in self.singular_indices[:max_singular]],
            "kernel_dims": self.kernel_dims[:max_singular],
            "flagged_boxes": [[list(b) for b in box] for box in self.flagged_boxes],
            "treated_count": self.treated_count,
            "max_jump_ratio": self.max_jump_ratio,
            "limit_mismatch": self.limit_mismatch,
        }


# ---------------------------------------------------------------------------
# linear algebra helpers


def _jacobian(samples: FamilySamples, basis: np.ndarray) -> np.ndarray:
    # J[..., i, j] = basis_i . dnu/dx_j
    return np.einsum("...ik,...jk->...ij", basis, samples.dnu)


def _sigma_threshold(jac: np.ndarray) -> float:
    sv = np.linalg.svd(jac, compute_uv=False)
    return RANK_RTOL * float(np.max(sv)) if sv.size else 0.0


def _lstsq(a: np.ndarray, g: np.ndarray, thr: float):
    """Minimum-norm solutions of a x = g, batched; returns x and the rank."""
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    keep = s > thr
    inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    coef = np.einsum("...ji,...j->...i", u, g) * inv
    return np.einsum("...ij,...i->...j", vh, coef), np.sum(keep, axis=-1)


def _kernel_basis(jac: np.ndarray, thr: float) -> np.ndarray:
    """Rows spanning ker(J^T) for a single n x m matrix J."""
    a = np.asarray(jac).T  # (m, n)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    rank = int(np.sum(s > thr))
    return vh[rank:]


def _twist(basis: np.ndarray, angle) -> np.ndarray:
    if basis.shape[-2] != 2:
        raise ValueError("frame twist is only defined for n = 2")
    a = np.asarray(angle, dtype=float)[..., None]
    c, s = np.cos(a), np.sin(a)
    b1, b2 = basis[..., 0, :], basis[..., 1, :]
    return np.stack([c * b1 + s * b2, -s * b1 + c * b2], axis=-2)


# ---------------------------------------------------------------------------
# limit treatment


def _axis_stencil(regular: np.ndarray, index: tuple[int, ...], axis: int):
    size = regular.shape[axis]
    offsets = []
    for off in sorted(range(-STENCIL_REACH, STENCIL_REACH + 1), key=lambda o: (abs(o), o)):
        if off == 0:
            continue
        j = index[axis] + off
        if 0 <= j < size:
            probe = list(index)
            probe[axis] = j
            if regular[tuple(probe)]:
                offsets.append(off)
        if len(offsets) == STENCIL:
            return offsets
    return None


def _limit_fill(values: np.ndarray, regular: np.ndarray, targets: np.ndarray, axes: Sequence[np.ndarray]) -> tuple[dict, bool]:
    """Extrapolate ``values`` (shape (*S, k)) from regular neighbours.

    Returns {index: value} for each target sample that has a complete
    stencil along at least one axis, and whether some target had none.
    """
    filled, missing = {}, False
    for idx in map(tuple, np.argwhere(targets)):
        estimates = []
        for axis, coords in enumerate(axes):
            offs = _axis_stencil(regular, idx, axis)
            if offs is None:
                continue
            rows = []
            for off in offs:
                probe = list(idx)
                probe[axis] += off
                rows.append(values[tuple(probe)])
            # interpolating cubic evaluated at the centre
            estimates.append(_extrapolate(coords[[idx[axis] + o for o in offs]], np.asarray(rows), coords[idx[axis]]))
        if estimates:
            filled[idx] = np.mean(estimates, axis=0)
        else:
            missing = True
    return filled, missing


def _extrapolate(coords: np.ndarray, rows: np.ndarray, centre: float) -> np.ndarray:
    x = coords - centre
    w = np.array([np.prod([-xj / (xi - xj) for xj in x if xj != xi]) for xi in x])
    return w @ rows


def _side_mismatch(values: np.ndarray, regular: np.ndarray, idx: tuple[int, ...], axes: Sequence[np.ndarray]) -> float:
    """Disagreement of left and right one-sided limits at ``idx`` relative to the
    spread of the values used; large when the creator blows up there."""
    worst = 0.0
    for axis, coords in enumerate(axes):
        sides = []
        for sgn in (-1, 1):
            js = [idx[axis] + sgn * k for k in range(1, STENCIL + 1)]
            if not all(0 <= j < coords.size for j in js):
                break
            probes = [tuple(j if a == axis else i for a, i in enumerate(idx)) for j in js]
            if not all(regular[p] for p in probes):
                break
            rows = np.asarray([values[p] for p in probes])
            sides.append((_extrapolate(coords[js], rows, coords[idx[axis]]), rows))
        if len(sides) != 2:
            continue
        (left, lrows), (right, rrows) = sides
        allrows = np.concatenate([lrows, rrows])
        spread = float(np.max(np.linalg.norm(allrows - allrows.mean(axis=0), axis=-1)))
        floor = 1e-7 * (1.0 + float(np.max(np.linalg.norm(allrows, axis=-1))))
        worst = max(worst, float(np.linalg.norm(left - right)) / (spread + floor))
    return worst


def _near_regular(regular: np.ndarray, singular: np.ndarray) -> np.ndarray:
    near = np.zeros_like(singular)
    for axis in range(regular.ndim):
        for off in range(1, STENCIL_REACH + 1):
            for sgn in (-1, 1):
                shifted = np.zeros_like(regular)
                src = [slice(None)] * regular.ndim
                dst = [slice(None)] * regular.ndim
                if sgn > 0:
                    src[axis], dst[axis] = slice(off, None), slice(None, -off)
                else:
                    src[axis], dst[axis] = slice(None, -off), slice(off, None)
                shifted[tuple(dst)] = regular[tuple(src)]
                near |= shifted
    return near & singular


# ---------------------------------------------------------------------------
# public operations


def _finish(fam: HyperplaneFamily, grid: SampleGrid, s: FamilySamples, basis, jac, comps, tol_factor, thr, check_continuity):
    a = np.swapaxes(jac, -1, -2)
    g = s.dgamma
    sv = np.linalg.svd(jac, compute_uv=False)
    rank = np.sum(sv > thr, axis=-1)
    n = jac.shape[-2]
    singular = rank < n
    regular = ~singular
    targets = _near_regular(regular, singular)
    treated = np.zeros_like(singular)
    mismatch = 0.0
    if np.any(targets):
        amb = np.einsum("...i,...ij->...j", comps, basis)
        filled, missing = _limit_fill(amb, regular, targets, grid.axes)
        if missing and any(k < MIN_AXIS_SAMPLES for k in grid.shape):
            raise GridTooCoarse(f"limit treatment needs at least {MIN_AXIS_SAMPLES} samples per axis")
        mismatch = max((_side_mismatch(amb, regular, idx, grid.axes) for idx in filled), default=0.0)
        for idx, ext in filled.items():
            ker = _kernel_basis(jac[idx], thr)
            delta = basis[idx] @ ext - comps[idx]
            comps[idx] = comps[idx] + ker.T @ (ker @ delta)
            treated[idx] = True
    residual = np.linalg.norm(np.einsum("...ij,...j->...i", a, comps) - g, axis=-1)
    tolerance = tol_factor * (1.0 + np.linalg.norm(g, axis=-1))
    kdim = n - rank
    cf = CreatorField(grid, s, basis, jac, comps, residual, tolerance, singular, kdim, treated, thr)
    return cf, _report(fam, grid, cf, check_continuity, mismatch)


def solve_creator(
    fam: HyperplaneFamily,
    grid: SampleGrid | None = None,
    tol: float = TOL_CREATIVE,
    frame_twist=None,
    check_continuity: bool = True,
) -> tuple[CreatorField, CreativityReport]:
    """Creator field of ``fam`` on ``grid`` together with its creativity report."""
    grid = grid or fam.grid()
    s = fam.validate(grid)
    basis = frame_basis(s.nu)
    if frame_twist is not None:
        basis = _twist(basis, frame_twist)
    jac = _jacobian(s, basis)
    thr = _sigma_threshold(jac)
    comps, _ = _lstsq(np.swapaxes(jac, -1, -2), s.dgamma, thr)
    return _finish(fam, grid, s, basis, jac, comps, tol, thr, check_continuity)


def creator_1d_fast(fam: HyperplaneFamily, grid: SampleGrid | None = None, tol: float = TOL_CREATIVE) -> tuple[CreatorField, CreativityReport]:
    """Scalar gauge route for line families: alpha = gamma' / Theta'."""
    if fam.n != 1 or fam.m != 1:
        raise ValueError("creator_1d_fast needs a one-parameter line family")
    grid = grid or fam.grid()
    s = fam.validate(grid)
    tau = np.stack([-s.nu[..., 1], s.nu[..., 0]], axis=-1)
    dtheta = np.sum(tau * s.dnu[..., 0, :], axis=-1)
    thr = RANK_RTOL * float(np.max(np.abs(dtheta)))
    gp = s.dgamma[..., 0]
    ok = np.abs(dtheta) > thr
    alpha = np.where(ok, gp / np.where(ok, dtheta, 1.0), 0.0)
    return _finish(fam, grid, s, tau[..., None, :], dtheta[..., None, None], alpha[..., None], tol, thr, False)


def _jump_ratio(amb: np.ndarray) -> float:
    """Largest first difference relative to the differences two steps away.

    Looking two steps out keeps a jump that lands on a sample (and so is
    split over two consecutive differences) visible.
    """
    worst = 0.0
    scale = 1e-9 * (1.0 + float(np.max(np.abs(amb))))
    for axis in range(amb.ndim - 1):
        d = np.linalg.norm(np.diff(amb, axis=axis), axis=-1)
        k = d.shape[axis]
        if k < 5:
            continue
        mid = np.take(d, range(2, k - 2), axis=axis)
        left = np.take(d, range(0, k - 4), axis=axis)
        right = np.take(d, range(4, k), axis=axis)
        ratio = (mid - scale) / (np.maximum(left, right) + scale)
        worst = max(worst, float(np.max(ratio)))
    return worst


JUMP_LIMIT = 50.0
MISMATCH_LIMIT = 0.5


def _report(fam: HyperplaneFamily, grid: SampleGrid, cf: CreatorField, check_continuity: bool, mismatch: float = 0.0) -> CreativityReport:
    excess = cf.residual / cf.tolerance
    worst = np.unravel_index(int(np.argmax(excess)), excess.shape)
    worst = tuple(int(i) for i in worst)
    failed = bool(np.any(cf.residual > cf.tolerance))
    jump = _jump_ratio(cf.ambient)
    if check_continuity and (jump > JUMP_LIMIT or mismatch > MISMATCH_LIMIT):
        failed = True
    sing = [tuple(int(i) for i in ix) for ix in np.argwhere(cf.singular)]
    report = CreativityReport(
        verdict=Verdict.NOT_CREATIVE if failed else Verdict.CREATIVE,
        worst_residual=float(cf.residual[worst]),
        worst_index=worst,
        worst_point=grid.point(worst),
        singular_indices=sing,
        regular_fraction=float(1.0 - np.mean(cf.singular)),
        kernel_dims=[int(cf.kernel_dim[ix]) for ix in sing],
        treated_count=int(np.sum(cf.treated)),
        max_jump_ratio=jump,
        limit_mismatch=mismatch,
    )
    if not failed:
        uniq, boxes = uniqueness_verdict(fam, cf)
        report.uniqueness = uniq
        report.flagged_boxes = boxes
        if uniq is Uniqueness.NON_UNIQUE:
            report.verdict = Verdict.NON_UNIQUE
    return report


def uniqueness_verdict(fam: HyperplaneFamily, creator: CreatorField) -> tuple[Uniqueness, list[list[tuple[float, float]]]]:
    """Density proxy: NonUnique iff nu is singular on a full 3 x ... x 3 block.

    Returns the verdict and the parameter boxes of the offending components.
    """
    sing = creator.singular
    block = np.ones((3,) * sing.ndim, dtype=bool)
    core = ndimage.binary_erosion(sing, structure=block, border_value=0)
    if not np.any(core):
        return Uniqueness.UNIQUE, []
    labels, _ = ndimage.label(sing, structure=block)
    boxes = []
    grid = creator.grid
    for lab in np.unique(labels[core]):
        sl = ndimage.find_objects((labels == lab).astype(int))[0]
        boxes.append([(float(ax[s.start]), float(ax[s.stop - 1])) for ax, s in zip(grid.axes, sl)])
    return Uniqueness.NON_UNIQUE, boxes


@dataclass
class KernelBasis:
    base: np.ndarray
    frame: np.ndarray  # (n, n+1)
    components: np.ndarray  # (k, n)

    @property
    def ambient(self) -> np.ndarray:
        return self.components @ self.frame


def creator_ambiguity(fam: HyperplaneFamily, x: Mapping[str, float], sigma_threshold: float | None = None) -> KernelBasis:
    """Directions in which omega may move at a singular sample without
    breaking the defining identity there."""
    if sigma_threshold is None:
        grid = fam.grid()
        s = fam.evaluate(grid)
        sigma_threshold = _sigma_threshold(_jacobian(s, frame_basis(s.nu)))
    s = fam.evaluate({p: float(x[p]) for p in fam.params})
    basis = frame_basis(s.nu)
    jac = _jacobian(s, basis)
    ker = _kernel_basis(jac, sigma_threshold)
    if ker.shape[0] == 0:
        raise FullRank(f"nu is regular at {dict(x)}; the creator is unique there")
    return KernelBasis(s.nu, basis, ker)
