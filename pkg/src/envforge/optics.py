"""Mirror-image constructions relative to an auxiliary point P, and the
Cahn-Hoffman map of a support density on the sphere."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as E
from .creative import CreatorField, solve_creator
from .dual import eval_dual
from .errors import GrazingNormal, InadmissiblePoint
from .expr import Expr
from .family import HyperplaneFamily, SampleGrid
from .sphere import frame_basis

ADMISSIBLE_TOL = 1e-9
GRAZING_TOL = 1e-9


@dataclass
class OrthotomicMap:
    P: np.ndarray
    f_P: np.ndarray  # (*S, n+1)
    nu_P: np.ndarray
    v_P: np.ndarray
    depth: np.ndarray  # (phi - P) . nu
    admissible: np.ndarray  # bool mask
    df_P: np.ndarray | None = None  # (*S, m, n+1) when the family is known
    offset: np.ndarray | None = None  # f_P - P formed without cancellation

    @property
    def inadmissible_indices(self) -> list[tuple[int, ...]]:
        return [tuple(int(i) for i in ix) for ix in np.argwhere(~self.admissible)]


def _point(P, dim: int) -> np.ndarray:
    P = np.asarray(P, dtype=float).reshape(-1)
    if P.shape[0] != dim:
        raise ValueError(f"auxiliary point needs {dim} coordinates, got {P.shape[0]}")
    return P


def orthotomic(fam: HyperplaneFamily, P, creator: CreatorField | None = None, grid: SampleGrid | None = None, strict: bool = False) -> OrthotomicMap:
    """Mirror images of P in every hyperplane of the family.

    The normal nu_P comes from v_P = (omega - P)_tangential - ((phi - P).nu) nu,
    which needs a creator; one is solved for when not supplied.
    """
    if creator is None:
        creator, _ = solve_creator(fam, grid)
    s = creator.samples
    P = _point(P, fam.n + 1)
    depth = np.sum((s.phi - P) * s.nu, axis=-1)
    admissible = np.abs(depth) > ADMISSIBLE_TOL
    if strict and not np.all(admissible):
        bad = [tuple(int(i) for i in ix) for ix in np.argwhere(~admissible)]
        raise InadmissiblePoint(f"P lies on {len(bad)} hyperplane(s) of the family", bad)
    offset = 2.0 * depth[..., None] * s.nu
    f_P = offset + P
    ddepth = np.einsum("...ij,...j->...i", s.dphi, s.nu) + np.einsum("...ij,...j->...i", s.dnu, s.phi - P)
    df_P = 2.0 * (ddepth[..., None] * s.nu[..., None, :] + depth[..., None, None] * s.dnu)
    basis = creator.basis
    rel = creator.ambient - P
    tangential = np.einsum("...i,...ij->...j", np.einsum("...ij,...j->...i", basis, rel), basis)
    v_P = tangential - depth[..., None] * s.nu
    norm = np.linalg.norm(v_P, axis=-1, keepdims=True)
    nu_P = np.where(norm > 0.0, v_P / np.where(norm > 0.0, norm, 1.0), np.nan)
    return OrthotomicMap(P, f_P, nu_P, v_P, depth, admissible, df_P, offset)


def orthotomic_of_frontal(f: np.ndarray, nu: np.ndarray, P, strict: bool = False) -> OrthotomicMap:
    """Orthotomic of a frontal (f, nu); nu_P is taken along the chord f - f_P."""
    f = np.asarray(f, dtype=float)
    nu = np.asarray(nu, dtype=float)
    P = _point(P, f.shape[-1])
    depth = np.sum((f - P) * nu, axis=-1)
    admissible = np.abs(depth) > ADMISSIBLE_TOL
    if strict and not np.all(admissible):
        bad = [tuple(int(i) for i in ix) for ix in np.argwhere(~admissible)]
        raise InadmissiblePoint(f"P lies on {len(bad)} tangent hyperplane(s)", bad)
    offset = 2.0 * depth[..., None] * nu
    f_P = offset + P
    chord = f - f_P
    norm = np.linalg.norm(chord, axis=-1, keepdims=True)
    nu_P = np.where(norm > 0.0, chord / np.where(norm > 0.0, norm, 1.0), np.nan)
    return OrthotomicMap(P, f_P, nu_P, chord, depth, admissible, offset=offset)


def anti_orthotomic(omap: OrthotomicMap, strict: bool = True) -> np.ndarray:
    """Recover the envelope from the orthotomic: intersect the normal line of
    f_P with the perpendicular bisector of the chord P f_P."""
    rel = omap.f_P - omap.P if omap.offset is None else omap.offset
    denom = 2.0 * np.sum(rel * omap.nu_P, axis=-1)
    grazing = ~(np.abs(denom) > 2.0 * GRAZING_TOL)
    if strict and np.any(grazing):
        bad = [tuple(int(i) for i in ix) for ix in np.argwhere(grazing)]
        raise GrazingNormal(f"normal line of the orthotomic is tangent to the mirror at {len(bad)} sample(s)", bad)
    lam = -np.sum(rel * rel, axis=-1) / np.where(grazing, 1.0, denom)
    out = omap.f_P + lam[..., None] * omap.nu_P
    return np.where(grazing[..., None], np.nan, out)


def pedal(fam: HyperplaneFamily, P, grid: SampleGrid | None = None, strict: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Feet of the perpendiculars from P; returns (points, admissible mask)."""
    s = fam.evaluate(grid or fam.grid())
    P = _point(P, fam.n + 1)
    depth = np.sum((s.phi - P) * s.nu, axis=-1)
    admissible = np.abs(depth) > ADMISSIBLE_TOL
    if strict and not np.all(admissible):
        bad = [tuple(int(i) for i in ix) for ix in np.argwhere(~admissible)]
        raise InadmissiblePoint(f"P lies on {len(bad)} hyperplane(s) of the family", bad)
    return depth[..., None] * s.nu + P, admissible


def random_admissible_point(fam: HyperplaneFamily, creator: CreatorField, seed: int = 0, scale: float = 3.0, min_fraction: float = 0.95, attempts: int = 1000) -> np.ndarray:
    """Draw P uniformly from a cube until it is admissible on enough samples."""
    rng = np.random.default_rng(seed)
    s = creator.samples
    for _ in range(attempts):
        P = rng.uniform(-scale, scale, fam.n + 1)
        depth = np.abs(np.sum((s.phi - P) * s.nu, axis=-1))
        if np.mean(depth > ADMISSIBLE_TOL) >= min_fraction:
            return P
    raise InadmissiblePoint(f"no admissible auxiliary point found in {attempts} draws")


# ---------------------------------------------------------------------------
# Wulff / Cahn-Hoffman


@dataclass
class WulffDensity:
    """Support density on S^n.

    ``angle`` coordinates: for n = 1 the expression is in ``theta`` and the
    sphere point is (cos theta, sin theta).  ``ambient`` coordinates: the
    expression is in x, y (and z) and is read on the sphere.
    """

    gamma: Expr
    n: int = 1
    coords: str = "angle"

    @classmethod
    def parse(cls, source: str, n: int = 1) -> "WulffDensity":
        names = ["x", "y", "z"][: n + 1]
        if n == 1:
            try:
                # t is accepted as an alias of theta
                g = E.parse(source, ["theta", "t"])
                return cls(E.substitute(g, {"t": E.Var("theta")}), 1, "angle")
            except E.UnknownIdentifier:
                pass
        return cls(E.parse(source, names), n, "ambient")

    def sphere_samples(self, count: int = 401) -> np.ndarray:
        if self.n == 1:
            theta = np.linspace(-np.pi, np.pi, count, endpoint=False)
            return np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        # Fibonacci lattice
        k = np.arange(count) + 0.5
        z = 1.0 - 2.0 * k / count
        r = np.sqrt(1.0 - z * z)
        phi = np.pi * (1.0 + 5.0 ** 0.5) * k
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def cahn_hoffman(density: WulffDensity, points: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """grad gamma(x) + gamma(x) x at each sphere sample; returns (x, image)."""
    x = density.sphere_samples() if points is None else np.asarray(points, dtype=float)
    basis = frame_basis(x)
    if density.coords == "angle":
        theta = np.arctan2(x[..., 1], x[..., 0])
        d = eval_dual(density.gamma, {"theta": theta}, ["theta"])
        value = np.broadcast_to(d.value, theta.shape)
        # d/dtheta of (cos, sin) is the frame vector, so the chart derivative is exact
        comps = np.broadcast_to(d.partials, (1,) + theta.shape)[0][..., None]
    else:
        names = ["x", "y", "z"][: x.shape[-1]]
        d = eval_dual(density.gamma, {nm: x[..., i] for i, nm in enumerate(names)}, names)
        value = np.broadcast_to(d.value, x.shape[:-1])
        grad = np.moveaxis(np.broadcast_to(d.partials, (len(names),) + x.shape[:-1]), 0, -1)
        comps = np.einsum("...ij,...j->...i", basis, grad)
    image = np.einsum("...i,...ij->...j", comps, basis) + value[..., None] * x
    return x, image


def wulff_family(density: WulffDensity, samples: int = 401) -> HyperplaneFamily:
    """The n = 1 family nu = (cos t, sin t), phi = gamma(t) nu."""
    if density.n != 1:
        raise ValueError("wulff_family is provided for n = 1")
    t = E.Var("t")
    nu = (E.cos(t), E.sin(t))
    if density.coords == "angle":
        g = E.substitute(density.gamma, {"theta": t})
    else:
        g = E.substitute(density.gamma, {"x": nu[0], "y": nu[1]})
    return HyperplaneFamily(1, ("t",), ((-np.pi, np.pi),), (g * nu[0], g * nu[1]), nu, name="wulff", samples=(samples,))
