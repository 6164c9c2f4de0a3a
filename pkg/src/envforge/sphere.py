"""Geometry kernel for S^n in R^(n+1), n in {1, 2}.

The array functions (:func:`frame_basis`, :func:`transport`, ...) accept
leading batch dimensions; the small dataclasses wrap single points for the
object-level API.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AntipodalError

ANTIPODAL_CUTOFF = 1e-9


def normalize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def frame_basis(base: np.ndarray) -> np.ndarray:
    """Orthonormal tangent basis at each unit vector in ``base``.

    Returns shape ``base.shape[:-1] + (n, n + 1)``.  For n = 1 the single
    basis vector is ``base`` rotated by +pi/2.  For n = 2 the two standard
    axes least aligned with ``base`` (ties to the lower index) are
    Gram-Schmidt orthonormalized in index order.
    """
    b = np.asarray(base, dtype=float)
    dim = b.shape[-1]
    if dim == 2:
        return np.stack([-b[..., 1], b[..., 0]], axis=-1)[..., None, :]
    if dim != 3:
        raise ValueError(f"only S^1 and S^2 are supported, got ambient dimension {dim}")
    order = np.argsort(np.abs(b), axis=-1, kind="stable")
    keep = np.sort(order[..., :2], axis=-1)
    eye = np.eye(3)
    a1 = eye[keep[..., 0]]
    a2 = eye[keep[..., 1]]
    u1 = a1 - np.sum(a1 * b, axis=-1, keepdims=True) * b
    u1 = u1 / np.linalg.norm(u1, axis=-1, keepdims=True)
    u2 = a2 - np.sum(a2 * b, axis=-1, keepdims=True) * b - np.sum(a2 * u1, axis=-1, keepdims=True) * u1
    u2 = u2 / np.linalg.norm(u2, axis=-1, keepdims=True)
    return np.stack([u1, u2], axis=-2)


def rotation_between(x0: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Rotation matrix of R^(n+1) in span{x0, x} carrying x0 to x.

    Identity on the orthogonal complement of the plane.  Batched.
    """
    x0 = np.asarray(x0, dtype=float)
    x = np.asarray(x, dtype=float)
    c = np.sum(x0 * x, axis=-1)
    if np.any(c <= -1.0 + ANTIPODAL_CUTOFF):
        raise AntipodalError("Levi-Civita translation undefined between antipodal points")
    s = x0 + x
    dim = x.shape[-1]
    eye = np.broadcast_to(np.eye(dim), x.shape + (dim,))
    # R v = v - (s.v)/(1+c) s + 2 (x0.v) x
    return eye - s[..., :, None] * s[..., None, :] / (1.0 + c)[..., None, None] + 2.0 * x[..., :, None] * x0[..., None, :]


def transport(v: np.ndarray, x0: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Levi-Civita translation of ambient tangent vector(s) ``v`` at x0 to x."""
    v = np.asarray(v, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    x = np.asarray(x, dtype=float)
    c = np.sum(x0 * x, axis=-1, keepdims=True)
    if np.any(c <= -1.0 + ANTIPODAL_CUTOFF):
        raise AntipodalError("Levi-Civita translation undefined between antipodal points")
    s = x0 + x
    return v - np.sum(s * v, axis=-1, keepdims=True) / (1.0 + c) * s + 2.0 * np.sum(x0 * v, axis=-1, keepdims=True) * x


def exp_point(x0: np.ndarray, v: np.ndarray) -> np.ndarray:
    """cos|v| x0 + sin|v| v/|v| (x0 itself for v = 0)."""
    x0 = np.asarray(x0, dtype=float)
    v = np.asarray(v, dtype=float)
    r = np.linalg.norm(v, axis=-1, keepdims=True)
    safe = np.where(r == 0.0, 1.0, r)
    return np.cos(r) * x0 + np.where(r == 0.0, 0.0, np.sin(r) / safe) * v


def log_point(x0: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Inverse of :func:`exp_point` on the open geodesic ball of radius pi."""
    x0 = np.asarray(x0, dtype=float)
    x = np.asarray(x, dtype=float)
    c = np.sum(x0 * x, axis=-1, keepdims=True)
    if np.any(c <= -1.0 + ANTIPODAL_CUTOFF):
        raise AntipodalError("logarithm undefined at the antipode")
    w = x - c * x0
    s = np.linalg.norm(w, axis=-1, keepdims=True)
    theta = np.arctan2(s, c)
    safe = np.where(s == 0.0, 1.0, s)
    return np.where(s == 0.0, 0.0, theta / safe) * w


# ---------------------------------------------------------------------------
# object-level API


@dataclass(frozen=True, eq=False)
class UnitVector:
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        norm = np.linalg.norm(c)
        if norm == 0.0:
            raise ValueError("zero vector has no direction")
        object.__setattr__(self, "coords", c / norm)

    @property
    def n(self) -> int:
        return self.coords.shape[0] - 1


@dataclass(frozen=True, eq=False)
class TangentFrame:
    base: UnitVector
    basis: np.ndarray  # (n, n+1)

    def components(self, ambient: np.ndarray) -> np.ndarray:
        return self.basis @ np.asarray(ambient, dtype=float)

    def ambient(self, components: np.ndarray) -> np.ndarray:
        return np.asarray(components, dtype=float) @ self.basis


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A tangent (equivalently cotangent) vector expressed in a frame."""

    frame: TangentFrame
    components: np.ndarray

    @property
    def ambient(self) -> np.ndarray:
        return self.frame.ambient(self.components)

    @classmethod
    def from_ambient(cls, frame: TangentFrame, v: np.ndarray) -> "TangentVector":
        return cls(frame, frame.components(v))


CotangentVector = TangentVector


def make_frame(base: UnitVector | np.ndarray) -> TangentFrame:
    if not isinstance(base, UnitVector):
        base = UnitVector(base)
    return TangentFrame(base, frame_basis(base.coords))


def levi_civita_translate(v: TangentVector, x: UnitVector | np.ndarray) -> TangentVector:
    """Parallel-transport ``v`` to the tangent space at ``x``.

    The result is expressed in the canonical frame at ``x``.
    """
    if not isinstance(x, UnitVector):
        x = UnitVector(x)
    moved = transport(v.ambient, v.frame.base.coords, x.coords)
    return TangentVector.from_ambient(make_frame(x), moved)


def exp_map(x0: UnitVector | np.ndarray, v: TangentVector | np.ndarray) -> UnitVector:
    if not isinstance(x0, UnitVector):
        x0 = UnitVector(x0)
    amb = v.ambient if isinstance(v, TangentVector) else np.asarray(v, dtype=float)
    return UnitVector(exp_point(x0.coords, amb))


def log_map(x0: UnitVector | np.ndarray, x: UnitVector | np.ndarray) -> TangentVector:
    """Tangent vector at x0 pointing to x; components are normal coordinates."""
    if not isinstance(x0, UnitVector):
        x0 = UnitVector(x0)
    if not isinstance(x, UnitVector):
        x = UnitVector(x)
    frame = make_frame(x0)
    return TangentVector.from_ambient(frame, log_point(x0.coords, x.coords))


def normal_coordinates(x0: UnitVector | np.ndarray, x: np.ndarray) -> np.ndarray:
    """Theta coordinates of point(s) ``x`` in the normal chart centred at x0."""
    if not isinstance(x0, UnitVector):
        x0 = UnitVector(x0)
    basis = frame_basis(x0.coords)
    return log_point(x0.coords, x) @ basis.T
