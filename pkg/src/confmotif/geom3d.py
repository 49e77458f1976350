"""Rigid-body geometry: Kabsch superposition, RMSD, dihedrals, bond rotation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import GeometryError

_COLLINEAR_TOL = 1e-8


@dataclass(frozen=True)
class RigidTransform:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self) -> None:
        rot = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        trans = np.asarray(self.translation, dtype=float).reshape(3)
        if not np.allclose(rot.T @ rot, np.eye(3), atol=1e-9) or abs(np.linalg.det(rot) - 1.0) > 1e-9:
            raise GeometryError("rotation is not a proper orthonormal matrix")
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", trans)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """x -> R x + t for each row."""
        return np.asarray(points, dtype=float) @ self.rotation.T + self.translation

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """Transform equal to applying ``other`` first, then ``self``."""
        return RigidTransform(self.rotation @ other.rotation, self.rotation @ other.translation + self.translation)


def _as_points(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise GeometryError(f"expected an (n, 3) point array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GeometryError("non-finite coordinates")
    return arr


def _optimal_rotation(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Proper rotation minimising |R p_i - q_i| for centred point sets."""
    h = p.T @ q
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    if d == 0:
        d = 1.0
    return vt.T @ np.diag([1.0, 1.0, d]) @ u.T


def kabsch(p, q) -> tuple[RigidTransform, float]:
    """Best proper rigid transform mapping ``p`` onto ``q`` and the resulting RMSD."""
    p, q = _as_points(p), _as_points(q)
    if p.shape != q.shape:
        raise GeometryError(f"point set size mismatch: {len(p)} vs {len(q)}")
    if len(p) < 3:
        raise GeometryError("kabsch needs at least 3 point pairs")
    pc, qc = p.mean(axis=0), q.mean(axis=0)
    for pts, label in ((p - pc, "P"), (q - qc, "Q")):
        sv = np.linalg.svd(pts, compute_uv=False)
        if sv[1] <= _COLLINEAR_TOL * max(sv[0], 1.0):
            raise GeometryError(f"degenerate input: points of {label} are collinear")
    rot = _optimal_rotation(p - pc, q - qc)
    transform = RigidTransform(rot, qc - rot @ pc)
    diff = transform.apply(p) - q
    return transform, float(np.sqrt((diff * diff).sum() / len(p)))


def superpose(p, q) -> np.ndarray:
    """Return ``p`` optimally superposed onto ``q`` (any size >= 1, degenerate sets allowed)."""
    p, q = _as_points(p), _as_points(q)
    pc, qc = p.mean(axis=0), q.mean(axis=0)
    if len(p) < 2:
        return p - pc + qc
    rot = _optimal_rotation(p - pc, q - qc)
    return (p - pc) @ rot.T + qc


_superpose = superpose


def rmsd(p, q, superpose: bool = False) -> float:
    p, q = _as_points(p), _as_points(q)
    if p.shape != q.shape:
        raise GeometryError(f"point set size mismatch: {len(p)} vs {len(q)}")
    if len(p) == 0:
        raise GeometryError("rmsd of empty point sets")
    if superpose:
        p = _superpose(p, q)
    diff = p - q
    return float(np.sqrt((diff * diff).sum() / len(p)))


def batch_superposed_rmsd(ps: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Superposed RMSD of each conformer in ``ps`` (k, n, 3) against ``q`` (n, 3)."""
    ps = np.asarray(ps, dtype=float)
    q = np.asarray(q, dtype=float)
    pc = ps - ps.mean(axis=1, keepdims=True)
    qc = q - q.mean(axis=0)
    h = np.einsum("kni,nj->kij", pc, qc)
    u, s, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(u @ vt))
    # E = |P|^2 + |Q|^2 - 2 (s1 + s2 + d s3)
    e = (pc * pc).sum(axis=(1, 2)) + (qc * qc).sum() - 2.0 * (s[:, 0] + s[:, 1] + d * s[:, 2])
    return np.sqrt(np.maximum(e, 0.0) / q.shape[0])


def dihedral(p1, p2, p3, p4) -> float:
    """Signed torsion p1-p2-p3-p4 in radians, in (-pi, pi]."""
    p1, p2, p3, p4 = (np.asarray(p, dtype=float) for p in (p1, p2, p3, p4))
    b0, b1, b2 = p1 - p2, p3 - p2, p4 - p3
    axis_len = np.linalg.norm(b1)
    if axis_len < 1e-10:
        raise GeometryError("dihedral axis atoms coincide")
    b1n = b1 / axis_len
    v = b0 - np.dot(b0, b1n) * b1n
    w = b2 - np.dot(b2, b1n) * b1n
    if np.linalg.norm(v) < 1e-8 or np.linalg.norm(w) < 1e-8:
        raise GeometryError("dihedral flank is collinear with the axis")
    x = np.dot(v, w)
    y = np.dot(np.cross(b1n, v), w)
    angle = float(np.arctan2(y, x))
    return np.pi if angle <= -np.pi else angle


def wrap_angle(theta: float) -> float:
    """Map an angle into (-pi, pi]."""
    wrapped = float(np.mod(theta + np.pi, 2.0 * np.pi) - np.pi)
    return np.pi if wrapped <= -np.pi else wrapped


def rotation_about_axis(axis: np.ndarray, angle: float) -> np.ndarray:
    """Right-handed rotation matrix (Rodrigues) about a unit ``axis``."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    x, y, z = axis
    k = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def rotate_about_bond(coords, moving: Iterable[int], axis: tuple[int, int], angle: float) -> np.ndarray:
    """Rotate the ``moving`` atoms about the line a -> b by ``angle``.

    With ``moving`` on the ``b`` side the dihedral (x, a, b, y) with y moving
    increases by ``angle``.
    """
    coords = _as_points(coords)
    a, b = axis
    if a == b:
        raise GeometryError("rotation axis endpoints are the same atom")
    moving = np.fromiter(moving, dtype=int)
    if a in moving or b in moving:
        raise GeometryError("axis atoms cannot be in the moving set")
    out = coords.copy()
    if len(moving) == 0 or angle == 0.0:
        return out
    direction = coords[b] - coords[a]
    if np.linalg.norm(direction) < 1e-10:
        raise GeometryError("rotation axis atoms coincide")
    rot = rotation_about_axis(direction, angle)
    out[moving] = (coords[moving] - coords[b]) @ rot.T + coords[b]
    return out


def perpendicular_distance(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance of each point from the infinite line through a and b."""
    direction = (b - a) / np.linalg.norm(b - a)
    rel = np.atleast_2d(points) - a
    proj = rel @ direction
    return np.linalg.norm(rel - np.outer(proj, direction), axis=1)


def rotation_between(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Minimal proper rotation taking direction ``u`` onto direction ``v``."""
    u = np.asarray(u, dtype=float) / np.linalg.norm(u)
    v = np.asarray(v, dtype=float) / np.linalg.norm(v)
    c = float(np.dot(u, v))
    axis = np.cross(u, v)
    s = np.linalg.norm(axis)
    if s < 1e-12:
        if c > 0:
            return np.eye(3)
        # antiparallel: half turn about any perpendicular
        perp = np.cross(u, [1.0, 0.0, 0.0])
        if np.linalg.norm(perp) < 1e-6:
            perp = np.cross(u, [0.0, 1.0, 0.0])
        return rotation_about_axis(perp, np.pi)
    return rotation_about_axis(axis, float(np.arctan2(s, c)))
