"""Geometric primitives: planes, polyhedra, tolerance-aware classification.

Points are plain numpy arrays of shape ``(3,)``; vertex pools are ``(n, 3)``
float arrays.  Everything here is an immutable value once constructed.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateGeometryError, InvalidPolyhedronError, NonManifoldError

__all__ = [
    "Plane",
    "Polyhedron",
    "Side",
    "Classification",
    "Tolerances",
    "signed_distance",
    "classify",
    "classify_points",
    "compute_aabb",
    "aabb_bounds",
    "newell_normal",
    "newell_normals",
    "polyhedron_volume",
    "face_plane",
    "check_closed",
    "orient_polyhedron",
]

UNIT_TOL = 1e-12


def _as_point(x) -> np.ndarray:
    p = np.array(x, dtype=float).reshape(3)
    if not np.all(np.isfinite(p)):
        raise ValueError(f"non-finite coordinate in {p!r}")
    return p


@dataclass(frozen=True, eq=False)
class Plane:
    """Oriented plane through ``s`` with unit normal ``n``.

    Also read as the half-space on the side ``n`` points into.
    """

    s: np.ndarray
    n: np.ndarray

    def __post_init__(self):
        s = _as_point(self.s)
        n = _as_point(self.n)
        if abs(float(n @ n) - 1.0) > 2 * UNIT_TOL:
            raise ValueError(f"plane normal is not unit: |n| = {np.linalg.norm(n)!r}")
        s.flags.writeable = False
        n.flags.writeable = False
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "n", n)

    @classmethod
    def from_normal(cls, s, n) -> "Plane":
        """Build a plane, normalizing ``n`` first."""
        n = _as_point(n)
        norm = np.linalg.norm(n)
        if norm == 0.0:
            raise DegenerateGeometryError("zero plane normal")
        return cls(s, n / norm)

    @property
    def offset(self) -> float:
        return float(self.n @ self.s)

    def flipped(self) -> "Plane":
        return Plane(self.s, -self.n)

    def translated(self, t) -> "Plane":
        return Plane(self.s + _as_point(t), self.n)

    def __repr__(self):
        return f"Plane(s={self.s.tolist()}, n={self.n.tolist()})"


@dataclass(frozen=True, eq=False)
class Polyhedron:
    """Vertex pool, faces as CCW index tuples (seen from outside), optional
    outward unit face normals."""

    verts: np.ndarray
    faces: tuple
    face_normals: np.ndarray | None = None

    def __post_init__(self):
        verts = np.array(self.verts, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(verts)):
            raise InvalidPolyhedronError("non-finite vertex coordinate")
        nv = len(verts)
        faces = tuple(tuple(int(i) for i in f) for f in self.faces)
        for k, f in enumerate(faces):
            if len(f) < 3:
                raise InvalidPolyhedronError(f"face {k} has fewer than 3 vertices")
            if len(set(f)) != len(f):
                raise InvalidPolyhedronError(f"face {k} repeats a vertex index: {f}")
            if min(f) < 0 or max(f) >= nv:
                raise InvalidPolyhedronError(f"face {k} has an index outside [0, {nv})")
        normals = self.face_normals
        if normals is not None:
            normals = np.array(normals, dtype=float).reshape(-1, 3)
            if len(normals) != len(faces):
                raise InvalidPolyhedronError(
                    f"{len(normals)} face normals for {len(faces)} faces")
            lengths = np.linalg.norm(normals, axis=1)
            if np.any(lengths == 0.0) or not np.all(np.isfinite(lengths)):
                raise InvalidPolyhedronError("zero or non-finite face normal")
            normals = normals / lengths[:, None]
            normals.flags.writeable = False
        verts.flags.writeable = False
        object.__setattr__(self, "verts", verts)
        object.__setattr__(self, "faces", faces)
        object.__setattr__(self, "face_normals", normals)

    @classmethod
    def _trusted(cls, verts: np.ndarray, faces: tuple, face_normals=None) -> "Polyhedron":
        # Skips validation; callers guarantee the invariants.
        obj = cls.__new__(cls)
        verts.flags.writeable = False
        if face_normals is not None:
            face_normals.flags.writeable = False
        object.__setattr__(obj, "verts", verts)
        object.__setattr__(obj, "faces", faces)
        object.__setattr__(obj, "face_normals", face_normals)
        return obj

    @classmethod
    def empty(cls) -> "Polyhedron":
        return cls._trusted(np.empty((0, 3)), (), np.empty((0, 3)))

    @property
    def n_verts(self) -> int:
        return len(self.verts)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def is_empty(self) -> bool:
        return len(self.verts) == 0

    def face_points(self, f: int) -> np.ndarray:
        return self.verts[list(self.faces[f])]

    def normals(self) -> np.ndarray:
        """Stored face normals, or Newell normals of the faces as wound."""
        if self.face_normals is not None:
            return self.face_normals
        return newell_normals(self.verts, self.faces)

    def with_normals(self, normals) -> "Polyhedron":
        return Polyhedron(self.verts, self.faces, normals)

    def __repr__(self):
        return f"Polyhedron(n_verts={self.n_verts}, n_faces={self.n_faces})"


class Side(enum.IntEnum):
    BELOW = -1
    ON = 0
    ABOVE = 1


class Classification(NamedTuple):
    side: Side
    distance: float

    @property
    def weakly_above(self) -> bool:
        return self.side >= 0

    @property
    def weakly_below(self) -> bool:
        return self.side <= 0


@dataclass(frozen=True)
class Tolerances:
    """Signed-distance dead band and vertex merge radius, in model units."""

    eps_classify: float
    eps_merge: float

    def __post_init__(self):
        if not (self.eps_classify > 0 and self.eps_merge > 0):
            raise ValueError("tolerances must be positive")

    @property
    def eps_vol(self) -> float:
        return self.eps_classify ** 3

    @classmethod
    def for_diagonal(cls, diagonal: float, scale: float = 1.0) -> "Tolerances":
        if not diagonal > 0:
            raise DegenerateGeometryError("bounding box has zero diagonal")
        eps = 1e-9 * diagonal * scale
        return cls(eps, 10.0 * eps)

    @classmethod
    def for_polyhedron(cls, P: Polyhedron, scale: float = 1.0) -> "Tolerances":
        lo, hi = aabb_bounds(P)
        return cls.for_diagonal(float(np.linalg.norm(hi - lo)), scale)


def signed_distance(x, p: Plane) -> float:
    """``n . (x - s)``: positive on the side the normal points to."""
    return float(p.n @ (np.asarray(x, dtype=float) - p.s))


def classify(x, p: Plane, tol: Tolerances) -> Classification:
    d = signed_distance(x, p)
    if d > tol.eps_classify:
        return Classification(Side.ABOVE, d)
    if d < -tol.eps_classify:
        return Classification(Side.BELOW, d)
    return Classification(Side.ON, d)


def classify_points(verts: np.ndarray, p: Plane, tol: Tolerances):
    """Vectorized :func:`classify`; returns ``(distances, sides)`` arrays."""
    d = (verts - p.s) @ p.n
    eps = tol.eps_classify
    sides = (d > eps).astype(np.int8) - (d < -eps).astype(np.int8)
    return d, sides


def aabb_bounds(P) -> tuple[np.ndarray, np.ndarray]:
    verts = P.verts if isinstance(P, Polyhedron) else np.asarray(P, dtype=float).reshape(-1, 3)
    if len(verts) == 0:
        raise InvalidPolyhedronError("cannot bound an empty vertex pool")
    return verts.min(axis=0), verts.max(axis=0)


# corner k has coordinates (bit0 -> x, bit1 -> y, bit2 -> z)
_BOX_FACES = (
    (0, 2, 3, 1),  # z = lo
    (4, 5, 7, 6),  # z = hi
    (0, 1, 5, 4),  # y = lo
    (2, 6, 7, 3),  # y = hi
    (0, 4, 6, 2),  # x = lo
    (1, 3, 7, 5),  # x = hi
)
_BOX_NORMALS = np.array([
    [0, 0, -1], [0, 0, 1], [0, -1, 0], [0, 1, 0], [-1, 0, 0], [1, 0, 0],
], dtype=float)


def box_polyhedron(lo, hi) -> Polyhedron:
    lo = _as_point(lo)
    hi = _as_point(hi)
    corners = np.array([
        [hi[0] if k & 1 else lo[0], hi[1] if k & 2 else lo[1], hi[2] if k & 4 else lo[2]]
        for k in range(8)
    ])
    return Polyhedron._trusted(corners, _BOX_FACES, _BOX_NORMALS.copy())


def compute_aabb(P) -> Polyhedron:
    """Axis-aligned bounding box of ``P`` as an 8-vertex, 6-quad polyhedron."""
    lo, hi = aabb_bounds(P)
    return box_polyhedron(lo, hi)


def newell_normal(verts) -> np.ndarray:
    """Unit normal of a polygon by Newell's method (CCW -> toward viewer)."""
    pts = np.asarray(verts, dtype=float).reshape(-1, 3)
    if len(pts) < 3:
        raise DegenerateGeometryError("need at least 3 points for a normal")
    nxt = np.roll(pts, -1, axis=0)
    raw = np.array([
        np.sum((pts[:, 1] - nxt[:, 1]) * (pts[:, 2] + nxt[:, 2])),
        np.sum((pts[:, 2] - nxt[:, 2]) * (pts[:, 0] + nxt[:, 0])),
        np.sum((pts[:, 0] - nxt[:, 0]) * (pts[:, 1] + nxt[:, 1])),
    ])
    norm = np.linalg.norm(raw)
    extent = np.ptp(pts, axis=0).max()
    if norm <= 1e-12 * extent * extent or norm == 0.0:
        raise DegenerateGeometryError("degenerate polygon: Newell normal vanishes")
    return raw / norm


def newell_normals(verts: np.ndarray, faces: Sequence[Sequence[int]]) -> np.ndarray:
    return np.array([newell_normal(verts[list(f)]) for f in faces]).reshape(-1, 3)


def _fan_triangles(faces) -> np.ndarray:
    tris = [(f[0], f[k], f[k + 1]) for f in faces for k in range(1, len(f) - 1)]
    return np.array(tris, dtype=np.intp).reshape(-1, 3)


def polyhedron_volume(P: Polyhedron) -> float:
    """Signed volume by the divergence theorem over fan-triangulated faces."""
    if not P.faces:
        return 0.0
    tri = _fan_triangles(P.faces)
    # relative to one vertex, so far-from-origin models keep their precision
    V = P.verts - P.verts[tri[0, 0]]
    a, b, c = V[tri[:, 0]], V[tri[:, 1]], V[tri[:, 2]]
    cx = b[:, 1] * c[:, 2] - b[:, 2] * c[:, 1]
    cy = b[:, 2] * c[:, 0] - b[:, 0] * c[:, 2]
    cz = b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0]
    return float(np.sum(a[:, 0] * cx + a[:, 1] * cy + a[:, 2] * cz)) / 6.0


def face_plane(P: Polyhedron, f: int) -> Plane:
    """Plane of face ``f`` through its first vertex, normal pointing inward."""
    face = P.faces[f]
    if P.face_normals is not None:
        outward = P.face_normals[f]
    else:
        outward = newell_normal(P.verts[list(face)])
    return Plane.from_normal(P.verts[face[0]], -outward)


def edge_counts(faces) -> dict:
    counts: dict = {}
    for f in faces:
        k = len(f)
        for i in range(k):
            a, b = f[i], f[(i + 1) % k]
            key = (a, b) if a < b else (b, a)
            counts[key] = counts.get(key, 0) + 1
    return counts


def check_closed(P: Polyhedron, directed: bool = False) -> None:
    """Raise :class:`NonManifoldError` unless every edge lies in exactly two faces.

    With ``directed`` the two faces must also traverse it in opposite
    directions (coherent winding).
    """
    if directed:
        seen: set = set()
        for fi, f in enumerate(P.faces):
            k = len(f)
            for i in range(k):
                e = (f[i], f[(i + 1) % k])
                if e in seen:
                    raise NonManifoldError(f"directed edge {e} repeated (face {fi})")
                seen.add(e)
        for a, b in seen:
            if (b, a) not in seen:
                raise NonManifoldError(f"edge {(a, b)} has no opposite half-edge")
        return
    for edge, c in edge_counts(P.faces).items():
        if c != 2:
            raise NonManifoldError(f"edge {edge} is shared by {c} face(s)")


def orient_polyhedron(P: Polyhedron) -> Polyhedron:
    """Attach outward normals.

    Given normals are trusted.  Otherwise Newell normals are computed from
    the winding and every face is flipped if the total volume is negative.
    """
    if P.face_normals is not None:
        return P
    normals = newell_normals(P.verts, P.faces)
    if polyhedron_volume(P) < 0.0:
        faces = tuple(tuple(reversed(f)) for f in P.faces)
        return Polyhedron._trusted(P.verts, faces, -normals)
    return Polyhedron._trusted(P.verts, P.faces, normals)
