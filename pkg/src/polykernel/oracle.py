"""Ground truth for the clipping pipeline.

Nothing here calls into :mod:`polykernel.clipping`.  The kernel is treated
as what it is by definition, the intersection of the inward half-spaces of
the faces, and is computed by enumerating every plane triple.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .clipping import KernelResult
from .errors import DegenerateGeometryError, InputError
from .geometry import Plane, Polyhedron, Tolerances
from .hull import convex_hull_3d

__all__ = [
    "HalfspaceSystem",
    "membership",
    "members",
    "brute_force_kernel",
    "enumerate_vertices",
    "monte_carlo_volume",
    "monte_carlo_stderr",
    "hausdorff_vertex_distance",
    "convexity_violation",
    "kernels_agree",
]

MAX_BRUTE_FORCE_FACES = 200
DET_TOL = 1e-12


def _outward_normals(P: Polyhedron) -> np.ndarray:
    if P.face_normals is not None:
        n = np.asarray(P.face_normals, dtype=float)
    else:
        # area vectors: half the sum of cross products around the face
        n = np.array([
            np.cross(P.verts[list(f)], np.roll(P.verts[list(f)], -1, axis=0)).sum(axis=0)
            for f in P.faces
        ])
        # no normals given: a negative total volume means inward winding
        if sum(float(P.verts[f[0]] @ a) for f, a in zip(P.faces, n)) < 0:
            n = -n
    return n / np.linalg.norm(n, axis=1)[:, None]


@dataclass(frozen=True, eq=False)
class HalfspaceSystem:
    """Inward half-spaces ``normals @ x >= offsets``, one row per face."""

    normals: np.ndarray
    offsets: np.ndarray

    @classmethod
    def from_polyhedron(cls, P: Polyhedron, normals=None) -> "HalfspaceSystem":
        if normals is not None:
            P = Polyhedron(P.verts, P.faces, normals)
        inward = -_outward_normals(P)
        anchors = np.array([P.verts[list(f)].mean(axis=0) for f in P.faces])
        return cls(inward, np.einsum("ij,ij->i", inward, anchors))

    @classmethod
    def from_planes(cls, planes) -> "HalfspaceSystem":
        planes = list(planes)
        n = np.array([p.n for p in planes]).reshape(-1, 3)
        return cls(n, np.array([p.offset for p in planes]))

    @classmethod
    def box(cls, lo, hi) -> "HalfspaceSystem":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        eye = np.eye(3)
        return cls(np.vstack([eye, -eye]), np.concatenate([lo, -hi]))

    @property
    def planes(self) -> list:
        return [Plane(n * off, n) for n, off in zip(self.normals, self.offsets)]

    def __len__(self):
        return len(self.offsets)

    def __add__(self, other: "HalfspaceSystem") -> "HalfspaceSystem":
        return HalfspaceSystem(np.vstack([self.normals, other.normals]),
                               np.concatenate([self.offsets, other.offsets]))

    def without(self, k: int) -> "HalfspaceSystem":
        keep = np.arange(len(self)) != k
        return HalfspaceSystem(self.normals[keep], self.offsets[keep])

    def distances(self, X) -> np.ndarray:
        """Signed distances, shape ``(len(X), len(self))``."""
        X = np.asarray(X, dtype=float).reshape(-1, 3)
        return X @ self.normals.T - self.offsets


def members(X, H: HalfspaceSystem, tol: Tolerances) -> np.ndarray:
    if len(H) == 0:
        return np.ones(len(np.asarray(X).reshape(-1, 3)), dtype=bool)
    return np.all(H.distances(X) >= -tol.eps_classify, axis=1)


def membership(x, H: HalfspaceSystem, tol: Tolerances) -> bool:
    """Whether ``x`` lies in every half-space, up to the dead band."""
    return bool(members(x, H, tol)[0])


@lru_cache(maxsize=64)
def _triples(m: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(m), 3)), dtype=np.intp).reshape(-1, 3)


def _dedup(points: np.ndarray, radius: float) -> np.ndarray:
    kept: list = []
    r2 = radius * radius
    for p in points:
        if kept:
            k = np.asarray(kept)
            if np.min(np.sum((k - p) ** 2, axis=1)) <= r2:
                continue
        kept.append(p)
    return np.asarray(kept).reshape(-1, 3)


def enumerate_vertices(H: HalfspaceSystem, tol: Tolerances, chunk: int = 200_000) -> np.ndarray:
    """All points where three planes of ``H`` meet and every half-space holds.

    Near-parallel triples (|det| < 1e-12 for unit normals) are skipped;
    survivors closer than ``eps_merge`` are merged.
    """
    trip = _triples(len(H))
    found = []
    for start in range(0, len(trip), chunk):
        t = trip[start:start + chunk]
        A = H.normals[t]
        b = H.offsets[t]
        ok = np.abs(np.linalg.det(A)) > DET_TOL
        if not ok.any():
            continue
        X = np.linalg.solve(A[ok], b[ok][..., None])[..., 0]
        X = X[members(X, H, tol)]
        if len(X):
            found.append(X)
    if not found:
        return np.empty((0, 3))
    X = np.vstack(found)
    # stable canonical order before merging keeps the result reproducible
    X = X[np.lexsort((X[:, 2], X[:, 1], X[:, 0]))]
    return _dedup(X, tol.eps_merge)


def brute_force_kernel(P: Polyhedron, normals=None, tol: Tolerances | None = None,
                       max_faces: int = MAX_BRUTE_FORCE_FACES) -> KernelResult:
    """Kernel by vertex enumeration over the face planes plus the bounding box."""
    if len(P.faces) > max_faces:
        raise InputError(f"brute force limited to {max_faces} faces, got {len(P.faces)}")
    if tol is None:
        tol = Tolerances.for_polyhedron(P)
    lo, hi = P.verts.min(axis=0), P.verts.max(axis=0)
    H = HalfspaceSystem.from_polyhedron(P, normals) + HalfspaceSystem.box(lo, hi)
    pts = enumerate_vertices(H, tol)
    if len(pts) < 4:
        return KernelResult(None, True, 0.0, 0, 0, tol)
    try:
        hull = convex_hull_3d(pts)
    except DegenerateGeometryError:
        return KernelResult(None, True, 0.0, 0, 0, tol)
    tri = np.asarray(hull.faces)
    a, b, c = (hull.verts[tri[:, k]] for k in range(3))
    volume = float(np.einsum("ij,ij->", a, np.cross(b, c))) / 6.0
    if volume <= tol.eps_vol:
        return KernelResult(None, True, 0.0, 0, 0, tol)
    return KernelResult(hull, False, volume, 0, 0, tol)


def monte_carlo_volume(H: HalfspaceSystem, box, n_samples: int, seed: int,
                       tol: Tolerances | None = None, chunk: int = 1 << 16) -> float:
    """Box volume times the fraction of uniform samples inside ``H``.

    Chunk ``k`` draws from its own generator seeded by ``(seed, k)``, so the
    estimate does not depend on the order chunks are evaluated in.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    span = hi - lo
    if tol is None:
        tol = Tolerances.for_diagonal(float(np.linalg.norm(span)))
    hits = 0
    for k, start in enumerate(range(0, n_samples, chunk)):
        m = min(chunk, n_samples - start)
        rng = np.random.default_rng([seed, k])
        X = lo + span * rng.random((m, 3))
        hits += int(members(X, H, tol).sum())
    return float(np.prod(span)) * hits / n_samples


def monte_carlo_stderr(volume: float, box_volume: float, n_samples: int) -> float:
    p = min(max(volume / box_volume, 0.0), 1.0)
    return box_volume * float(np.sqrt(p * (1 - p) / n_samples))


def hausdorff_vertex_distance(A, B) -> float:
    """Symmetric Hausdorff distance between two finite point sets."""
    A = np.asarray(A, dtype=float).reshape(-1, 3)
    B = np.asarray(B, dtype=float).reshape(-1, 3)
    if len(A) == 0 or len(B) == 0:
        raise ValueError("Hausdorff distance of an empty point set")
    D = np.sqrt(((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=2))
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def convexity_violation(P: Polyhedron) -> float:
    """Largest distance by which a vertex sits outside some face's inward half-space.

    Zero (up to rounding) for a convex polyhedron.
    """
    H = HalfspaceSystem.from_polyhedron(P)
    return float(max(0.0, -H.distances(P.verts).min()))


def kernels_agree(a: KernelResult, b: KernelResult, diagonal: float,
                  rel_tol: float = 1e-7) -> tuple[bool, float]:
    """Same emptiness and vertex sets within ``rel_tol * diagonal``."""
    if a.is_empty or b.is_empty:
        return a.is_empty == b.is_empty, 0.0
    h = hausdorff_vertex_distance(a.kernel.verts, b.kernel.verts)
    return h < rel_tol * diagonal, h
