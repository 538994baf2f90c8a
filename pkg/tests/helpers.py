"""Shared test utilities: small reference solids, mutations, independent oracles."""
from __future__ import annotations

import numpy as np

from polykernel.geometry import Plane, Polyhedron, newell_normal
from polykernel.generators import extrude_polygon, gen_tent, gen_tet_like, gen_voro_like
from polykernel.hull import convex_hull_3d

UNIT_CUBE_VERTS = np.array([[k & 1, (k >> 1) & 1, (k >> 2) & 1] for k in range(8)], dtype=float)
SIMPLEX = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)

COMB = [(0, 0), (5, 0), (5, 3), (4, 3), (4, 1), (3, 1), (3, 3), (2, 3), (2, 1), (1, 1), (1, 3), (0, 3)]
L_SHAPE = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]


def unit_cube() -> Polyhedron:
    from polykernel.geometry import compute_aabb
    return compute_aabb(UNIT_CUBE_VERTS)


def simplex() -> Polyhedron:
    faces = [(0, 2, 1), (0, 1, 3), (0, 3, 2), (1, 2, 3)]
    return Polyhedron(SIMPLEX, faces)


def shoelace(pts2d) -> float:
    pts = np.asarray(pts2d, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def is_convex_polygon_2d(pts2d) -> bool:
    """Every turn along the ring has the same orientation."""
    p = np.asarray(pts2d, dtype=float)
    e = np.roll(p, -1, axis=0) - p
    cross = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
    return bool(np.all(cross > 0) or np.all(cross < 0))


def random_rotation(rng) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def transform(P: Polyhedron, M: np.ndarray, t=(0.0, 0.0, 0.0)) -> Polyhedron:
    """Apply ``x -> M x + t`` (det M > 0); normals are recomputed from the winding."""
    verts = P.verts @ np.asarray(M).T + np.asarray(t, dtype=float)
    return Polyhedron(verts, P.faces, [newell_normal(verts[list(f)]) for f in P.faces])


def split_face_coplanar(P: Polyhedron, f: int) -> Polyhedron:
    """Replace face ``f`` by a fan around its centroid; the new faces share its plane."""
    face = P.faces[f]
    c = len(P.verts)
    verts = np.vstack([P.verts, P.verts[list(face)].mean(axis=0)])
    fan = [(c, face[i], face[(i + 1) % len(face)]) for i in range(len(face))]
    faces = list(P.faces[:f]) + fan + list(P.faces[f + 1:])
    normals = P.normals()
    n = normals[f]
    new_normals = np.vstack([normals[:f], np.repeat(n[None], len(fan), axis=0), normals[f + 1:]])
    return Polyhedron(verts, faces, new_normals)


def sliver_tet(height: float) -> Polyhedron:
    """Unit-base tetrahedron whose apex sits ``height`` above the base centroid."""
    base = np.array([[0, 0, 0], [1, 0, 0], [0.5, np.sqrt(3) / 2, 0]])
    apex = np.array([[0.5, np.sqrt(3) / 6, height]])
    return Polyhedron(np.vstack([base, apex]), [(0, 2, 1), (0, 1, 3), (1, 2, 3), (2, 0, 3)])


def base_model(rng) -> Polyhedron:
    kind = int(rng.integers(6))
    seed = int(rng.integers(1 << 30))
    if kind == 0:
        return gen_tet_like(int(rng.integers(5, 13)), seed)
    if kind == 1:
        return gen_voro_like(int(rng.integers(5, 10)), seed)
    if kind == 2:
        return gen_tent(float(rng.uniform(0.05, 0.95)))
    if kind == 3:
        return extrude_polygon(COMB if rng.random() < 0.5 else L_SHAPE)
    if kind == 4:
        return convex_hull_3d(rng.standard_normal((int(rng.integers(6, 15)), 3)))
    return sliver_tet(float(10 ** rng.uniform(-6, 0)))


def supporting_planes(K: Polyhedron, rng, eps: float) -> list:
    """Planes touching ``K`` at a face, an edge or a vertex, some nudged by a fraction of ``eps``."""
    planes = []
    normals = K.normals()
    f = int(rng.integers(K.n_faces))
    face = K.faces[f]
    n_out = normals[f]
    planes.append(Plane.from_normal(K.verts[face[0]], -n_out))   # keeps everything
    planes.append(Plane.from_normal(K.verts[face[0]], n_out))    # keeps only the face
    # edge: blend the two adjacent face normals
    a, b = face[0], face[1]
    g = next(k for k, h in enumerate(K.faces) if k != f and a in h and b in h)
    w = rng.random()
    planes.append(Plane.from_normal(K.verts[a], -(w * n_out + (1 - w) * normals[g])))
    # vertex: inside the normal cone, and a random plane through it
    v = int(rng.integers(K.n_verts))
    inc = [k for k, h in enumerate(K.faces) if v in h]
    wts = rng.random(len(inc))
    planes.append(Plane.from_normal(K.verts[v], -(wts @ normals[inc])))
    planes.append(Plane.from_normal(K.verts[v], rng.standard_normal(3)))
    nudged = []
    for p in planes:
        shift = rng.choice([-2.0, -0.5, 0.5, 2.0]) * eps
        nudged.append(Plane(p.s + shift * p.n, p.n))
    return planes + nudged
