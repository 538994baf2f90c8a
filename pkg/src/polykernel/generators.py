"""Seeded synthetic polyhedra.

* ``gen_tet_like``: convex hull of random sphere points with one vertex
  pulled to the centroid.
* ``gen_voro_like``: a random convex cell whose largest face is fanned and
  dented toward the cell centroid.
* ``gen_tent``: a prism over a dart, whose kernel shrinks as the reflex
  vertex rises.
* ``gen_refined_box``: a unit cube with midpoint-subdivided faces.

Every generator is deterministic in its arguments.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, InputError, InvalidPolyhedronError
from .geometry import (
    Plane,
    Polyhedron,
    Tolerances,
    check_closed,
    newell_normal,
    polyhedron_volume,
)
from .hull import convex_hull_3d
from .clipping import sort_ccw_on_plane
from .oracle import HalfspaceSystem, convexity_violation, enumerate_vertices

__all__ = [
    "GeneratorSpec",
    "FAMILIES",
    "convex_hull_3d",
    "random_sphere_points",
    "move_vertex_to_centroid",
    "gen_tet_like",
    "gen_voro_like",
    "gen_tent",
    "extrude_polygon",
    "tent_kernel_volume",
    "gen_refined_box",
    "generate",
]

log = logging.getLogger(__name__)

FAMILIES = ("tent", "tet_like", "voro_like", "refined_box")
MAX_RETRIES = 100
MAX_REFINE_DEPTH = 6
# half-spaces farther out than this count as unbounded
VORO_BOUND = 1e3


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    parameter: float
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"unknown family {self.family!r}; expected one of {FAMILIES}")


def random_sphere_points(n: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_normal((n, 3))
    return x / np.linalg.norm(x, axis=1)[:, None]


def _validate_dented(P: Polyhedron, reference_volume: float) -> bool:
    try:
        check_closed(P, directed=True)
    except InvalidPolyhedronError:
        return False
    vol = polyhedron_volume(P)
    if not (0 < vol < reference_volume):
        return False
    tol = Tolerances.for_polyhedron(P)
    return convexity_violation(P) > tol.eps_classify


def move_vertex_to_centroid(P: Polyhedron, index: int) -> Polyhedron:
    """Move one vertex to the mean of all vertices; normals follow the winding."""
    verts = np.array(P.verts)
    verts[index] = P.verts.mean(axis=0)
    normals = np.array(P.face_normals if P.face_normals is not None else np.zeros((P.n_faces, 3)))
    for k, f in enumerate(P.faces):
        if index in f or P.face_normals is None:
            normals[k] = newell_normal(verts[list(f)])
    return Polyhedron(verts, P.faces, normals)


def gen_tet_like(n_vertices: int, seed: int) -> Polyhedron:
    """Non-convex element from ``n_vertices`` random points on the unit sphere."""
    if n_vertices < 5:
        raise InputError("tet_like needs at least 5 vertices")
    for attempt in range(MAX_RETRIES):
        rng = np.random.default_rng([seed, attempt])
        try:
            hull = convex_hull_3d(random_sphere_points(n_vertices, rng))
            if hull.n_verts != n_vertices:
                continue
            P = move_vertex_to_centroid(hull, 0)
        except DegenerateGeometryError:
            continue
        if _validate_dented(P, polyhedron_volume(hull)):
            if attempt:
                log.info("tet_like(%d, seed=%d): accepted after %d retries", n_vertices, seed, attempt)
            return P
    raise DegenerateGeometryError(f"tet_like({n_vertices}, seed={seed}) failed after {MAX_RETRIES} tries")


def _convex_cell(normals: np.ndarray) -> Polyhedron | None:
    """Cell ``{x : u.x <= 1}`` as a polygon-faced polyhedron, or None if unbounded."""
    H = HalfspaceSystem(-normals, -np.ones(len(normals)))
    box = HalfspaceSystem.box(np.full(3, -VORO_BOUND), np.full(3, VORO_BOUND))
    tol = Tolerances.for_diagonal(1.0)
    pts = enumerate_vertices(H + box, tol)
    if len(pts) < 4 or np.any(np.abs(pts) > 0.5 * VORO_BOUND):
        return None
    cell_tol = Tolerances.for_diagonal(float(np.linalg.norm(np.ptp(pts, axis=0))))
    faces, face_normals = [], []
    dist = pts @ normals.T - 1.0
    for k, u in enumerate(normals):
        ids = np.flatnonzero(np.abs(dist[:, k]) <= 10 * cell_tol.eps_classify)
        if len(ids) < 3:
            continue
        faces.append(sort_ccw_on_plane(pts[ids], ids.tolist(), Plane(u, -u)))
        face_normals.append(u)
    try:
        P = Polyhedron(pts, faces, face_normals)
        check_closed(P, directed=True)
    except InvalidPolyhedronError:
        return None
    return P


def gen_voro_like(n_halfspaces: int, seed: int) -> Polyhedron:
    """Non-convex cell with polygonal faces from random tangent half-spaces."""
    if n_halfspaces < 4:
        raise InputError("voro_like needs at least 4 half-spaces")
    for attempt in range(MAX_RETRIES):
        rng = np.random.default_rng([seed, attempt])
        cell = _convex_cell(random_sphere_points(n_halfspaces, rng))
        if cell is None:
            continue
        verts = cell.verts
        areas = [np.linalg.norm(np.cross(verts[list(f)], np.roll(verts[list(f)], -1, axis=0)).sum(axis=0))
                 for f in cell.faces]
        big = int(np.argmax(areas))
        centre = len(verts)
        ring = cell.faces[big]
        new_verts = np.vstack([verts, verts.mean(axis=0)])
        fan = [(centre, ring[i], ring[(i + 1) % len(ring)]) for i in range(len(ring))]
        faces = list(cell.faces[:big]) + list(cell.faces[big + 1:]) + fan
        try:
            fan_normals = [newell_normal(new_verts[list(f)]) for f in fan]
        except DegenerateGeometryError:
            continue
        normals = np.vstack([np.delete(cell.face_normals, big, axis=0), fan_normals])
        P = Polyhedron(new_verts, faces, normals)
        if _validate_dented(P, polyhedron_volume(cell)):
            if attempt:
                log.info("voro_like(%d, seed=%d): accepted after %d retries", n_halfspaces, seed, attempt)
            return P
    raise DegenerateGeometryError(f"voro_like({n_halfspaces}, seed={seed}) failed after {MAX_RETRIES} tries")


def extrude_polygon(outline, height: float = 1.0) -> Polyhedron:
    """Prism over a simple CCW polygon in the xy-plane, ``z`` in [0, height]."""
    outline = [(float(x), float(y)) for x, y in outline]
    k = len(outline)
    if k < 3 or not height > 0:
        raise InputError("extrusion needs a polygon of 3+ points and positive height")
    verts = np.array([(x, y, 0.0) for x, y in outline] + [(x, y, height) for x, y in outline])
    faces = [tuple(range(k - 1, -1, -1)), tuple(range(k, 2 * k))]
    faces += [(i, (i + 1) % k, (i + 1) % k + k, i + k) for i in range(k)]
    normals = [newell_normal(verts[list(f)]) for f in faces]
    P = Polyhedron(verts, faces, normals)
    if polyhedron_volume(P) <= 0:
        raise InputError("extrusion outline must be counter-clockwise")
    return P


def gen_tent(lam: float) -> Polyhedron:
    """Dart ``(0,0), (1,lam), (2,0), (1,1)`` extruded over ``z`` in [0, 1].

    The kernel is the prism over the kite bounded by the four edge lines,
    with volume ``(1 - lam)**2 / (1 + lam)``.
    """
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise InputError(f"tent parameter must lie in (0, 1), got {lam}")
    return extrude_polygon([(0.0, 0.0), (1.0, lam), (2.0, 0.0), (1.0, 1.0)])


def tent_kernel_volume(lam: float) -> float:
    return (1.0 - lam) ** 2 / (1.0 + lam)


def gen_refined_box(depth: int) -> Polyhedron:
    """Unit cube whose quads are split 4-way ``depth`` times (6 * 4**depth faces)."""
    if not (isinstance(depth, (int, np.integer)) and 0 <= depth <= MAX_REFINE_DEPTH):
        raise InputError(f"refinement depth must be an integer in [0, {MAX_REFINE_DEPTH}]")
    pool: dict = {}
    verts: list = []

    def vid(p):
        j = pool.get(p)
        if j is None:
            j = pool[p] = len(verts)
            verts.append(p)
        return j

    def mid(a, b):
        return tuple((x + y) / 2 for x, y in zip(a, b))

    corners = [(float(k & 1), float((k >> 1) & 1), float((k >> 2) & 1)) for k in range(8)]
    quads = [
        ((0, 2, 3, 1), (0, 0, -1)), ((4, 5, 7, 6), (0, 0, 1)),
        ((0, 1, 5, 4), (0, -1, 0)), ((2, 6, 7, 3), (0, 1, 0)),
        ((0, 4, 6, 2), (-1, 0, 0)), ((1, 3, 7, 5), (1, 0, 0)),
    ]
    faces, normals = [], []
    for q, n in quads:
        level = [tuple(corners[i] for i in q)]
        for _ in range(depth):
            nxt = []
            for a, b, c, d in level:
                ab, bc, cd, da = mid(a, b), mid(b, c), mid(c, d), mid(d, a)
                m = mid(ab, cd)
                nxt += [(a, ab, m, da), (ab, b, bc, m), (m, bc, c, cd), (da, m, cd, d)]
            level = nxt
        for quad in level:
            faces.append(tuple(vid(p) for p in quad))
            normals.append(n)
    return Polyhedron(np.array(verts), faces, np.array(normals, dtype=float))


def generate(spec: GeneratorSpec) -> Polyhedron:
    if spec.family == "tent":
        return gen_tent(spec.parameter)
    if spec.family == "tet_like":
        return gen_tet_like(int(spec.parameter), spec.seed)
    if spec.family == "voro_like":
        return gen_voro_like(int(spec.parameter), spec.seed)
    return gen_refined_box(int(spec.parameter))
