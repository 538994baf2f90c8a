"""3D convex hull as a closed, outward-wound triangle mesh."""
from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import DegenerateGeometryError
from .geometry import Polyhedron


def convex_hull_3d(points) -> Polyhedron:
    """Triangulated convex hull of ``points``.

    Only extreme points become vertices; they keep the relative order they
    had in ``points``.  Faces are CCW seen from outside and carry the hull's
    outward facet normals.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) < 4:
        raise DegenerateGeometryError("convex hull needs at least 4 points")
    if not np.all(np.isfinite(pts)):
        raise DegenerateGeometryError("non-finite hull input")
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise DegenerateGeometryError(f"degenerate hull input: {exc.args[0].splitlines()[0]}") from exc
    if not hull.volume > 0:
        raise DegenerateGeometryError("hull has zero volume")

    used = np.unique(hull.simplices)
    remap = np.full(len(pts), -1, dtype=np.intp)
    remap[used] = np.arange(len(used))
    simp = hull.simplices
    a, b, c = pts[simp[:, 0]], pts[simp[:, 1]], pts[simp[:, 2]]
    normals = hull.equations[:, :3]
    flip = np.einsum("ij,ij->i", np.cross(b - a, c - a), normals) < 0
    tris = simp.copy()
    tris[flip, 1], tris[flip, 2] = simp[flip, 2], simp[flip, 1]
    faces = tuple(tuple(int(i) for i in t) for t in remap[tris])
    return Polyhedron(pts[used], faces, normals)


def hull_volume(points) -> float | None:
    """Volume of the convex hull of ``points``, or None when qhull finds it flat."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) < 4:
        return 0.0
    try:
        return float(ConvexHull(pts).volume)
    except QhullError:
        return None
