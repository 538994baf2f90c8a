"""Kernel of a polyhedron by successive half-space clipping.

The kernel is built by starting from the bounding box of the input and
cutting it with the plane of every face, keeping the part on the inner side.
Four nested routines do the work:

``polyhedron_kernel``
    drives the cuts, one per face plane;
``polyhedron_plane_intersection``
    clips a convex polyhedron against one plane and caps the hole;
``polygon_plane_intersection``
    clips a single convex face;
``line_plane_intersection``
    finds the crossing point of an edge.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateGeometryError,
    InvalidPolyhedronError,
    InvariantViolation,
    LineInPlaneError,
    NoIntersectionError,
)
from .geometry import (
    Plane,
    Polyhedron,
    Tolerances,
    check_closed,
    compute_aabb,
    orient_polyhedron,
    polyhedron_volume,
)
from .hull import hull_volume

__all__ = [
    "ClipStats",
    "ClipResult",
    "KernelResult",
    "line_plane_intersection",
    "polygon_plane_intersection",
    "polyhedron_plane_intersection",
    "sort_ccw_on_plane",
    "polyhedron_kernel",
    "prepare_input",
    "convex_volume",
    "kernel_face_planes",
]

# two normals count as the same direction below this component-wise gap
SAME_NORMAL_TOL = 1e-9


@dataclass(frozen=True)
class ClipStats:
    kept: int = 0
    discarded: int = 0
    split: int = 0


@dataclass(frozen=True)
class ClipResult:
    above: Polyhedron
    cap_face_added: bool
    stats: ClipStats
    changed: bool = True


@dataclass(frozen=True)
class KernelResult:
    kernel: Polyhedron | None
    is_empty: bool
    volume: float
    cuts_performed: int
    faces_skipped_coplanar: int
    tol: Tolerances | None = None
    volume_history: tuple = field(default=(), repr=False)
    planes_applied: tuple = field(default=(), repr=False)


def line_plane_intersection(v1, v2, p: Plane) -> np.ndarray:
    """Point where the line through ``v1``, ``v2`` meets ``p``.

    Callers only pass segments whose endpoints lie strictly on opposite
    sides; a parallel segment is reported as an error.
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    num = float(p.n @ (v1 - p.s))
    den = float(p.n @ (v2 - v1))
    if den == 0.0:
        if num != 0.0:
            raise NoIntersectionError("segment is parallel to the plane")
        raise LineInPlaneError("segment lies in the plane")
    t = -num / den
    return v1 + t * (v2 - v1)


def _split_face(face, sides):
    """Walk the edges of a face and emit what survives above the plane.

    Each output item is either an original vertex index or an edge tuple
    ``(a, b)`` standing for the crossing point on that edge.  Only the second
    endpoint of an edge (or the crossing) is ever emitted, never the first.
    """
    out = []
    k = len(face)
    for i in range(k):
        id1 = face[i]
        id2 = face[i + 1 if i + 1 < k else 0]
        s1 = sides[id1]
        s2 = sides[id2]
        if s1 < 0 and s2 < 0:
            continue
        if s2 == 0 or (s1 >= 0 and s2 > 0):
            out.append(id2)
        elif s1 > 0 and s2 < 0:
            out.append((id1, id2))
        elif s1 < 0 and s2 > 0:
            out.append((id1, id2))
            out.append(id2)
        # s1 on, s2 strictly below: v1 was already emitted by the previous edge
    return out


def polygon_plane_intersection(polyV, polyF, p: Plane, tol: Tolerances):
    """Part of a convex polygon weakly above ``p``.

    ``polyV`` is indexable by the entries of ``polyF``.  Returns
    ``(aboveV, aboveF)``: new crossing vertices get indices ``max(polyF)+1``,
    ``max(polyF)+2``; surviving vertices keep theirs.
    """
    polyF = [int(i) for i in polyF]
    pts = {i: np.asarray(polyV[i], dtype=float) for i in polyF}
    eps = tol.eps_classify
    sides = {}
    for i, v in pts.items():
        d = float(p.n @ (v - p.s))
        sides[i] = 1 if d > eps else (-1 if d < -eps else 0)
    next_id = max(polyF) + 1
    aboveV, aboveF = [], []
    for item in _split_face(polyF, sides):
        if isinstance(item, tuple):
            aboveV.append(line_plane_intersection(pts[item[0]], pts[item[1]], p))
            aboveF.append(next_id)
            next_id += 1
        else:
            aboveV.append(pts[item])
            aboveF.append(item)
    return aboveV, aboveF


def sort_ccw_on_plane(capV, ids, p: Plane) -> tuple:
    """Order cap vertices counter-clockwise so the face normal is ``-p.n``.

    Points are projected by dropping the dominant axis of the normal and
    sorted by angle around their centroid.
    """
    pts = np.asarray(capV, dtype=float).reshape(-1, 3)
    ids = list(ids)
    if len(ids) != len(pts) or len(pts) < 3:
        raise DegenerateGeometryError("cap needs at least 3 points")
    nx, ny, nz = p.n.tolist()
    ax = max(range(3), key=lambda k: abs((nx, ny, nz)[k]))
    # cyclic order keeps (u, v, ax) right-handed
    u = pts[:, (ax + 1) % 3].tolist()
    v = pts[:, (ax + 2) % 3].tolist()
    m = len(u)
    cu = sum(u) / m
    cv = sum(v) / m
    u = [a - cu for a in u]
    v = [b - cv for b in v]
    order = sorted(range(m), key=lambda k: math.atan2(v[k], u[k]))
    area2 = 0.0
    for a, b in zip(order, order[1:] + order[:1]):
        area2 += u[a] * v[b] - v[a] * u[b]
    extent = max(max(u) - min(u), max(v) - min(v))
    if not area2 > 1e-14 * extent * extent:
        raise DegenerateGeometryError("cap points are collinear")
    # increasing angle is CCW in (u, v), i.e. a normal along +axis
    if (nx, ny, nz)[ax] > 0:
        order.reverse()
    return tuple(ids[k] for k in order)


def polyhedron_plane_intersection(P: Polyhedron, p: Plane, tol: Tolerances) -> ClipResult:
    """Clip convex ``P`` against ``p``, keeping the part ``p.n`` points into.

    Faces entirely below are dropped, faces weakly above are copied, the rest
    are split.  The hole left by the cut is closed by a cap face whose ring is
    read off the unmatched in-plane edges, so the cap always fits the faces
    around it.  Consecutive cap points closer than ``eps_merge`` are merged.
    Every vertex strictly below yields an empty result.
    """
    verts = P.verts
    d = (verts - p.s) @ p.n
    eps = tol.eps_classify
    sides_arr = (d > eps).astype(np.int8) - (d < -eps).astype(np.int8)
    nf = len(P.faces)
    if sides_arr.min() >= 0:
        return ClipResult(P, False, ClipStats(kept=nf), changed=False)
    if sides_arr.max() <= 0:
        return ClipResult(Polyhedron.empty(), False, ClipStats(discarded=nf))

    sides = sides_arr.tolist()
    nv = len(sides)
    cross: dict = {}          # (a, b) with a < b -> id nv + k
    cross_pts: list = []

    def crossing_index(a, b):
        key = (a, b) if a < b else (b, a)
        j = cross.get(key)
        if j is None:
            j = cross[key] = nv + len(cross_pts)
            cross_pts.append(line_plane_intersection(verts[key[0]], verts[key[1]], p))
        return j

    faces, src, planar = [], [], []
    kept = discarded = split = 0
    for fi, face in enumerate(P.faces):
        fs = [sides[i] for i in face]
        hi = max(fs)
        lo = min(fs)
        if hi < 0:
            discarded += 1
            continue
        if lo >= 0:
            ring = face
            kept += 1
        elif hi == 0:
            # only touches the plane: no area survives
            discarded += 1
            continue
        else:
            ring = tuple([crossing_index(*it) if it.__class__ is tuple else it
                          for it in _split_face(face, sides)])
            split += 1
        faces.append(ring)
        src.append(fi)
        if lo > 0:
            continue
        # edges with both ends on the plane lie in it
        prev = ring[-1]
        for b in ring:
            if (prev >= nv or sides[prev] == 0) and (b >= nv or sides[b] == 0):
                planar.append((prev, b))
            prev = b

    pts = np.vstack([verts, cross_pts]) if cross_pts else verts
    rep: dict = {}
    caps = []
    for cyc in _hole_cycles(planar):
        ring = _merge_cycle(cyc, pts, nv, tol.eps_merge, rep)
        if len(ring) >= 3:
            caps.append(tuple(ring))
    if rep:
        merged, merged_src = [], []
        for ring, fi in zip(faces, src):
            ring = _dedup_ring([rep.get(i, i) for i in ring])
            if ring is None:
                split -= 1
                discarded += 1
                continue
            merged.append(ring)
            merged_src.append(fi)
        faces, src = merged, merged_src
    faces.extend(caps)

    used = sorted({i for f in faces for i in f})
    if len(used) < len(pts):
        idx = {old: new for new, old in enumerate(used)}
        faces = [tuple([idx[i] for i in f]) for f in faces]
        pts = pts[used]
    normals = P.face_normals
    face_normals = None
    if normals is not None:
        face_normals = normals[src]
        if caps:
            face_normals = np.vstack([face_normals, np.repeat(-p.n[None], len(caps), axis=0)])
    above = Polyhedron._trusted(pts, tuple(faces), face_normals)
    return ClipResult(above, bool(caps), ClipStats(kept, discarded, split))


def _hole_cycles(planar) -> list:
    """Closed cap rings from the in-plane edges that have no reverse partner.

    The cap runs against the faces around it, so each unmatched edge
    ``a -> b`` becomes the cap edge ``b -> a``.
    """
    pset = set(planar)
    succ: dict = {}
    for a, b in planar:
        if (b, a) not in pset:
            succ.setdefault(b, []).append(a)
    cycles = []
    while succ:
        start = cur = next(iter(succ))
        cyc = [start]
        while cur in succ:
            nxt = succ[cur].pop()
            if not succ[cur]:
                del succ[cur]
            if nxt == start:
                break
            cyc.append(nxt)
            cur = nxt
        cycles.append(cyc)
    return cycles


def _merge_cycle(cyc, pts, nv, eps_merge, rep) -> list:
    """Merge runs of consecutive ring points lying within ``eps_merge`` of the run start.

    Input vertices (ids below ``nv``) are never merged with each other and
    win over crossings as the surviving id.  Fills ``rep`` and returns the
    reduced ring.
    """
    m = len(cyc)
    r2 = eps_merge * eps_merge
    xyz = pts[cyc]
    step = xyz - np.roll(xyz, 1, axis=0)
    far = np.flatnonzero(np.einsum("ij,ij->i", step, step) > r2)
    if len(far) == m:
        return list(cyc)
    # start on a gap so no run wraps around
    start = int(far[0]) if len(far) else 0
    groups: list = []
    for k in list(range(start, m)) + list(range(start)):
        g = groups[-1] if groups else None
        if (g is not None and float(((xyz[k] - xyz[g[0]]) ** 2).sum()) <= r2
                and not (cyc[k] < nv and any(cyc[j] < nv for j in g))):
            g.append(k)
        else:
            groups.append([k])
    ring = []
    for g in groups:
        ids = [cyc[k] for k in g]
        keep = next((i for i in ids if i < nv), ids[0])
        for i in ids:
            if i != keep:
                rep[i] = keep
        ring.append(keep)
    return ring


def _dedup_ring(ids):
    """Drop cyclically repeated neighbours; ``None`` if fewer than 3 remain."""
    ring = [v for k, v in enumerate(ids) if v != ids[k - 1]] if len(ids) > 1 else ids
    if len(ring) < 3 or len(set(ring)) != len(ring):
        return None
    return tuple(ring)


def prepare_input(P: Polyhedron, normals=None) -> Polyhedron:
    """Validate a kernel input and attach outward face normals."""
    if normals is not None:
        P = Polyhedron(P.verts, P.faces, normals)
    if P.n_verts < 4 or P.n_faces < 4:
        raise InvalidPolyhedronError("a polyhedron needs at least 4 vertices and 4 faces")
    check_closed(P)
    try:
        P = orient_polyhedron(P)
    except DegenerateGeometryError as exc:
        raise InvalidPolyhedronError(f"degenerate face: {exc}") from exc
    vol = polyhedron_volume(P)
    lo, hi = P.verts.min(axis=0), P.verts.max(axis=0)
    diag = float(np.linalg.norm(hi - lo))
    if not abs(vol) > 1e-12 * diag ** 3:
        raise InvalidPolyhedronError("polyhedron has zero volume")
    return P


def convex_volume(K: Polyhedron) -> float:
    """Volume of a convex solid as the hull volume of its vertices.

    Dead-band classification leaves faces off-plane by up to ``eps_classify``,
    and a fan over such a face shifts with its starting vertex.  The hull
    volume does not, and it cannot grow under a cut because every new vertex
    lies in the hull of the old ones.
    """
    v = hull_volume(K.verts)
    return polyhedron_volume(K) if v is None else v


def _check_cut(K: Polyhedron, applied, tol: Tolerances) -> None:
    check_closed(K, directed=True)
    if not applied:
        return
    n = np.array([q.n for q in applied])
    off = np.array([q.offset for q in applied])
    worst = float((K.verts @ n.T - off).min())
    if worst < -tol.eps_classify:
        raise InvariantViolation(
            f"kernel vertex lies {-worst:.3g} below an applied plane")


def polyhedron_kernel(P: Polyhedron, normals=None, tol: Tolerances | None = None, *,
                      tol_scale: float = 1.0, debug: bool = False,
                      trace: bool = False) -> KernelResult:
    """Kernel of ``P``: the bounding box clipped by every inward face plane.

    ``normals`` (outward, one per face) override those stored on ``P``.  When
    neither is given they are derived from the winding.  Planes repeating an
    already applied one are skipped and counted.  With ``debug`` every
    intermediate solid is checked for closure and containment; ``trace``
    records the volume after every cut.
    """
    P = prepare_input(P, normals)
    if tol is None:
        tol = Tolerances.for_polyhedron(P, tol_scale)
    K = compute_aabb(P)
    volume = convex_volume(K)
    history = [volume] if trace else []

    outward = P.face_normals
    inward = -outward / np.linalg.norm(outward, axis=1)[:, None]
    anchors = P.verts[[f[0] for f in P.faces]]
    offsets = np.einsum("ij,ij->i", inward, anchors)
    applied_planes: list = []
    seen_n = np.empty((len(P.faces), 3))
    seen_off = np.empty(len(P.faces))
    m = 0
    skipped = 0
    cuts = 0
    empty = False

    for f in range(len(P.faces)):
        n = inward[f]
        if m:
            same = np.abs(seen_n[:m] - n).max(axis=1) <= SAME_NORMAL_TOL
            if same.any() and np.any(np.abs(seen_off[:m][same] - offsets[f]) < tol.eps_classify):
                skipped += 1
                continue
        seen_n[m] = n
        seen_off[m] = offsets[f]
        m += 1
        plane = Plane(anchors[f], n)
        applied_planes.append(plane)
        res = polyhedron_plane_intersection(K, plane, tol)
        cuts += 1
        K = res.above
        if K.n_verts < 4:
            empty = True
            break
        if res.changed:
            if debug:
                _check_cut(K, applied_planes, tol)
            new_volume = convex_volume(K)
            if debug and new_volume > volume + 1e-12:
                raise InvariantViolation(
                    f"kernel volume grew from {volume!r} to {new_volume!r}")
            volume = new_volume
            if volume <= tol.eps_vol:
                empty = True
                break
        if trace:
            history.append(volume)

    if trace and empty:
        history.append(0.0)
    if empty:
        return KernelResult(None, True, 0.0, cuts, skipped, tol, tuple(history),
                            tuple(applied_planes))
    return KernelResult(K, False, volume, cuts, skipped, tol, tuple(history),
                        tuple(applied_planes))


def kernel_face_planes(K: Polyhedron) -> list:
    """Inward planes of a kernel polyhedron's faces."""
    return [Plane.from_normal(K.verts[f[0]], -K.face_normals[k]) for k, f in enumerate(K.faces)]
