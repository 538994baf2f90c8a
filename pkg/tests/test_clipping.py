import math

import numpy as np
import pytest

from polykernel.clipping import (
    convex_volume,
    kernel_face_planes,
    line_plane_intersection,
    polygon_plane_intersection,
    polyhedron_kernel,
    polyhedron_plane_intersection,
    prepare_input,
    sort_ccw_on_plane,
)
from polykernel.errors import (
    DegenerateGeometryError,
    InvalidPolyhedronError,
    InvariantViolation,
    LineInPlaneError,
    NoIntersectionError,
)
from polykernel.geometry import (
    Plane,
    Polyhedron,
    Tolerances,
    check_closed,
    newell_normal,
    polyhedron_volume,
)
from polykernel.hull import convex_hull_3d
from polykernel.oracle import HalfspaceSystem, monte_carlo_volume

from helpers import L_SHAPE, COMB, is_convex_polygon_2d, shoelace, simplex, split_face_coplanar, unit_cube
from polykernel.generators import extrude_polygon

TOL = Tolerances.for_diagonal(math.sqrt(3))
DIAGONAL = Plane.from_normal((0.5, 0.5, 0.5), (1, 1, 1))


# --- line / plane --------------------------------------------------------------

def test_line_plane_midpoint():
    x = line_plane_intersection(np.array([0, 0, -1.0]), np.array([0, 0, 1.0]), Plane((0, 0, 0), (0, 0, 1)))
    assert x.tolist() == [0, 0, 0]


def test_line_plane_interpolation():
    x = line_plane_intersection(np.array([0, 0, 1.0]), np.array([0, 0, 4.0]), Plane((0, 0, 2), (0, 0, 1)))
    assert np.allclose(x, [0, 0, 2])


def test_line_plane_parallel_errors():
    p = Plane((0, 0, 1), (0, 0, 1))
    with pytest.raises(NoIntersectionError):
        line_plane_intersection(np.array([1, 1, 0.0]), np.array([2, 2, 0.0]), p)
    with pytest.raises(LineInPlaneError):
        line_plane_intersection(np.array([1, 1, 1.0]), np.array([2, 2, 1.0]), p)


def test_line_plane_result_lies_on_plane():
    rng = np.random.default_rng(0)
    for _ in range(100):
        p = Plane.from_normal(rng.normal(size=3), rng.normal(size=3))
        a = p.s + rng.normal(size=3)
        b = p.s + rng.normal(size=3)
        if (a - p.s) @ p.n * ((b - p.s) @ p.n) >= 0:
            continue
        assert abs((line_plane_intersection(a, b, p) - p.s) @ p.n) < 1e-12


# --- polygon / plane -----------------------------------------------------------

SQUARE = [np.array(v, dtype=float) for v in [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)]]


def test_polygon_half_square():
    V, F = polygon_plane_intersection(SQUARE, [0, 1, 2, 3], Plane((0.5, 0, 0), (1, 0, 0)), TOL)
    assert len(F) == 4
    assert sorted(F) == [1, 2, 4, 5]
    xs = np.array(V)[:, 0]
    assert xs.min() == pytest.approx(0.5) and xs.max() == 1.0
    assert shoelace(np.array(V)[:, :2]) == pytest.approx(0.5)


def test_polygon_triangle_section():
    tri = [np.array(v, dtype=float) for v in [(0, 0, 0), (2, 0, 0), (0, 2, 0)]]
    V, F = polygon_plane_intersection(tri, [0, 1, 2], Plane((1, 0, 0), (1, 0, 0)), TOL)
    got = {tuple(np.round(v, 12)) for v in V}
    assert got == {(1, 0, 0), (2, 0, 0), (1, 1, 0)}


def test_polygon_cut_through_vertices_reuses_them():
    p = Plane.from_normal((1, 0, 0), (1, 1, 0))
    V, F = polygon_plane_intersection(SQUARE, [0, 1, 2, 3], p, TOL)
    assert F == [1, 2, 3]       # no new vertex created
    # oracle: triangle (1,0),(1,1),(0,1) has area 1/2
    assert shoelace(np.array(V)[:, :2]) == pytest.approx(0.5)


def test_polygon_output_keeps_winding():
    rng = np.random.default_rng(1)
    ang = np.sort(rng.uniform(0, 2 * np.pi, 9))
    poly = [np.array([np.cos(a), np.sin(a), 0.0]) for a in ang]
    for _ in range(50):
        p = Plane.from_normal(rng.uniform(-0.5, 0.5, 3) * [1, 1, 0], np.r_[rng.normal(size=2), 0])
        V, F = polygon_plane_intersection(poly, list(range(9)), p, TOL)
        if len(F) >= 3:
            assert shoelace(np.array(V)[:, :2]) > 0
            assert is_convex_polygon_2d(np.array(V)[:, :2])


# --- polyhedron / plane --------------------------------------------------------

def test_half_cube():
    res = polyhedron_plane_intersection(unit_cube(), Plane((0, 0, 0.5), (0, 0, 1)), TOL)
    A = res.above
    assert A.n_verts == 8 and A.n_faces == 6
    assert res.cap_face_added
    assert polyhedron_volume(A) == pytest.approx(0.5)
    assert A.verts[:, 2].min() == pytest.approx(0.5)
    check_closed(A, directed=True)
    assert res.stats.kept == 1 and res.stats.split == 4 and res.stats.discarded == 1


def test_diagonal_cut_gives_hexagon_cap():
    res = polyhedron_plane_intersection(unit_cube(), DIAGONAL, TOL)
    A = res.above
    assert A.n_faces == 7
    cap = A.faces[-1]
    assert len(cap) == 6
    pts = A.verts[list(cap)]
    assert np.allclose(np.sort(np.linalg.norm(pts - 0.5, axis=1)), np.sqrt(2) / 2)
    assert np.allclose(newell_normal(pts), -DIAGONAL.n)
    # independent volume oracle
    H = HalfspaceSystem.from_planes([DIAGONAL])
    mc = monte_carlo_volume(H, ((0, 0, 0), (1, 1, 1)), 10 ** 6, seed=11)
    assert abs(mc - 0.5) <= 1e-2
    assert polyhedron_volume(A) == pytest.approx(0.5, abs=1e-12)


def test_tangent_plane_leaves_cube_unchanged():
    cube = unit_cube()
    res = polyhedron_plane_intersection(cube, Plane((0, 0, 0), (0, 0, 1)), TOL)
    assert res.above is cube and not res.changed
    assert not res.cap_face_added and res.above.n_faces == 6


def test_plane_keeping_only_a_face_empties_the_solid():
    res = polyhedron_plane_intersection(unit_cube(), Plane((0, 0, 0), (0, 0, -1)), TOL)
    assert res.above.n_verts == 0


def test_plane_below_everything_returns_empty():
    res = polyhedron_plane_intersection(unit_cube(), Plane((0, 0, 2), (0, 0, 1)), TOL)
    assert res.above.n_verts == 0 and res.stats.discarded == 6


def test_cut_through_vertices_shares_them():
    p = Plane.from_normal((1, 0, 0), (1, 1, 0))     # through the vertical edges at (1,0) and (0,1)
    res = polyhedron_plane_intersection(unit_cube(), p, TOL)
    A = res.above
    check_closed(A, directed=True)
    assert A.n_verts == 6 and A.n_faces == 5
    assert polyhedron_volume(A) == pytest.approx(0.5)


def test_nearby_crossings_do_not_pinch_the_cap():
    # a vertex barely below the plane: the crossings around it nearly coincide
    rng = np.random.default_rng(237)
    for trial in range(200):
        hull = convex_hull_3d(rng.normal(size=(10, 3)))
        tol = Tolerances.for_polyhedron(hull)
        v = int(rng.integers(hull.n_verts))
        n = hull.verts[v] - hull.verts.mean(axis=0)
        n /= -np.linalg.norm(n)
        p = Plane(hull.verts[v] + rng.uniform(1.5, 20) * tol.eps_classify * n, n)
        A = polyhedron_plane_intersection(hull, p, tol).above
        check_closed(A, directed=True)
        assert convex_volume(A) <= convex_volume(hull) + 1e-12


def test_cap_ring_matches_angular_sort():
    rng = np.random.default_rng(5)
    for _ in range(100):
        hull = convex_hull_3d(rng.normal(size=(12, 3)))
        p = Plane.from_normal(rng.normal(size=3) * 0.3, rng.normal(size=3))
        res = polyhedron_plane_intersection(hull, p, TOL)
        if not res.cap_face_added:
            continue
        cap = res.above.faces[-1]
        ref = sort_ccw_on_plane(res.above.verts[list(cap)], cap, p)
        k = ref.index(cap[0])
        assert ref[k:] + ref[:k] == cap


def test_sort_ccw_square_and_triangle():
    pts = np.array([[0, 0, 0.5], [1, 1, 0.5], [1, 0, 0.5], [0, 1, 0.5]])
    p = Plane((0, 0, 0.5), (0, 0, 1))
    order = sort_ccw_on_plane(pts, [10, 11, 12, 13], p)
    assert sorted(order) == [10, 11, 12, 13]
    lookup = dict(zip([10, 11, 12, 13], pts))
    assert np.allclose(newell_normal([lookup[i] for i in order]), [0, 0, -1], atol=1e-6)
    tri = sort_ccw_on_plane(pts[:3], [0, 1, 2], p.flipped())
    assert np.allclose(newell_normal(pts[list(tri)]), [0, 0, 1], atol=1e-6)


def test_sort_ccw_hexagon_turns_consistently():
    res = polyhedron_plane_intersection(unit_cube(), DIAGONAL, TOL)
    A = res.above
    cap = [i for i in range(A.n_verts) if abs((A.verts[i] - DIAGONAL.s) @ DIAGONAL.n) < 1e-12]
    order = sort_ccw_on_plane(A.verts[cap], cap, DIAGONAL)
    proj = A.verts[list(order)][:, :2]   # dominant axis is a tie; drop z like the sorter's view
    assert len(order) == 6 and is_convex_polygon_2d(proj)


def test_sort_ccw_rejects_collinear():
    pts = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]], dtype=float)
    with pytest.raises(DegenerateGeometryError):
        sort_ccw_on_plane(pts, [0, 1, 2], Plane((0, 0, 0), (0, 0, 1)))


# --- kernel driver -------------------------------------------------------------

def test_kernel_of_unit_cube():
    res = polyhedron_kernel(unit_cube())
    assert not res.is_empty and res.volume == pytest.approx(1.0)
    assert res.kernel.n_verts == 8


def test_kernel_of_simplex_is_simplex():
    res = polyhedron_kernel(simplex())
    assert res.volume == pytest.approx(1 / 6)
    got = {tuple(np.round(v, 12)) for v in res.kernel.verts}
    assert got == {(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)}


def test_kernel_of_l_prism_is_a_unit_cube():
    res = polyhedron_kernel(extrude_polygon(L_SHAPE))
    assert res.volume == pytest.approx(1.0)
    assert np.allclose(res.kernel.verts.min(axis=0), 0) and np.allclose(res.kernel.verts.max(axis=0), 1)


def test_kernel_of_comb_is_empty():
    res = polyhedron_kernel(extrude_polygon(COMB))
    assert res.is_empty and res.kernel is None and res.volume == 0.0


def test_kernel_result_invariants():
    res = polyhedron_kernel(extrude_polygon(L_SHAPE), trace=True)
    assert res.is_empty == (res.kernel is None) == (res.volume == 0.0)
    assert res.volume_history[0] == pytest.approx(4.0)
    assert res.volume_history[-1] == pytest.approx(res.volume)
    assert all(b <= a + 1e-12 for a, b in zip(res.volume_history, res.volume_history[1:]))
    assert len(res.planes_applied) == res.cuts_performed


def test_kernel_faces_carry_exact_planes():
    K = polyhedron_kernel(simplex()).kernel
    for q in kernel_face_planes(K):
        d = (K.verts - q.s) @ q.n
        assert d.min() >= -1e-12


def test_coplanar_faces_are_skipped():
    P = split_face_coplanar(unit_cube(), 0)
    res = polyhedron_kernel(P)
    assert res.faces_skipped_coplanar == 3
    assert res.cuts_performed == 6
    assert res.volume == pytest.approx(1.0)


def test_user_normals_override_winding():
    cube = unit_cube()
    bare = Polyhedron(cube.verts, cube.faces)
    res = polyhedron_kernel(bare, normals=cube.face_normals)
    assert res.volume == pytest.approx(1.0)


def test_tol_scale_changes_tolerance():
    a = polyhedron_kernel(unit_cube())
    b = polyhedron_kernel(unit_cube(), tol_scale=100.0)
    assert b.tol.eps_classify == pytest.approx(100 * a.tol.eps_classify)


def test_prepare_input_rejects_bad_meshes():
    cube = unit_cube()
    with pytest.raises(InvalidPolyhedronError):
        prepare_input(Polyhedron(cube.verts, cube.faces[:-1]))
    flat = Polyhedron(np.c_[cube.verts[:, :2], np.zeros(8)], cube.faces, cube.face_normals)
    with pytest.raises(InvalidPolyhedronError):
        prepare_input(flat)
    with pytest.raises(InvalidPolyhedronError):
        prepare_input(Polyhedron(cube.verts[:3], [(0, 1, 2), (0, 2, 1)]))


def test_debug_check_raises_on_containment_failure(monkeypatch):
    import polykernel.clipping as clipping

    def leaky(K, p, tol):
        out = clipping.ClipResult(Polyhedron._trusted(K.verts + 1.0, K.faces, K.face_normals), False,
                                  clipping.ClipStats(), changed=True)
        return out

    monkeypatch.setattr(clipping, "polyhedron_plane_intersection", leaky)
    with pytest.raises(InvariantViolation):
        clipping.polyhedron_kernel(unit_cube(), debug=True)


def test_convex_volume_matches_fan_on_planar_faces():
    from polykernel.hull import hull_volume
    assert convex_volume(unit_cube()) == pytest.approx(1.0)
    assert hull_volume(np.zeros((3, 3))) == 0.0
    assert hull_volume(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0.0]])) is None
