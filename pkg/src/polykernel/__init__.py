"""Kernel of a polyhedron by clipping its bounding box with every face plane."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegenerateGeometryError,
    InputError,
    InvalidPolyhedronError,
    InvariantViolation,
    LineInPlaneError,
    MeshParseError,
    NoIntersectionError,
    NonManifoldError,
    PolyKernelError,
)
from .geometry import (  # noqa: E402
    Classification,
    Plane,
    Polyhedron,
    Side,
    Tolerances,
    check_closed,
    classify,
    compute_aabb,
    face_plane,
    newell_normal,
    polyhedron_volume,
    signed_distance,
)
from .clipping import (  # noqa: E402
    ClipResult,
    KernelResult,
    line_plane_intersection,
    polygon_plane_intersection,
    polyhedron_kernel,
    polyhedron_plane_intersection,
    sort_ccw_on_plane,
)
from .hull import convex_hull_3d  # noqa: E402
from .offio import load_mesh, parse_obj, parse_off, write_off  # noqa: E402
