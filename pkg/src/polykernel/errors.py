"""Exception hierarchy."""


class PolyKernelError(Exception):
    pass


class InputError(PolyKernelError, ValueError):
    """Bad user input: malformed file, invalid polyhedron, bad parameter."""


class InvalidPolyhedronError(InputError):
    pass


class NonManifoldError(InvalidPolyhedronError):
    pass


class DegenerateGeometryError(PolyKernelError, ValueError):
    pass


class NoIntersectionError(DegenerateGeometryError):
    """Segment parallel to the plane and off it."""


class LineInPlaneError(DegenerateGeometryError):
    """Segment lies inside the plane."""


class MeshParseError(InputError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"{message}, line {line}"
        super().__init__(message)


class InvariantViolation(PolyKernelError, AssertionError):
    """An internal consistency check failed (a bug, not bad input)."""
