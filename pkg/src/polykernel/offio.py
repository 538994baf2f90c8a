"""ASCII OFF read/write and a read-only OBJ subset."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import InvalidPolyhedronError, MeshParseError
from .geometry import Polyhedron, orient_polyhedron

__all__ = ["parse_off", "write_off", "parse_obj", "load_mesh", "save_off"]

EMPTY_OFF = "OFF\n0 0 0\n"


def _content_lines(text):
    if isinstance(text, (bytes, bytearray)):
        try:
            text = text.decode("ascii")
        except UnicodeDecodeError as exc:
            raise MeshParseError(f"non-ASCII byte at offset {exc.start}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _build(verts, faces, face_lines) -> Polyhedron:
    """Assemble and check that every edge is shared by exactly two faces."""
    counts: dict = {}
    for f, lineno in zip(faces, face_lines):
        for i in range(len(f)):
            a, b = f[i], f[(i + 1) % len(f)]
            key = (a, b) if a < b else (b, a)
            c = counts.get(key, 0) + 1
            counts[key] = c
            if c > 2:
                raise MeshParseError(f"non-manifold edge {key} shared by {c} faces", lineno)
    for key, c in counts.items():
        if c != 2:
            raise MeshParseError(f"non-manifold edge {key}: open boundary (1 face)")
    try:
        P = Polyhedron(np.array(verts, dtype=float).reshape(-1, 3), faces)
        return orient_polyhedron(P)
    except InvalidPolyhedronError as exc:
        raise MeshParseError(str(exc)) from exc
    except ValueError as exc:
        raise MeshParseError(f"degenerate face: {exc}") from exc


def parse_off(text) -> Polyhedron:
    """Parse ASCII OFF (str or bytes).

    Faces are ``k i1 ... ik``; trailing per-face colour values are ignored.
    Normals are computed from the winding.  ``OFF\\n0 0 0`` parses to an
    empty polyhedron.
    """
    lines = _content_lines(text)
    try:
        lineno, tokens = next(lines)
    except StopIteration:
        raise MeshParseError("empty file", 1) from None
    if tokens[0] != "OFF":
        raise MeshParseError(f"expected 'OFF' header, got {tokens[0]!r}", lineno)
    tokens = tokens[1:]
    if not tokens:
        try:
            lineno, tokens = next(lines)
        except StopIteration:
            raise MeshParseError("missing counts line", lineno + 1) from None
    try:
        nv, nf = int(tokens[0]), int(tokens[1])
    except (ValueError, IndexError):
        raise MeshParseError("counts line must be 'V F E'", lineno) from None
    if nv < 0 or nf < 0:
        raise MeshParseError("negative element count", lineno)

    verts = []
    for _ in range(nv):
        try:
            lineno, tokens = next(lines)
        except StopIteration:
            raise MeshParseError(f"count mismatch: expected {nv} vertices, got {len(verts)}",
                                 lineno + 1) from None
        if len(tokens) < 3:
            raise MeshParseError("vertex line needs 3 coordinates", lineno)
        try:
            xyz = [float(t) for t in tokens[:3]]
        except ValueError:
            raise MeshParseError("bad vertex coordinate", lineno) from None
        if not all(np.isfinite(xyz)):
            raise MeshParseError("non-finite vertex coordinate", lineno)
        verts.append(xyz)

    faces, face_lines = [], []
    for _ in range(nf):
        try:
            lineno, tokens = next(lines)
        except StopIteration:
            raise MeshParseError(f"count mismatch: expected {nf} faces, got {len(faces)}",
                                 lineno + 1) from None
        try:
            k = int(tokens[0])
            idx = [int(t) for t in tokens[1:1 + k]]
        except ValueError:
            raise MeshParseError("bad face record", lineno) from None
        if k < 3 or len(idx) != k:
            raise MeshParseError(f"face needs {max(k, 3)} indices", lineno)
        for i in idx:
            if not 0 <= i < nv:
                raise MeshParseError(f"index out of range ({i} not in [0, {nv}))", lineno)
        if len(set(idx)) != k:
            raise MeshParseError("face repeats a vertex", lineno)
        faces.append(tuple(idx))
        face_lines.append(lineno)

    extra = next(lines, None)
    if extra is not None:
        raise MeshParseError("count mismatch: unexpected data after last face", extra[0])
    if nv == 0 and nf == 0:
        return Polyhedron.empty()
    return _build(verts, faces, face_lines)


def write_off(P: Polyhedron | None) -> str:
    """OFF text with 17 significant digits, so parsing restores every bit.

    ``None`` or an empty polyhedron gives the ``OFF\\n0 0 0`` sentinel.
    """
    if P is None or P.n_verts == 0:
        return EMPTY_OFF
    out = [f"OFF\n{P.n_verts} {P.n_faces} 0\n"]
    out.extend(f"{x:.17g} {y:.17g} {z:.17g}\n" for x, y, z in P.verts.tolist())
    out.extend(f"{len(f)} {' '.join(map(str, f))}\n" for f in P.faces)
    return "".join(out)


def parse_obj(text) -> Polyhedron:
    """``v`` and ``f`` records only; ``f`` accepts ``i/t/n`` and negative indices."""
    verts, faces, face_lines = [], [], []
    for lineno, tokens in _content_lines(text):
        tag = tokens[0]
        if tag == "v":
            try:
                verts.append([float(t) for t in tokens[1:4]])
            except ValueError:
                raise MeshParseError("bad vertex coordinate", lineno) from None
            if len(verts[-1]) != 3:
                raise MeshParseError("vertex line needs 3 coordinates", lineno)
        elif tag == "f":
            idx = []
            for t in tokens[1:]:
                try:
                    i = int(t.split("/", 1)[0])
                except ValueError:
                    raise MeshParseError(f"bad face index {t!r}", lineno) from None
                i = i - 1 if i > 0 else len(verts) + i
                if not 0 <= i < len(verts):
                    raise MeshParseError(f"index out of range ({t})", lineno)
                idx.append(i)
            if len(idx) < 3 or len(set(idx)) != len(idx):
                raise MeshParseError("face needs 3+ distinct vertices", lineno)
            faces.append(tuple(idx))
            face_lines.append(lineno)
    if not faces:
        raise MeshParseError("no faces in OBJ file")
    return _build(verts, faces, face_lines)


def load_mesh(path) -> Polyhedron:
    path = Path(path)
    data = path.read_bytes()
    if path.suffix.lower() == ".obj":
        return parse_obj(data)
    return parse_off(data)


def save_off(P: Polyhedron | None, path) -> None:
    Path(path).write_text(write_off(P))
