"""Batch kernel runs over OFF directories, CSV reports and the scaling fit."""
from __future__ import annotations

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .clipping import polyhedron_kernel
from .errors import PolyKernelError
from .generators import gen_refined_box
from .geometry import Polyhedron, Tolerances, aabb_bounds
from .offio import load_mesh
from .oracle import MAX_BRUTE_FORCE_FACES, brute_force_kernel, kernels_agree

__all__ = [
    "BenchRecord",
    "CSV_FIELDS",
    "TIMING_FIELDS",
    "process_model",
    "run_batch",
    "records_to_csv",
    "scaling_fit",
]

log = logging.getLogger(__name__)

MESH_SUFFIXES = (".off", ".obj")
TIMING_FIELDS = ("kernel_time_s", "oracle_time_s")


@dataclass
class BenchRecord:
    model_id: str
    n_vertices: int = 0
    n_faces: int = 0
    kernel_time_s: float = 0.0
    kernel_volume: float = 0.0
    is_empty: bool = False
    faces_skipped_coplanar: int = 0
    oracle_time_s: float | None = None
    oracle_agrees: bool | None = None
    error: str = ""


CSV_FIELDS = tuple(f.name for f in fields(BenchRecord))


def process_model(P: Polyhedron, model_id: str, oracle: bool = False,
                  tol_scale: float = 1.0) -> BenchRecord:
    """Time one kernel computation, optionally cross-checked by brute force."""
    rec = BenchRecord(model_id, P.n_verts, P.n_faces)
    tol = Tolerances.for_polyhedron(P, tol_scale)
    t0 = time.perf_counter()
    res = polyhedron_kernel(P, tol=tol)
    rec.kernel_time_s = time.perf_counter() - t0
    rec.kernel_volume = res.volume
    rec.is_empty = res.is_empty
    rec.faces_skipped_coplanar = res.faces_skipped_coplanar
    if oracle and P.n_faces <= MAX_BRUTE_FORCE_FACES:
        t0 = time.perf_counter()
        ref = brute_force_kernel(P, tol=tol)
        rec.oracle_time_s = time.perf_counter() - t0
        lo, hi = aabb_bounds(P)
        rec.oracle_agrees, _ = kernels_agree(res, ref, float(np.linalg.norm(hi - lo)))
    return rec


def _process_file(args) -> BenchRecord:
    path, oracle, tol_scale = args
    model_id = Path(path).stem
    try:
        P = load_mesh(path)
        return process_model(P, model_id, oracle, tol_scale)
    except (PolyKernelError, OSError) as exc:
        return BenchRecord(model_id, error=f"{type(exc).__name__}: {exc}")


def _mesh_files(directory) -> list:
    directory = Path(directory)
    if not directory.is_dir():
        raise NotADirectoryError(str(directory))
    return sorted(p for p in directory.iterdir() if p.suffix.lower() in MESH_SUFFIXES)


def run_batch(directory, oracle: bool = False, threads: int = 1, tol_scale: float = 1.0,
              csv_path=None) -> tuple[list, str]:
    """Kernel of every mesh in ``directory``.

    Returns the records sorted by model id and the CSV text (also written to
    ``csv_path`` if given).  ``threads > 1`` spreads whole models over worker
    processes; the output does not depend on it apart from timings.
    """
    jobs = [(str(p), oracle, tol_scale) for p in _mesh_files(directory)]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_process_file, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    else:
        records = [_process_file(j) for j in jobs]
    records.sort(key=lambda r: r.model_id)
    text = records_to_csv(records)
    if csv_path is not None:
        Path(csv_path).write_text(text)
    return records, text


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def records_to_csv(records, summary: bool = True) -> str:
    """CSV with one row per record and, if any, a final ``TOTAL`` row."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        row = asdict(r)
        w.writerow([_fmt(row[k]) for k in CSV_FIELDS])
    if summary and records:
        total = {k: None for k in CSV_FIELDS}
        total["model_id"] = "TOTAL"
        total["n_vertices"] = sum(r.n_vertices for r in records)
        total["n_faces"] = sum(r.n_faces for r in records)
        total["kernel_time_s"] = sum(r.kernel_time_s for r in records)
        total["is_empty"] = None
        timed = [r.oracle_time_s for r in records if r.oracle_time_s is not None]
        if timed:
            total["oracle_time_s"] = sum(timed)
            total["oracle_agrees"] = all(r.oracle_agrees for r in records if r.oracle_agrees is not None)
        errors = sum(1 for r in records if r.error)
        total["error"] = f"{errors} errors" if errors else ""
        w.writerow([_fmt(total[k]) for k in CSV_FIELDS])
    return buf.getvalue()


def scaling_fit(depths=range(1, 6), repeats: int = 5) -> dict:
    """Log-log slope of kernel time against vertex count on refined cubes.

    Each depth is timed ``repeats`` times and the minimum kept.
    """
    sizes, times = [], []
    for d in depths:
        P = gen_refined_box(d)
        polyhedron_kernel(P)  # warm-up
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            polyhedron_kernel(P)
            best = min(best, time.perf_counter() - t0)
        sizes.append(P.n_verts)
        times.append(best)
    slope, intercept = np.polyfit(np.log(sizes), np.log(times), 1)
    return {"depths": list(depths), "n_vertices": sizes, "times_s": times,
            "slope": float(slope), "intercept": float(intercept)}
