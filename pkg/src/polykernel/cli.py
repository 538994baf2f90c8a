"""Command-line interface.

Exit status: 0 on success, 1 on bad input or usage, 2 when an internal
invariant check fails.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

from . import __version__
from .bench import run_batch, scaling_fit
from .clipping import polyhedron_kernel
from .errors import InputError, InvariantViolation, PolyKernelError
from .generators import GeneratorSpec, generate
from .offio import load_mesh, save_off, write_off

log = logging.getLogger("polykernel")

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2

CLI_FAMILIES = {"tent": "tent", "tet": "tet_like", "voro": "voro_like", "box": "refined_box"}
# published per-dataset kernel times (1000 elements, C++), printed for context only
REFERENCE_TIMES_S = {"tet10": 0.29, "tet20": 0.49, "tet30": 0.63, "voro": 0.24}
BENCH_DATASETS = {"tet10": ("tet_like", 10), "tet20": ("tet_like", 20),
                  "tet30": ("tet_like", 30), "voro": ("voro_like", None)}
VORO_RANGE = range(6, 15)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def default_seed() -> int:
    raw = os.environ.get("POLYKERNEL_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"POLYKERNEL_SEED must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="polykernel", description="Kernel of a polyhedron by plane clipping.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    k = sub.add_parser("kernel", help="compute the kernel of one OFF/OBJ mesh")
    k.add_argument("input")
    k.add_argument("-o", "--output", help="write the kernel as OFF here")
    k.add_argument("--tol-scale", type=float, default=1.0, help="multiplies the classification tolerance")
    k.add_argument("--stats", action="store_true", help="print run statistics")
    k.add_argument("--debug", action="store_true", help="validate the solid after every cut")

    b = sub.add_parser("batch", help="kernels of every mesh in a directory")
    b.add_argument("directory")
    b.add_argument("--oracle", action="store_true", help="cross-check with brute force")
    b.add_argument("--threads", type=int, default=1)
    b.add_argument("--csv", dest="csv_path")
    b.add_argument("--tol-scale", type=float, default=1.0)

    g = sub.add_parser("gen", help="write synthetic polyhedra as OFF files")
    g.add_argument("--family", choices=sorted(CLI_FAMILIES), required=True)
    g.add_argument("--param", type=float, required=True)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("-o", "--output", required=True, help="output directory")

    be = sub.add_parser("bench", help="generate datasets, time them, fit scaling")
    be.add_argument("--families", default="tet10,tet20,tet30,voro",
                    help=f"comma list from {','.join(BENCH_DATASETS)}")
    be.add_argument("--count", type=int, default=1000)
    be.add_argument("--seed", type=int, default=None)
    be.add_argument("--oracle", action="store_true")
    be.add_argument("--threads", type=int, default=1)
    be.add_argument("--csv", dest="csv_path")
    be.add_argument("--workdir", help="keep generated datasets here")
    be.add_argument("--no-scaling", action="store_true")
    return p


def _cmd_kernel(args) -> int:
    P = load_mesh(args.input)
    t0 = time.perf_counter()
    res = polyhedron_kernel(P, tol_scale=args.tol_scale, debug=args.debug)
    elapsed = time.perf_counter() - t0
    if args.output:
        save_off(res.kernel, args.output)
    if args.stats or not args.output:
        print(f"input: {P.n_verts} vertices, {P.n_faces} faces")
        print(f"kernel: {'empty' if res.is_empty else 'non-empty'}")
        if not res.is_empty:
            print(f"kernel: {res.kernel.n_verts} vertices, {res.kernel.n_faces} faces")
        print(f"volume: {res.volume!r}")
        print(f"cuts performed: {res.cuts_performed}")
        print(f"coplanar faces skipped: {res.faces_skipped_coplanar}")
        print(f"time: {elapsed:.6f} s")
    return EXIT_OK


def _cmd_batch(args) -> int:
    records, text = run_batch(args.directory, oracle=args.oracle, threads=args.threads,
                              tol_scale=args.tol_scale, csv_path=args.csv_path)
    if not args.csv_path:
        sys.stdout.write(text)
    failed = sum(1 for r in records if r.error)
    disagree = sum(1 for r in records if r.oracle_agrees is False)
    total = sum(r.kernel_time_s for r in records)
    print(f"{len(records)} models, {failed} errors, {disagree} oracle disagreements, "
          f"kernel time {total:.4f} s", file=sys.stderr)
    return EXIT_OK


def _specs(family: str, param: float, count: int, seed: int) -> list:
    fam = CLI_FAMILIES[family]
    if fam != "tent" and param != int(param):
        raise InputError(f"--param for {family} must be an integer")
    return [GeneratorSpec(fam, param, seed + i) for i in range(count)]


def generate_dataset(specs, names, outdir) -> list:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    entries = []
    for spec, name in zip(specs, names):
        P = generate(spec)
        save_off(P, outdir / f"{name}.off")
        entries.append({"file": f"{name}.off", "family": spec.family, "parameter": spec.parameter,
                        "seed": spec.seed, "n_vertices": P.n_verts, "n_faces": P.n_faces})
    with open(outdir / "manifest.jsonl", "w") as fh:
        for e in entries:
            fh.write(json.dumps(e, sort_keys=True) + "\n")
    return entries


def _cmd_gen(args) -> int:
    if args.count < 1:
        raise InputError("--count must be positive")
    seed = default_seed() if args.seed is None else args.seed
    specs = _specs(args.family, args.param, args.count, seed)
    generate_dataset(specs, [f"{args.family}_{i}" for i in range(args.count)], args.output)
    print(f"wrote {args.count} {args.family} model(s) to {args.output}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    names = [f.strip() for f in args.families.split(",") if f.strip()]
    unknown = [n for n in names if n not in BENCH_DATASETS]
    if unknown:
        raise InputError(f"unknown dataset(s): {', '.join(unknown)}")
    rows = []
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(args.workdir) if args.workdir else Path(tmp)
        for name in names:
            fam, param = BENCH_DATASETS[name]
            specs = [GeneratorSpec(fam, param if param is not None else VORO_RANGE[i % len(VORO_RANGE)],
                                   seed + i) for i in range(args.count)]
            generate_dataset(specs, [f"{name}_{i:05d}" for i in range(args.count)], root / name)
            records, _ = run_batch(root / name, oracle=args.oracle, threads=args.threads,
                                   csv_path=root / f"{name}.csv")
            ok = [r for r in records if not r.error]
            row = {
                "dataset": name,
                "n_models": len(records),
                "vertices_min": min((r.n_vertices for r in ok), default=0),
                "vertices_max": max((r.n_vertices for r in ok), default=0),
                "kernel_time_s": sum(r.kernel_time_s for r in ok),
                "n_empty": sum(r.is_empty for r in ok),
                "n_errors": len(records) - len(ok),
                "oracle_agree": (sum(bool(r.oracle_agrees) for r in ok) if args.oracle else ""),
                "reference_time_s": REFERENCE_TIMES_S.get(name, ""),
            }
            rows.append(row)
            print(f"{name}: {row['n_models']} models, {row['vertices_min']}-{row['vertices_max']} vertices, "
                  f"{row['kernel_time_s']:.3f} s (reference C++ time {row['reference_time_s']} s), "
                  f"{row['n_errors']} errors")
    if rows:
        out = open(args.csv_path, "w", newline="") if args.csv_path else sys.stdout
        try:
            w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        finally:
            if out is not sys.stdout:
                out.close()
    if not args.no_scaling:
        fit = scaling_fit()
        print(f"scaling: refined cube depths {fit['depths']}, vertices {fit['n_vertices']}, "
              f"log-log slope {fit['slope']:.3f}")
    return EXIT_OK


COMMANDS = {"kernel": _cmd_kernel, "batch": _cmd_batch, "gen": _cmd_gen, "bench": _cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InvariantViolation as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PolyKernelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
