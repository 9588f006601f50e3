"""Command line front end.

Subcommands:

* prior    compose the fusion prior for one pair
* dataset  build the patch corpus + JSONL manifest
* metrics  evaluate a fused image against its sources
* sweep    metric means over a (k, delta_d) grid
* kernels  emit kernel/loss parity fixtures

Exit codes: 0 success, 2 usage error, 3 missing input file, 4 invalid
input or contract violation.  Every subcommand takes --json for
machine-readable output.  Worker counts come from --jobs, else the
GBPC_JOBS environment variable, else the CPU count.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .engine import BACKEND, EngineConfig
from .imaging import DecodeError, DimensionMismatch, atomic_write_text, load_pair, load_luma
from .dataset import (DEFAULT_CAP, build_dataset, resolve_jobs, sweep,
                      sweep_to_csv)
from .kernels import reference_fixtures
from .metrics import compute_report, report_to_json, reports_to_csv
from .prior import DEFAULT_M, gbpc, save_prior

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING_INPUT = 3
EXIT_INVALID_INPUT = 4


def _parse_range(text: str, step: float, is_int: bool) -> list:
    """Expand 'lo..hi' with a step, or a comma list, or a single value."""
    conv = int if is_int else float
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)
        lo, hi = conv(lo_s), conv(hi_s)
        if step <= 0:
            raise ValueError("step must be positive")
        values = []
        v = lo
        while v <= hi + (0 if is_int else 1e-9):
            values.append(conv(v))
            v += step
        return values
    if "," in text:
        return [conv(part) for part in text.split(",") if part]
    return [conv(text)]


def _read_pair_list(path: str) -> list[tuple[str, str]]:
    """Pairs file: two whitespace-separated image paths per line."""
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"pair list not found: {p}")
    pairs = []
    for lineno, line in enumerate(p.read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{p}:{lineno}: expected two paths per line")
        pairs.append((parts[0], parts[1]))
    if not pairs:
        raise ValueError(f"{p} lists no pairs")
    return pairs


def _collect_pairs(args) -> list:
    specs: list[tuple[str, str]] = []
    if args.list:
        specs.extend(_read_pair_list(args.list))
    if args.images:
        if len(args.images) % 2 != 0:
            raise ValueError("positional images must come in A B pairs")
        specs.extend(zip(args.images[0::2], args.images[1::2]))
    if not specs:
        raise ValueError("no input pairs given (use --list or positional paths)")
    return [load_pair(a, b) for a, b in specs]


def _engine_config(args) -> EngineConfig:
    return EngineConfig(delta_d=args.delta_d, k=args.k)


def _add_engine_flags(sub):
    sub.add_argument("--k", type=int, default=6,
                     help="split threshold multiplier")
    sub.add_argument("--delta-d", type=float, default=10.0, dest="delta_d",
                     help="expansion step on the luminance axis")
    sub.add_argument("--m", type=float, default=DEFAULT_M,
                     help="modality gate threshold on dr_pos")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbpc",
        description="Granular-ball fusion priors, metrics and dataset tooling",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("prior", help="compose the fusion prior for one pair",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--a", required=True, help="source image A")
    p.add_argument("--b", required=True, help="source image B")
    p.add_argument("--out", required=True, help="output prior PNG path")
    _add_engine_flags(p)
    p.add_argument("--trace", default=None,
                   help="write the evolution event log to this JSON file")
    p.add_argument("--json", action="store_true", help="print a JSON summary")

    p = subs.add_parser("dataset", help="build the patch corpus + manifest",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("images", nargs="*",
                   help="source images as alternating A B paths")
    p.add_argument("--list", default=None,
                   help="text file with two image paths per line")
    p.add_argument("--out", required=True, help="output corpus directory")
    p.add_argument("--size", type=int, default=128, help="patch size")
    p.add_argument("--stride", type=int, default=64, help="patch stride")
    _add_engine_flags(p)
    p.add_argument("--seed", type=int, default=0, help="augmentation seed")
    p.add_argument("--no-flips", action="store_true",
                   help="disable flip augmentation")
    p.add_argument("--cap-w", type=int, default=DEFAULT_CAP[0],
                   help="width cap before patching")
    p.add_argument("--cap-h", type=int, default=DEFAULT_CAP[1],
                   help="height cap before patching")
    p.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default: GBPC_JOBS or CPU count)")
    p.add_argument("--json", action="store_true", help="print a JSON summary")

    p = subs.add_parser("metrics", help="evaluate a fused image",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--fused", required=True, help="fused image")
    p.add_argument("--a", required=True, help="source image A")
    p.add_argument("--b", required=True, help="source image B")
    p.add_argument("--pair-id", default="", help="pair id for the report row")
    p.add_argument("--method", default="", help="method label for the report row")
    p.add_argument("--json", action="store_true",
                   help="print JSON instead of CSV")

    p = subs.add_parser("sweep", help="metric means over a (k, delta_d) grid",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("images", nargs="*",
                   help="source images as alternating A B paths")
    p.add_argument("--list", default=None,
                   help="text file with two image paths per line")
    p.add_argument("--k", default="6",
                   help="k values: single, comma list, or lo..hi range")
    p.add_argument("--k-step", type=int, default=1, dest="k_step",
                   help="step for a lo..hi k range")
    p.add_argument("--delta-d", default="10", dest="delta_d",
                   help="delta_d values: single, comma list, or lo..hi range")
    p.add_argument("--delta-d-step", type=float, default=1.0, dest="delta_d_step",
                   help="step for a lo..hi delta_d range")
    p.add_argument("--m", type=float, default=DEFAULT_M,
                   help="modality gate threshold on dr_pos")
    p.add_argument("--out", default=None,
                   help="write CSV here instead of stdout")
    p.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default: GBPC_JOBS or CPU count)")
    p.add_argument("--json", action="store_true",
                   help="print JSON rows instead of CSV")

    p = subs.add_parser("kernels", help="emit kernel/loss parity fixtures",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--out", required=True, help="output fixture JSON path")
    p.add_argument("--size", type=int, default=32, help="fixture plane size")
    p.add_argument("--cases", type=int, default=20, help="number of cases")
    p.add_argument("--seed", type=int, default=7, help="fixture seed")
    p.add_argument("--json", action="store_true", help="print a JSON summary")

    return parser


def _cmd_prior(args) -> int:
    pair = load_pair(args.a, args.b)
    result = gbpc(pair, _engine_config(args), args.m,
                  collect_trace=args.trace is not None)
    sidecar = save_prior(result, args.out)
    if args.trace is not None:
        atomic_write_text(args.trace, json.dumps(result.trace) + "\n")
    summary = {
        "prior": str(args.out),
        "sidecar": str(sidecar),
        "r_pos": result.r_pos,
        "r_bnd": result.r_bnd,
        "dr_pos": result.dr_pos,
        "dr_bnd": result.dr_bnd,
        "gated": result.gated,
        "k": result.config.k,
        "delta_d": result.config.delta_d,
        "m": result.m,
        "backend": BACKEND,
    }
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        print(f"prior -> {args.out} (r_pos={result.r_pos:.6g}, "
              f"r_bnd={result.r_bnd:.6g}, gated={result.gated})")
    return EXIT_OK


def _cmd_dataset(args) -> int:
    pairs = _collect_pairs(args)
    result = build_dataset(
        pairs, args.out, size=args.size, stride=args.stride,
        config=_engine_config(args), m=args.m, seed=args.seed,
        flips=not args.no_flips, cap=(args.cap_w, args.cap_h),
        jobs=resolve_jobs(args.jobs))
    summary = {
        "manifest": str(result.manifest_path),
        "n_pairs": result.n_pairs,
        "n_entries": result.n_entries,
        "n_gated": result.n_gated,
    }
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        print(f"manifest -> {result.manifest_path} "
              f"({result.n_entries} entries from {result.n_pairs} pairs, "
              f"{result.n_gated} gated)")
    return EXIT_OK


def _cmd_metrics(args) -> int:
    fused, _ = load_luma(args.fused)
    a, _ = load_luma(args.a)
    b, _ = load_luma(args.b)
    if fused.data.shape != a.data.shape or fused.data.shape != b.data.shape:
        raise DimensionMismatch(
            f"metrics need equal shapes, got fused {fused.data.shape}, "
            f"a {a.data.shape}, b {b.data.shape}")
    report = compute_report(fused, a, b, pair_id=args.pair_id,
                            method=args.method)
    if args.json:
        print(report_to_json(report))
    else:
        sys.stdout.write(reports_to_csv([report]))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    pairs = _collect_pairs(args)
    ks = _parse_range(args.k, args.k_step, is_int=True)
    dds = _parse_range(args.delta_d, args.delta_d_step, is_int=False)
    rows = sweep(pairs, ks, dds, m=args.m, jobs=resolve_jobs(args.jobs))
    if args.json:
        text = "\n".join(json.dumps(row, sort_keys=True) for row in rows) + "\n"
    else:
        text = sweep_to_csv(rows)
    if args.out:
        atomic_write_text(args.out, text)
        print(f"sweep -> {args.out} ({len(rows)} grid cells)")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_kernels(args) -> int:
    fixtures = reference_fixtures(size=args.size, n_cases=args.cases,
                                  seed=args.seed)
    atomic_write_text(args.out, json.dumps(fixtures) + "\n")
    summary = {"fixtures": str(args.out), "cases": len(fixtures["cases"]),
               "size": fixtures["size"], "seed": fixtures["seed"]}
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        print(f"fixtures -> {args.out} ({summary['cases']} cases, "
              f"{summary['size']}x{summary['size']})")
    return EXIT_OK


_COMMANDS = {
    "prior": _cmd_prior,
    "dataset": _cmd_dataset,
    "metrics": _cmd_metrics,
    "sweep": _cmd_sweep,
    "kernels": _cmd_kernels,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"gbpc: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except (DecodeError, DimensionMismatch, ValueError) as exc:
        print(f"gbpc: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
