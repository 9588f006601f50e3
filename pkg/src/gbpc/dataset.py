"""Dataset generation and parameter sweeps.

build_dataset turns registered source pairs into a training corpus:
each pair is capped to a maximum size, cut into full patch windows,
optionally flip-augmented, and every patch gets a composed prior with
its coefficient sidecar.  The corpus is described by a JSONL manifest
(header line, then one entry per patch) written last, so a manifest
never references a missing file.

Flip draws are made sequentially per patch before any work is
scheduled, which keeps outputs byte-identical for a given seed no
matter how many workers run the composition.

sweep evaluates the prior quality metrics over a (k, delta_d) grid and
reports per-cell means across pairs as CSV.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import EngineConfig
from .imaging import (ImagePair, Patch, atomic_write_text, extract_patches,
                      resize_to_cap, save_luma_png)
from .metrics import METRIC_COLUMNS, compute_report
from .prior import DEFAULT_M, gbpc, save_prior

MANIFEST_SCHEMA = 1
DEFAULT_CAP = (640, 480)

__all__ = [
    "MANIFEST_SCHEMA",
    "DEFAULT_CAP",
    "DatasetResult",
    "build_dataset",
    "load_manifest",
    "resolve_jobs",
    "sweep",
    "sweep_to_csv",
]


@dataclass(frozen=True)
class DatasetResult:
    """Where the corpus landed and what it contains."""

    manifest_path: Path
    n_pairs: int
    n_entries: int
    n_gated: int


def resolve_jobs(jobs: int | None = None) -> int:
    """Worker count: explicit argument, else GBPC_JOBS, else cpu count."""
    if jobs is None:
        env = os.environ.get("GBPC_JOBS", "").strip()
        if env:
            jobs = int(env)
        else:
            jobs = os.cpu_count() or 1
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    return jobs


def _compose_one(args):
    """Worker task: compose and write one patch's files."""
    (patch_dir, prior_dir, patch, config, m) = args
    pair = patch.pair
    a_path = patch_dir / f"{pair.pair_id}_a.png"
    b_path = patch_dir / f"{pair.pair_id}_b.png"
    prior_path = prior_dir / f"{pair.pair_id}_prior.png"
    save_luma_png(pair.a, a_path)
    save_luma_png(pair.b, b_path)
    result = gbpc(pair, config, m)
    save_prior(result, prior_path)
    return {
        "id": pair.pair_id,
        "patch_a": a_path,
        "patch_b": b_path,
        "prior": prior_path,
        "sidecar": prior_path.with_suffix(".json"),
        "r_pos": result.r_pos,
        "r_bnd": result.r_bnd,
        "gated": result.gated,
        "pair_id": patch.source_id,
        "origin": list(patch.origin),
        "flip_h": patch.flip_h,
        "flip_v": patch.flip_v,
    }


def build_dataset(pairs: list[ImagePair], out_dir: str | Path,
                  size: int = 128, stride: int = 64,
                  config: EngineConfig | None = None, m: float = DEFAULT_M,
                  seed: int = 0, flips: bool = True,
                  cap: tuple[int, int] = DEFAULT_CAP,
                  jobs: int | None = None) -> DatasetResult:
    """Generate the patch corpus for `pairs` under `out_dir`.

    Layout: patches/<id>_{a,b}.png, priors/<id>_prior.{png,json} and
    manifest.jsonl at the top.  Manifest paths are relative to the
    manifest so the corpus can be moved wholesale.
    """
    if config is None:
        config = EngineConfig()
    out_dir = Path(out_dir)
    patch_dir = out_dir / "patches"
    prior_dir = out_dir / "priors"
    patch_dir.mkdir(parents=True, exist_ok=True)
    prior_dir.mkdir(parents=True, exist_ok=True)
    jobs = resolve_jobs(jobs)

    # Draw all augmentation decisions up front, sequentially, so the
    # corpus does not depend on worker scheduling.
    rng = np.random.default_rng(seed)
    patches: list[Patch] = []
    for pair in pairs:
        capped = resize_to_cap(pair, *cap)
        patches.extend(extract_patches(capped, size, stride,
                                       flips=flips, rng=rng))

    tasks = [(patch_dir, prior_dir, p, config, m) for p in patches]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(_compose_one, tasks, chunksize=8))
    else:
        entries = [_compose_one(t) for t in tasks]

    manifest_path = out_dir / "manifest.jsonl"
    header = {
        "schema": MANIFEST_SCHEMA,
        "seed": seed,
        "config": {
            "size": size,
            "stride": stride,
            "k": config.k,
            "delta_d": config.delta_d,
            "m": m,
            "cap": list(cap),
            "flips": flips,
        },
        "n_pairs": len(pairs),
        "n_entries": len(entries),
    }
    lines = [json.dumps(header, sort_keys=True)]
    for entry in entries:
        entry = dict(entry)
        for key in ("patch_a", "patch_b", "prior", "sidecar"):
            entry[key] = os.path.relpath(entry[key], out_dir)
        lines.append(json.dumps(entry, sort_keys=True))
    atomic_write_text(manifest_path, "\n".join(lines) + "\n")

    return DatasetResult(manifest_path, len(pairs), len(entries),
                         sum(1 for e in entries if e["gated"]))


def load_manifest(path: str | Path) -> tuple[dict, list[dict]]:
    """Read a manifest back as (header, entries); validates the schema."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"manifest not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise ValueError(f"manifest {path} is empty")
    header = json.loads(lines[0])
    if header.get("schema") != MANIFEST_SCHEMA:
        raise ValueError(
            f"manifest {path} has schema {header.get('schema')!r}, "
            f"expected {MANIFEST_SCHEMA}")
    return header, [json.loads(line) for line in lines[1:]]


def _sweep_cell(args):
    pairs, k, delta_d, m = args
    config = EngineConfig(delta_d=delta_d, k=k)
    sums = np.zeros(len(METRIC_COLUMNS))
    for pair in pairs:
        result = gbpc(pair, config, m)
        rep = compute_report(result.prior_plane(), pair.a, pair.b)
        sums += np.array(rep.values())
    means = sums / len(pairs)
    return {"k": k, "delta_d": delta_d,
            **dict(zip(METRIC_COLUMNS, means.tolist()))}


def sweep(pairs: list[ImagePair], ks: list[int], delta_ds: list[float],
          m: float = DEFAULT_M, jobs: int | None = None) -> list[dict]:
    """Metric means over `pairs` for every (k, delta_d) grid cell.

    Returns one row dict per cell, k-major then delta_d, each with the
    full metric battery averaged across pairs.
    """
    if not pairs:
        raise ValueError("sweep needs at least one pair")
    jobs = resolve_jobs(jobs)
    cells = [(pairs, k, dd, m) for k in ks for dd in delta_ds]
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_cell, cells))
    return [_sweep_cell(c) for c in cells]


def sweep_to_csv(rows: list[dict]) -> str:
    """Render sweep rows as CSV in the fixed metric column order."""
    out = ["k,delta_d," + ",".join(METRIC_COLUMNS)]
    for row in rows:
        cells = [repr(row["k"]), repr(row["delta_d"])]
        cells += [repr(row[c]) for c in METRIC_COLUMNS]
        out.append(",".join(cells))
    return "\n".join(out) + "\n"
