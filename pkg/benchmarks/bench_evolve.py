"""Benchmark the evolution kernel: compiled extension vs NumPy fallback.

Times `evolve_arrays` on deduplicated universes built from synthetic
pairs of increasing size, cross-checks that both backends return
byte-identical assignments, and reports end-to-end prior composition
timings per backend.

Usage:
    python3 benchmarks/bench_evolve.py [--sizes 64,128,224,512]
                                       [--repeats 5] [--seed 0]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from gbpc import engine
from gbpc.engine import EngineConfig, build_universe
from gbpc.imaging import ImagePair, LumaPlane
from gbpc.prior import gbpc
from gbpc import _evolve_py

try:
    from gbpc import _evolve_cy
except ImportError:
    _evolve_cy = None


def synthetic_pair(rng: np.random.Generator, size: int) -> ImagePair:
    """A pair with gradients, blobs and noise; looks like real imagery."""
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    base_a = 120.0 + 80.0 * np.sin(xx / 17.0) + 40.0 * np.cos(yy / 23.0)
    base_b = 90.0 + 100.0 * np.cos((xx + yy) / 29.0)
    for _ in range(4):
        cy, cx = rng.uniform(0, size, 2)
        rad = rng.uniform(4, size / 3)
        blob = 90.0 * np.exp(-(((yy - cy) ** 2 + (xx - cx) ** 2) / rad ** 2))
        if rng.random() < 0.5:
            base_a += blob
        else:
            base_b += blob
    base_a += rng.normal(0, 6, (size, size))
    base_b += rng.normal(0, 6, (size, size))
    a = np.clip(np.rint(base_a), 0, 255).astype(np.uint8)
    b = np.clip(np.rint(base_b), 0, 255).astype(np.uint8)
    return ImagePair(LumaPlane(a), LumaPlane(b), pair_id=f"bench{size}")


def best_of(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_kernels(pair: ImagePair, config: EngineConfig, repeats: int):
    """Per-backend kernel timings on one universe, plus a parity check."""
    universe = build_universe(pair)
    lo = np.minimum(universe.pair_la, universe.pair_lb).astype(np.float64)
    hi = np.maximum(universe.pair_la, universe.pair_lb).astype(np.float64)
    args = (lo, hi, float(config.delta_d), int(config.k), None)

    out_py = _evolve_py.evolve_arrays(*args)
    t_py = best_of(lambda: _evolve_py.evolve_arrays(*args), repeats)

    t_cy = None
    if _evolve_cy is not None:
        out_cy = _evolve_cy.evolve_arrays(*args)
        for lhs, rhs in zip(out_py[:4], out_cy[:4]):
            assert np.array_equal(lhs, rhs), "backend outputs diverge"
        assert out_py[4] == out_cy[4]
        t_cy = best_of(lambda: _evolve_cy.evolve_arrays(*args), repeats)

    return universe.n_balls, t_py, t_cy


def bench_end_to_end(pair: ImagePair, config: EngineConfig, repeats: int):
    """Full prior composition per backend by swapping the dispatch."""
    saved = engine._kernel
    timings = {}
    try:
        engine._kernel = _evolve_py
        timings["numpy"] = best_of(lambda: gbpc(pair, config), repeats)
        if _evolve_cy is not None:
            engine._kernel = _evolve_cy
            timings["compiled"] = best_of(lambda: gbpc(pair, config), repeats)
    finally:
        engine._kernel = saved
    return timings


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="64,128,224,512",
                        help="comma list of square pair sizes")
    parser.add_argument("--repeats", type=int, default=5,
                        help="repeats per measurement (best is kept)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--k", type=int, default=6)
    parser.add_argument("--delta-d", type=float, default=10.0, dest="delta_d")
    args = parser.parse_args(argv)

    config = EngineConfig(delta_d=args.delta_d, k=args.k)
    sizes = [int(s) for s in args.sizes.split(",") if s]
    rng = np.random.default_rng(args.seed)

    print(f"active backend: {engine.BACKEND}"
          + ("" if _evolve_cy is not None else " (compiled unavailable)"))
    print(f"k={config.k} delta_d={config.delta_d} repeats={args.repeats}")
    print()
    header = f"{'size':>6} {'balls':>7} {'numpy ms':>10} {'compiled ms':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for size in sizes:
        pair = synthetic_pair(rng, size)
        n_balls, t_py, t_cy = bench_kernels(pair, config, args.repeats)
        if t_cy is None:
            print(f"{size:>6} {n_balls:>7} {t_py * 1e3:>10.3f} {'-':>12} {'-':>8}")
        else:
            print(f"{size:>6} {n_balls:>7} {t_py * 1e3:>10.3f} "
                  f"{t_cy * 1e3:>12.3f} {t_py / t_cy:>7.1f}x")

    print()
    pair = synthetic_pair(rng, 224)
    timings = bench_end_to_end(pair, config, args.repeats)
    parts = [f"{name}: {t * 1e3:.2f} ms" for name, t in timings.items()]
    print("end-to-end prior composition, 224x224: " + ", ".join(parts))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
