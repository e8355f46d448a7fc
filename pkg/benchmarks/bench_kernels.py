"""Benchmark: compiled kernels vs the pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--sizes small|full]

Covers the two hot paths behind `motion4d.kernels`: nearest-neighbor search
(Chamfer/F-score/ICP) and the z-buffer rasterizer (dataset rendering).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from motion4d import kernels
from motion4d.kernels import slowk


def timeit(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_nn(sizes):
    rng = np.random.default_rng(0)
    print(f"{'nn_search':<28}{'compiled':>12}{'python':>12}{'speedup':>9}")
    for n, k in sizes:
        q = rng.normal(size=(n, 3))
        r = rng.normal(size=(k, 3))
        if kernels.BACKEND == "compiled":
            fast = timeit(lambda: kernels.nn_search(q, r))
        else:
            fast = float("nan")
        slow = timeit(lambda: slowk.nn_search(q, r))
        ratio = slow / fast if fast == fast else float("nan")
        print(f"  {n:>6} x {k:<12}{fast * 1e3:>9.1f} ms{slow * 1e3:>9.1f} ms{ratio:>8.1f}x")


def bench_raster(sizes):
    rng = np.random.default_rng(1)
    print(f"{'raster_fill':<28}{'compiled':>12}{'python':>12}{'speedup':>9}")
    for nf, res in sizes:
        nv = nf * 3
        xy = rng.uniform(0, res, size=(nv, 2))
        depth = rng.uniform(-1, 1, size=nv)
        faces = np.arange(nv, dtype=np.int64).reshape(nf, 3)
        colors = rng.uniform(0, 1, size=(nv, 3))
        if kernels.BACKEND == "compiled":
            fast = timeit(lambda: kernels.raster_fill(xy, depth, faces, colors, res, res))
        else:
            fast = float("nan")
        slow = timeit(lambda: slowk.raster_fill(xy, depth, faces, colors, res, res))
        ratio = slow / fast if fast == fast else float("nan")
        print(f"  {nf:>5} tris @ {res}px{'':<6}{fast * 1e3:>9.1f} ms{slow * 1e3:>9.1f} ms{ratio:>8.1f}x")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", choices=("small", "full"), default="full")
    args = parser.parse_args()
    print(f"active backend: {kernels.BACKEND}")
    if args.sizes == "small":
        nn_sizes = [(1000, 1000), (5000, 5000)]
        raster_sizes = [(200, 64), (500, 128)]
    else:
        nn_sizes = [(1000, 1000), (10000, 10000), (50000, 50000)]
        raster_sizes = [(200, 64), (1000, 256), (3000, 256)]
    bench_nn(nn_sizes)
    bench_raster(raster_sizes)


if __name__ == "__main__":
    main()
