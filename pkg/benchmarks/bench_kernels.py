#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

The dynamic programs dominate simulation campaigns (every analysis step
evaluates K realizations x N^2 pairs), so the speedup here translates
almost directly into campaign runtime.

Usage: python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from fusetrack import _kernels_py

try:
    from fusetrack import _kernels
except ImportError:
    _kernels = None


def timeit(fn, args_list, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_pairwise(name, fn_c, fn_py, sizes, count, rng):
    print(f"\n{name}")
    print(f"  {'size':>10} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for n in sizes:
        args = [
            (rng.normal(0, 5, (n, 2)), rng.normal(0, 5, (n, 2)))
            for _ in range(count)
        ]
        t_py = timeit(fn_py, args)
        if fn_c is None:
            print(f"  {n:>7}x{n:<3} {t_py / count * 1e3:>8.3f}ms {'-':>10} {'-':>8}")
            continue
        t_c = timeit(fn_c, args)
        print(
            f"  {n:>7}x{n:<3} {t_py / count * 1e3:>8.3f}ms "
            f"{t_c / count * 1e3:>8.3f}ms {t_py / t_c:>7.1f}x"
        )


def bench_sgm(sizes, rng):
    print("\nsgm_aggregate (8 directions)")
    print(f"  {'volume':>14} {'python':>10} {'compiled':>10} {'speedup':>8}")
    dirs = [(0, 1), (0, -1), (1, 0), (-1, 0), (1, 1), (1, -1), (-1, 1), (-1, -1)]
    for h, w, d in sizes:
        cost = rng.uniform(0, 255, (h, w, d))
        args = [(cost, dy, dx, 10.0, 120.0) for dy, dx in dirs]
        t_py = timeit(_kernels_py.sgm_aggregate, args)
        if _kernels is None:
            print(f"  {h:>4}x{w}x{d:<4} {t_py * 1e3:>8.1f}ms {'-':>10} {'-':>8}")
            continue
        t_c = timeit(_kernels.sgm_aggregate, args)
        print(
            f"  {h:>4}x{w}x{d:<4} {t_py * 1e3:>8.1f}ms {t_c * 1e3:>8.1f}ms "
            f"{t_py / t_c:>7.1f}x"
        )


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller sizes")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    if _kernels is None:
        print("compiled extension not available; timing the fallback only")

    sizes = (25, 50, 100) if args.quick else (25, 50, 100, 200)
    count = 20
    bench_pairwise(
        "frechet_dp",
        _kernels.frechet_dp if _kernels else None,
        _kernels_py.frechet_dp,
        sizes,
        count,
        rng,
    )
    bench_pairwise(
        "dtw_dp",
        _kernels.dtw_dp if _kernels else None,
        _kernels_py.dtw_dp,
        sizes,
        count,
        rng,
    )
    vol_sizes = [(64, 64, 16)] if args.quick else [(64, 64, 16), (128, 128, 32)]
    bench_sgm(vol_sizes, rng)

    # end-to-end: one association analysis step at campaign shape
    from fusetrack import kernels

    n_tags, k_real, n_pts = 5, 25, 50
    cam = [rng.normal(0, 5, (n_pts, 2)) for _ in range(n_tags)]
    reals = [rng.normal(0, 5, (k_real, n_pts, 2)) for _ in range(n_tags)]
    t0 = time.perf_counter()
    for c in cam:
        for r in reals:
            for real in r:
                kernels.frechet_dp(c, real)
    dt = time.perf_counter() - t0
    print(
        f"\nanalysis-step shape ({n_tags} tags, {k_real} realizations, "
        f"{n_pts} samples): {dt * 1e3:.1f}ms per step with the "
        f"'{kernels.BACKEND}' backend"
    )


if __name__ == "__main__":
    main()
