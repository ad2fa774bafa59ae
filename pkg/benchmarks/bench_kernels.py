#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the numpy fallback.

Covers the three hot kernels: hyperbolic-cross enumeration, the modular
injectivity check driving the prime search, and the per-candidate detection
gather.  Run after building the extension (`pip install -e .`); if the
compiled core is unavailable only the fallback column is filled.

Usage: python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from latfft._kernels import _core, fallback


def timeit(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def row(name, fb_fn, core_fn, repeat=3):
    fb = timeit(fb_fn, repeat)
    if _core is None:
        print(f"{name:<42} {fb:>9.3f}s {'-':>9}")
        return
    co = timeit(core_fn, repeat)
    print(f"{name:<42} {fb:>9.3f}s {co:>9.3f}s {fb / co:>7.1f}x")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true",
                        help="smaller instances (for CI smoke)")
    args = parser.parse_args()
    rng = np.random.default_rng(0)

    print(f"compiled core available: {_core is not None}")
    print(f"{'kernel':<42} {'numpy':>10} {'compiled':>9} {'speedup':>8}")

    # hyperbolic cross
    d, N = (6, 16) if args.quick else (8, 32)
    w = np.ones(d)
    row(f"hc_count(d={d}, N={N})",
        lambda: fallback.hc_count(d, float(N), w),
        lambda: _core.hc_count(d, float(N), w))
    row(f"hc_enumerate(d={d}, N={N})",
        lambda: fallback.hc_enumerate(d, float(N), w),
        lambda: _core.hc_enumerate(d, float(N), w), repeat=1)

    # injectivity scan across candidate primes
    n = 20_000 if args.quick else 100_000
    elems = rng.integers(-1000, 1001, size=(n, 3))
    primes = [1039, 1049, 1051, 1061, 1063, 1069, 1087, 1091, 1093, 1097]

    def fb_scan():
        for p in primes:
            fallback.rows_injective_mod(elems, p)

    def core_scan():
        for p in primes:
            _core.rows_injective_mod(np.ascontiguousarray(elems), p)

    row(f"rows_injective_mod(n={n}, 10 primes)", fb_scan, core_scan)

    # detection gather
    n = 200_000 if args.quick else 1_000_000
    M, L, dd = 10_331, 37, 3
    cand = rng.integers(0, M, size=(n, dd))
    zmat = rng.integers(0, M, size=(L, dd))
    ghat = rng.normal(size=(L, M)) + 1j * rng.normal(size=(L, M))
    ghat[np.abs(ghat) < 1.2] = 0.0
    row(f"detect_gather(n={n}, L={L}, medians)",
        lambda: fallback.detect_gather(cand, zmat, M, ghat, 1e-9, L / 2, True),
        lambda: _core.detect_gather(
            np.ascontiguousarray(cand), np.ascontiguousarray(zmat), M,
            np.ascontiguousarray(ghat), 1e-9, L / 2, True), repeat=1)


if __name__ == "__main__":
    main()
