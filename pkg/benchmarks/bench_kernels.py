#!/usr/bin/env python3
"""Time the numba kernels against their numpy fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]

The dispatch flag (CLEANSELECT_NUMBA) is irrelevant here: both builds are
imported and timed directly.
"""

import argparse
import time

import numpy as np

from cleanselect import _accel, _kernels


def time_call(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_em(repeats):
    rows = []
    for n in (1_000, 10_000, 100_000):
        rng = np.random.default_rng(n)
        v = np.sort(np.concatenate([rng.normal(0, 1, n // 2), rng.normal(8, 2, n - n // 2)]))
        var = float(np.var(v))
        args = (
            v,
            float(np.percentile(v, 10)),
            float(np.percentile(v, 90)),
            var,
            var,
            0.5,
            100,
            1e-8,
            max(1e-6 * var, 1e-12),
        )
        t_np = time_call(_kernels.em_fit_numpy, *args, repeats=repeats)
        t_jit = time_call(_kernels.em_fit_jit, *args, repeats=repeats) if _accel.HAVE_NUMBA else float("nan")
        rows.append(("em_fit", f"n={n}", t_np, t_jit))
    return rows


def bench_knn(repeats):
    rows = []
    for n, k in ((500, 20), (2_000, 50), (4_000, 50)):
        rng = np.random.default_rng(n)
        x = rng.normal(size=(n, 32))
        xn = x / np.linalg.norm(x, axis=1, keepdims=True)
        sims = xn @ xn.T
        np.fill_diagonal(sims, -2.0)
        labels = np.ascontiguousarray(rng.integers(0, 10, size=n))
        t_np = time_call(_kernels.knn_counts_numpy, sims, labels, k, 10, repeats=repeats)
        t_jit = (
            time_call(_kernels.knn_counts_jit, sims, labels, k, 10, repeats=repeats)
            if _accel.HAVE_NUMBA
            else float("nan")
        )
        rows.append(("knn_counts", f"n={n} k={k}", t_np, t_jit))
    return rows


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if _accel.HAVE_NUMBA:
        _kernels.warmup()  # exclude JIT compile time from the table
    else:
        print("numba not installed; timing the numpy build only")

    rows = bench_em(args.repeats) + bench_knn(args.repeats)
    print(f"{'kernel':<12} {'size':<14} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for kernel, size, t_np, t_jit in rows:
        speedup = t_np / t_jit if t_jit == t_jit and t_jit > 0 else float("nan")
        print(f"{kernel:<12} {size:<14} {t_np * 1e3:>9.2f}ms {t_jit * 1e3:>9.2f}ms {speedup:>7.1f}x")


if __name__ == "__main__":
    main()
