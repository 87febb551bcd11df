"""Benchmark the numba kernels against the pure-numpy fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--rows 512] [--cols 1024]

Loads both implementations directly (independent of QUANTCONF_NUMBA), checks
they agree, and reports timings.
"""

import argparse
import time

import numpy as np
from numba import njit

from quantconf._kernels import (
    _compensated_loop_loop,
    _compensated_loop_np,
    _rtn_rows_loop,
    _rtn_rows_np,
)


def timeit(fn, *args, repeats=5):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--rows", type=int, default=512)
    parser.add_argument("--cols", type=int, default=1024)
    parser.add_argument("--group", type=int, default=128)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    w = rng.normal(size=(args.rows, args.cols))
    maxq = 7.0

    rtn_nb = njit(cache=True)(_rtn_rows_loop)
    comp_nb = njit(cache=True)(_compensated_loop_loop)

    # warm up JIT
    rtn_nb(w[:2, : args.group].copy(), args.group, maxq)

    t_np, (c_np, s_np) = timeit(_rtn_rows_np, w, args.group, maxq)
    t_nb, (c_nb, s_nb) = timeit(rtn_nb, w, args.group, maxq)
    assert np.array_equal(c_np, c_nb) and np.allclose(s_np, s_nb)
    print(f"rtn_rows      {args.rows}x{args.cols} g={args.group}: "
          f"numpy {t_np * 1e3:8.2f} ms | numba {t_nb * 1e3:8.2f} ms "
          f"| speedup {t_np / t_nb:5.2f}x")

    n_in = min(args.cols, 256)
    wc = rng.normal(size=(args.rows, n_in))
    x = rng.normal(size=(32, n_in))
    h = 2.0 * x.T @ x
    h += 0.01 * np.mean(np.diag(h)) * np.eye(n_in)
    hinv_u = np.linalg.cholesky(np.linalg.inv(h)).T

    comp_nb(wc[:2].copy(), hinv_u, args.group, maxq)  # warm up

    t_np, (c_np, s_np) = timeit(_compensated_loop_np, wc.copy(), hinv_u, args.group, maxq)
    t_nb, (c_nb, s_nb) = timeit(comp_nb, wc.copy(), hinv_u, args.group, maxq)
    assert np.array_equal(c_np, c_nb) and np.allclose(s_np, s_nb)
    print(f"compensated   {args.rows}x{n_in} g={args.group}: "
          f"numpy {t_np * 1e3:8.2f} ms | numba {t_nb * 1e3:8.2f} ms "
          f"| speedup {t_np / t_nb:5.2f}x")


if __name__ == "__main__":
    main()
