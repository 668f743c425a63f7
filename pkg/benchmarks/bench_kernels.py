#!/usr/bin/env python3
"""Time the jitted kernels against their pure-numpy twins.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

The same comparison can be forced package-wide by setting
TELEOPSIM_PURE_NUMPY=1, which makes teleopsim.kernels dispatch to the numpy
path everywhere.
"""

import argparse
import time

import numpy as np

from teleopsim import kernels


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if not kernels._HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    rng = np.random.default_rng(0)
    n = 250_000  # ~42 minutes of 100Hz steering samples
    t = np.arange(n) * 0.01
    u = 0.5 * np.sin(2 * np.pi * 0.2 * t) + 0.05 * rng.standard_normal(n)
    theta = np.roll(u, 40)
    max_lag = 750

    delta = 0.2 * np.sin(2 * np.pi * 0.1 * t)
    accel = np.full(n, 0.5)

    cases = [
        ("ncc_sweep (n=250k, 751 lags)",
         lambda: kernels._ncc_sweep_np(u, theta, max_lag),
         lambda: kernels._ncc_sweep_nb(u, theta, max_lag)),
        ("first_order_response (n=250k)",
         lambda: kernels._first_order_np(u * 0.9, 0.0488, 0.0),
         lambda: kernels._first_order_nb(u * 0.9, 0.0488, 0.0)),
        ("bicycle_rollout (n=250k)",
         lambda: kernels._bicycle_np(delta, accel, 2.57, 15.0, 0.05, 0.01,
                                     0.0, 0.0, 0.0, 0.0),
         lambda: kernels._bicycle_nb(delta, accel, 2.57, 15.0, 0.05, 0.01,
                                     0.0, 0.0, 0.0, 0.0)),
    ]

    print(f"{'kernel':38s} {'numpy':>10s} {'numba':>10s} {'speedup':>9s}")
    for name, np_fn, nb_fn in cases:
        nb_fn()  # JIT warmup outside the timed region
        t_np = timeit(np_fn, args.repeat)
        t_nb = timeit(nb_fn, args.repeat)
        print(f"{name:38s} {t_np * 1e3:8.1f}ms {t_nb * 1e3:8.1f}ms "
              f"{t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
