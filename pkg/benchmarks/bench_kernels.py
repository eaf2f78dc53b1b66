"""Compiled vs pure-numpy trigonometric evaluation.

Run with ``python3 benchmarks/bench_kernels.py``.  Prints one line per
problem size with the best-of-N wall time of each backend and the speedup.
"""
import argparse
import time

import numpy as np

from wavebreak import _kernels_py

try:
    from wavebreak import _kernels
except ImportError:  # extension not built
    _kernels = None


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'modes':>6s} {'points':>8s} {'rows':>4s} {'cython[s]':>10s} {'numpy[s]':>10s} {'speedup':>8s} {'max|diff|':>10s}")
    for modes, points, rows in ((129, 1, 3), (257, 2_000, 1), (513, 20_000, 1), (257, 200_000, 1), (1025, 50_000, 2)):
        coef = np.ascontiguousarray(
            (rng.standard_normal((rows, modes)) + 1j * rng.standard_normal((rows, modes))) / np.arange(1, modes + 1))
        pts = rng.uniform(-20, 20, points)
        args_ = (coef, np.pi / 20, -20.0, pts)
        tp = best_time(lambda: _kernels_py.trig_sum(*args_), args.repeat)
        if _kernels is None:
            print(f"{modes:6d} {points:8d} {rows:4d} {'n/a':>10s} {tp:10.4g} {'n/a':>8s}")
            continue
        tc = best_time(lambda: _kernels.trig_sum(*args_), args.repeat)
        diff = np.max(np.abs(_kernels.trig_sum(*args_) - _kernels_py.trig_sum(*args_)))
        print(f"{modes:6d} {points:8d} {rows:4d} {tc:10.4g} {tp:10.4g} {tp / tc:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
