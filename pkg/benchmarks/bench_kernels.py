"""Time the compiled summation kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly, so the result does not depend on
YAMABE_NONDEG_PURE. The script also reports the largest disagreement
between the two backends on every workload.
"""

import argparse
import math
import timeit

import numpy as np

from yamabe_nondeg import _kernels_py

try:
    from yamabe_nondeg import _kernels as compiled
except ImportError:
    compiled = None


def workloads():
    x = np.linspace(0.05, 2 * math.pi - 0.05, 256)
    nterms = np.full(x.size, 4000, dtype=np.int64)
    yield "cos_series  256 pts x 4000 terms", "cos_series", (x, 3, nterms)
    yield "sin_series  256 pts x 4000 terms", "sin_series", (x, 4, nterms)
    yield "versin      256 pts x 4000 terms", "versin_series", (x, 2, nterms)
    rng = np.random.default_rng(0)
    for k in (64, 256):
        w, v = rng.normal(size=k - 1), rng.normal(size=k - 1)
        table = np.cos(2 * np.pi * np.arange(k) / k)
        modes = np.arange(k, dtype=np.int64)
        yield f"lattice_sums k={k}", "lattice_sums", (w, v, table, modes)


def best_time(fn, args, repeat):
    timer = timeit.Timer(lambda: fn(*args))
    loops, _ = timer.autorange()
    return min(timer.repeat(repeat, loops)) / loops


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if compiled is None:
        print("compiled extension not built; run pip install -e . --no-build-isolation")
        return 1
    print(f"{'workload':36s} {'pure [ms]':>11s} {'compiled [ms]':>14s} {'speed-up':>9s} {'max |diff|':>11s}")
    for label, name, call in workloads():
        pure_fn, fast_fn = getattr(_kernels_py, name), getattr(compiled, name)
        t_pure = best_time(pure_fn, call, args.repeat)
        t_fast = best_time(fast_fn, call, args.repeat)
        diff = float(np.max(np.abs(np.asarray(pure_fn(*call)) - np.asarray(fast_fn(*call)))))
        print(f"{label:36s} {1e3 * t_pure:11.3f} {1e3 * t_fast:14.3f} {t_pure / t_fast:8.1f}x {diff:11.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
