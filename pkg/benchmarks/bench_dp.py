"""Timing comparison of the two DP table-fill kernels.

Fills identical tables with the compiled extension and the numpy fallback,
verifies bit-identical outputs, and reports wall times. Run directly:

    python3 benchmarks/bench_dp.py [--repeats N]
"""

import argparse
import time

import numpy as np

import cmnl.griddp as griddp
from cmnl import HAVE_COMPILED_CORE, build_grids, generate_instance
from cmnl.griddp import fill_for_guess


def time_fill(inst, epsilon, mus, nus, repeats):
    best = float("inf")
    gf = None
    for _ in range(repeats):
        started = time.perf_counter()
        gf = fill_for_guess(inst, epsilon, mus, nus)
        best = min(best, time.perf_counter() - started)
    return gf, best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3,
                        help="keep the fastest of this many fills")
    args = parser.parse_args()

    if not HAVE_COMPILED_CORE:
        print("compiled core unavailable; nothing to compare against")
        return 1

    from cmnl import _dpcore, _dpcore_py

    cases = [
        ("small  (n=3, m=2, d=1, eps=0.5)", 3, 2, 1, 0.5),
        ("medium (n=4, m=2, d=2, eps=0.5)", 4, 2, 2, 0.5),
        ("fine   (n=3, m=2, d=2, eps=0.3)", 3, 2, 2, 0.3),
    ]
    print(f"{'case':34} {'cells':>9} {'steps':>12} "
          f"{'compiled':>10} {'numpy':>10} {'speedup':>8}")
    for label, n, m, d, eps in cases:
        inst = generate_instance(seed=4242, n=n, m=m, d=d, w=2,
                                 profile="narrow")
        grids = build_grids(inst, eps)
        mus = [grids.gamma_points[len(grids.gamma_points) // 2]] * m
        nus = [grids.beta_points[len(grids.beta_points) // 2]] * m

        griddp._kernel = _dpcore
        fast, t_fast = time_fill(inst, eps, mus, nus, args.repeats)
        griddp._kernel = _dpcore_py
        slow, t_slow = time_fill(inst, eps, mus, nus, args.repeats)
        griddp._kernel = _dpcore

        if not (fast.steps == slow.steps
                and np.array_equal(fast.h, slow.h, equal_nan=True)
                and np.array_equal(fast.bp, slow.bp)):
            print(f"{label}: KERNEL OUTPUTS DIVERGE")
            return 1
        print(f"{label:34} {fast.h.size:>9} {fast.steps:>12} "
              f"{t_fast:>9.4f}s {t_slow:>9.4f}s {t_slow / t_fast:>7.1f}x")
    print("outputs verified identical across kernels")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
