"""Timing comparison of the pure-Python and compiled polygon-search kernels.

Runs the same shortest-trajectory workload through both backends and prints
a table with per-case times and the overall speedup.  Results are checked to
agree to 1e-9 before any timing is reported, so the benchmark doubles as a
coarse parity check.

Usage:
    python benchmarks/bench_backends.py [--starts N] [--seed S]
"""

import argparse
import time

import numpy as np

from minklab import _core
from minklab import bodies as B
from minklab.billiards import shortest_closed, xi_euclidean


def _cases():
    yield "disc x disc", B.ball(1.0, 2), B.ball(1.0, 2)
    yield "ellipse x p4-ball", B.ellipsoid_semiaxes(np.array([1.7, 0.9])), B.pball(4, 1.2, 2)
    yield "square x diamond", B.cube(2), B.cross_polytope(2)
    yield "random polygon x disc", B.random_symmetric_polytope(2, 9, seed=7), B.ball(1.0, 2)
    yield "random x random", B.random_symmetric_polytope(2, 8, seed=3), \
        B.random_symmetric_polytope(2, 7, seed=4)


def _run(backend, starts, seed):
    _core.use_backend(backend)
    times, lengths = [], []
    for _, K, T in _cases():
        t0 = time.perf_counter()
        traj = shortest_closed(K, T, starts=starts, seed=seed)
        times.append(time.perf_counter() - t0)
        lengths.append(traj.length)
    t0 = time.perf_counter()
    xi = xi_euclidean(B.ellipsoid_semiaxes(np.array([2.0, 1.0])),
                      starts=starts, seed=seed).xi
    times.append(time.perf_counter() - t0)
    lengths.append(xi)
    return times, lengths


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--starts", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if not _core.HAVE_COMPILED:
        print("compiled kernel not built; nothing to compare "
              "(pip install -e . rebuilds it)")
        return 1

    original = _core.backend_name()
    try:
        pure_t, pure_v = _run("pure", args.starts, args.seed)
        fast_t, fast_v = _run("compiled", args.starts, args.seed)
    finally:
        _core.use_backend(original)

    names = [name for name, _, _ in _cases()] + ["xi(ellipse 2:1)"]
    for a, b in zip(pure_v, fast_v):
        if abs(a - b) > 1e-9 * max(1.0, abs(a)):
            print(f"backend disagreement: {a!r} vs {b!r}")
            return 1

    width = max(len(n) for n in names)
    print(f"{'case':<{width}}  {'pure [s]':>9}  {'compiled [s]':>12}  {'speedup':>7}")
    for name, tp, tf in zip(names, pure_t, fast_t):
        print(f"{name:<{width}}  {tp:9.3f}  {tf:12.3f}  {tp / tf:6.1f}x")
    total_p, total_f = sum(pure_t), sum(fast_t)
    print(f"{'total':<{width}}  {total_p:9.3f}  {total_f:12.3f}  "
          f"{total_p / total_f:6.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
