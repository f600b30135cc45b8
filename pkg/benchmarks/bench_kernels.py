#!/usr/bin/env python3
"""Throughput comparison of the nearest-neighbor scan backends.

Runs the compiled extension (when built) against the numpy fallback and a
per-record brute-force loop on the decontamination-sized workload, checking
that all backends pick the same neighbors.

Usage:
  python benchmarks/bench_kernels.py [--sizes 2000x1000,10000x5000] [--dim 256]
"""

import argparse
import time

import numpy as np

from bookforge.kernels import HAVE_NATIVE, argmax_dot


def normalized(rng, n, d):
    m = rng.normal(size=(n, d))
    return np.ascontiguousarray(m / np.linalg.norm(m, axis=1, keepdims=True))


def per_record_loop(queries, targets):
    idx = np.empty(queries.shape[0], dtype=np.int64)
    sim = np.empty(queries.shape[0], dtype=np.float64)
    for i in range(queries.shape[0]):
        sims = targets @ queries[i]
        idx[i] = np.argmax(sims)
        sim[i] = sims[idx[i]]
    return idx, sim


def timed(fn, *args, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return result, best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="2000x1000,10000x5000",
                        help="comma-separated NxM pairs (queries x targets)")
    parser.add_argument("--dim", type=int, default=256)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    print(f"native kernel available: {HAVE_NATIVE}")
    rng = np.random.default_rng(0)
    header = f"{'size':>14}  {'backend':<12} {'best time':>10}  {'pairs/s':>12}"
    print(header)
    print("-" * len(header))

    for size in args.sizes.split(","):
        n, m = (int(x) for x in size.lower().split("x"))
        queries = normalized(rng, n, args.dim)
        targets = normalized(rng, m, args.dim)

        backends = [("numpy", lambda q, t: argmax_dot(q, t, backend="numpy"))]
        if HAVE_NATIVE:
            backends.append(
                ("native", lambda q, t: argmax_dot(q, t, backend="native"))
            )
        backends.append(("per-record", per_record_loop))

        reference = None
        for name, fn in backends:
            (idx, sim), best = timed(fn, queries, targets, repeats=args.repeats)
            if reference is None:
                reference = (idx, sim)
            else:
                assert np.array_equal(reference[0], idx), f"{name} disagrees"
                assert np.allclose(reference[1], sim, atol=1e-9)
            rate = n * m / best
            print(f"{size:>14}  {name:<12} {best:>9.3f}s  {rate:>12.2e}")
        print()


if __name__ == "__main__":
    main()
