"""Compare the compiled and NumPy kernel backends.

    python3 benchmarks/bench_kernels.py [--n 10] [--t 2] [--beta 3] [--repeat 3]

Two workloads: a full candidate count over the balanced input sets of the
classical attack, and a walk-like sequence of incremental add/remove updates
on a CandidateCounter.
"""
import argparse
import time

import numpy as np

from kacbench import kernels
from kacbench.classical import balanced_sizes
from kacbench.core import random_instance


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def full_count_workload(n, t, beta, rng):
    inst = random_instance(n, t, rng)
    sizes = balanced_sizes(n, t, beta)
    xs = [rng.choice(1 << n, size=s, replace=False).astype(np.int64) for s in sizes]
    images = [inst.encrypt(xs[0])] + [inst.perms[i - 1].table[xs[i]] for i in range(1, t + 1)]
    return xs, images, int(np.prod(sizes))


def incremental_workload(n, t, steps, batch, rng):
    """Batches of packed keys: each step removes one old batch and adds a new one."""
    width = (t + 1) * n
    draw = lambda: rng.integers(0, 1 << min(width, 62), size=batch, dtype=np.int64).astype(np.uint64)
    return [draw() for _ in range(steps + 1)]


def run_incremental(backend, batches, threshold):
    c = kernels.make_counter(threshold, backend)
    c.add(batches[0])
    for old, new in zip(batches, batches[1:]):
        c.remove(old)
        c.add(new)
    return c


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--t", type=int, default=2)
    ap.add_argument("--beta", type=float, default=3.0)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--batch", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)} (default {kernels.BACKEND})")

    xs, images, tuples = full_count_workload(args.n, args.t, args.beta, rng)
    print(f"\nfull count: n={args.n} t={args.t} beta={args.beta} tuples={tuples}")
    ref = None
    base = None
    for b in backends:
        out = kernels.candidate_counts(xs, images, args.n, b)
        if ref is None:
            ref = out
        assert all(np.array_equal(a, c) for a, c in zip(ref, out)), f"{b} disagrees"
        sec = best_of(lambda: kernels.candidate_counts(xs, images, args.n, b), args.repeat)
        base = base or sec
        print(f"  {b:8s} {sec * 1e3:9.1f} ms  ({tuples / sec / 1e6:6.1f} Mtuple/s, x{base / sec:.2f})")

    batches = incremental_workload(args.n, args.t, args.steps, args.batch, rng)
    print(f"\nincremental counter: steps={args.steps} batch={args.batch}")
    base = None
    for b in backends:
        sec = best_of(lambda: run_incremental(b, batches, args.t + 1), args.repeat)
        base = base or sec
        print(f"  {b:8s} {sec * 1e3:9.1f} ms  ({args.steps / sec:9.0f} step/s, x{base / sec:.2f})")


if __name__ == "__main__":
    main()
