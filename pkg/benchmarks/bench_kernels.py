"""Benchmark the per-sample hot kernels: numba backend vs numpy fallback.

Times the individual kernels on typical layer shapes and a fused
train-step composition (expectation chain + SGD) that mirrors the
pipeline's inner loop.

Usage:
    python benchmarks/bench_kernels.py [--iterations N]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from adlstream.kernels import _numpy

try:
    from adlstream.kernels import _numba
    BACKENDS = [("numpy", _numpy), ("numba", _numba)]
except ImportError:
    BACKENDS = [("numpy", _numpy)]
    print("numba unavailable; benchmarking the fallback only")


def make_layer(rng, r, d, m):
    return (
        rng.normal(size=(r, d)),
        rng.normal(size=r),
        rng.normal(size=(m, r)),
        rng.normal(size=m),
    )


def time_call(fn, *args, iterations):
    fn(*args)  # warmup / jit compile
    start = time.perf_counter()
    for _ in range(iterations):
        fn(*args)
    return (time.perf_counter() - start) / iterations * 1e6


def train_step(impl, w, b, ws, bs, x, c, lr):
    # mirrors one low-level learning sample on a single-layer network:
    # expectation chain for the growth statistics, then the SGD update
    eh = impl.affine_sigmoid(w, b, x * 0.8)
    impl.affine_softmax(ws, bs, eh)
    impl.affine_softmax(ws, bs, eh * eh)
    impl.sgd_step(w, b, ws, bs, x, c, lr)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--iterations", type=int, default=20000)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    shapes = [(1, 3, 2), (8, 3, 2), (16, 8, 2), (32, 16, 4)]
    rows = []
    for r, d, m in shapes:
        w, b, ws, bs = make_layer(rng, r, d, m)
        x = rng.normal(size=d)
        c = np.zeros(m)
        c[0] = 1.0
        entry = {"shape": f"{r}x{d}->{m}"}
        for name, impl in BACKENDS:
            entry[f"sigmoid_{name}"] = time_call(
                impl.affine_sigmoid, w, b, x, iterations=args.iterations
            )
            entry[f"grads_{name}"] = time_call(
                impl.local_grads, w, b, ws, bs, x, c, iterations=args.iterations
            )
            wc, bc, wsc, bsc = (a.copy() for a in (w, b, ws, bs))
            entry[f"step_{name}"] = time_call(
                train_step, impl, wc, bc, wsc, bsc, x, c, 0.05,
                iterations=args.iterations,
            )
        rows.append(entry)

    print(f"{'shape':>12} | {'kernel':>8} | " + " | ".join(f"{n:>10}" for n, _ in BACKENDS)
          + (" | speedup" if len(BACKENDS) == 2 else ""))
    print("-" * (12 + 11 + 13 * len(BACKENDS) + (10 if len(BACKENDS) == 2 else 0)))
    for entry in rows:
        for kernel in ("sigmoid", "grads", "step"):
            cells = [f"{entry[f'{kernel}_{name}']:>9.2f}u" for name, _ in BACKENDS]
            line = f"{entry['shape']:>12} | {kernel:>8} | " + " | ".join(cells)
            if len(BACKENDS) == 2:
                line += f" | {entry[f'{kernel}_numpy'] / entry[f'{kernel}_numba']:>6.1f}x"
            print(line)


if __name__ == "__main__":
    main()
