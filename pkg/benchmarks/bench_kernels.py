"""Timing comparison between the compiled kernel core and the numpy fallback.

Runs the pairwise-distance kernel for every summand and both hinge
trainers on random data, per backend, and prints median wall times with
the speedup ratio. Agreement between backends is asserted along the way,
so this doubles as a coarse cross-check.

Usage:
    python3 benchmarks/bench_kernels.py [--samples N] [--features D]
                                        [--repeats R]
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from stylo._kernels import backends, pure

KIND_NAMES = {
    pure.MEAN_ABS: "mean_abs",
    pure.WEIGHTED_ABS: "weighted_abs",
    pure.MANHATTAN: "manhattan",
    pure.EUCLIDEAN: "euclidean",
    pure.CANBERRA: "canberra",
    pure.COSINE: "cosine",
}


def _time(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=200)
    parser.add_argument("--features", type=int, default=500)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    impls = backends()
    if "compiled" not in impls:
        print("compiled backend not built; timing the numpy fallback only")

    rng = np.random.default_rng(args.seed)
    X = rng.normal(size=(args.samples, args.features))
    weights = rng.uniform(0.5, 1.5, size=args.features)
    y = np.where(rng.random(args.samples) < 0.5, -1.0, 1.0)
    epochs = 200
    orders = np.stack([rng.permutation(args.samples) for _ in range(epochs)])

    jobs = [(f"pairwise/{name}", lambda impl, k=kind: impl.pairwise_kernel(
        X, k, weights if k == pure.WEIGHTED_ABS else None))
        for kind, name in sorted(KIND_NAMES.items())]
    jobs.append(("hinge_fullbatch", lambda impl: impl.hinge_fullbatch(
        X, y, epochs, 1e-4)))
    jobs.append(("hinge_sgd", lambda impl: impl.hinge_sgd(
        X, y, orders, 1e-4)))

    print(f"{args.samples} samples x {args.features} features, "
          f"median of {args.repeats} runs")
    header = f"{'kernel':<22}" + "".join(f"{n:>12}" for n in impls)
    if len(impls) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for label, call in jobs:
        row = f"{label:<22}"
        results = {}
        timings = {}
        for name, impl in impls.items():
            timings[name] = _time(lambda: call(impl), args.repeats)
            results[name] = call(impl)
            row += f"{timings[name] * 1e3:>10.2f}ms"
        if len(results) == 2:
            err = float(np.max(np.abs(results["pure"] - results["compiled"])))
            if err > 1e-8:
                raise SystemExit(f"{label}: backends disagree by {err:.2e}")
            row += f"{timings['pure'] / timings['compiled']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
