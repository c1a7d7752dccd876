"""Benchmark the numba kernels against the pure-numpy fallback.

Runs the projected-ascent hot path on representative workloads from both
regimes: many small-batch trials (Monte Carlo style) and single large
batches (rate-experiment style).  Imports both kernel modules directly, so
the NNDIST_BACKEND environment flag does not affect the comparison.

Usage: python benchmarks/benchmark_backends.py [--steps 150] [--repeat 3]
"""

import argparse
import time

import numpy as np

from nndist import _kernels_numpy
from nndist.distributions import rng_from

try:
    from nndist import _kernels_numba
except ImportError:
    _kernels_numba = None

WORKLOADS = [
    # (label, n_samples, h, widths)
    ("mc-small", 100, 2, (1,)),
    ("mc-deep", 100, 4, (4, 4)),
    ("batch-large", 4096, 2, (1,)),
    ("batch-wide", 2048, 6, (8, 8)),
]


def build_case(n, h, widths, seed=0):
    rng = rng_from(seed)
    zs = rng.standard_normal((n, h))
    weights = rng.standard_normal(n) / n
    sizes = [w * f for w, f in zip(widths, (h, *widths[:-1]))] + [widths[-1]]
    flat0 = 0.3 * rng.standard_normal(sum(sizes))
    args = (
        np.asarray(widths, dtype=np.int64),
        np.zeros(len(widths), dtype=np.int64),  # relu codes
        np.zeros(len(widths), dtype=np.float64),
        np.ones(len(widths) + 1, dtype=np.float64),
        0,  # frobenius
        zs,
        weights,
    )
    return flat0, args


def time_backend(module, flat0, args, steps, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        module.run_ascent(flat0.copy(), args[5].shape[1], *args[:5], args[5], args[6], steps, 0.1, 9.0)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=150)
    parser.add_argument("--repeat", type=int, default=3)
    opts = parser.parse_args()

    print(f"{'workload':<12} {'n':>5} {'net':>8} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for label, n, h, widths in WORKLOADS:
        flat0, args = build_case(n, h, widths)
        t_np = time_backend(_kernels_numpy, flat0, args, opts.steps, opts.repeat)
        if _kernels_numba is None:
            print(f"{label:<12} {n:>5} {h}x{widths}   {t_np * 1e3:>8.2f}ms      (numba unavailable)")
            continue
        # warm the JIT outside the timed region
        time_backend(_kernels_numba, flat0, args, 2, 1)
        t_nb = time_backend(_kernels_numba, flat0, args, opts.steps, opts.repeat)
        net = f"{h}x{'x'.join(map(str, widths))}"
        print(
            f"{label:<12} {n:>5} {net:>8} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms {t_np / t_nb:>7.2f}x"
        )


if __name__ == "__main__":
    main()
