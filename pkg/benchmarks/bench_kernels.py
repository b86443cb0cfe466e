"""Benchmark the numba kernels against their numpy fallbacks.

Runs both implementations of each kernel in one process, checks that the
outputs agree bit for bit, and reports best-of-N wall times.

Usage: python benchmarks/bench_kernels.py [--reps N]
"""

import argparse
import time

import numpy as np

from coverdist import kernels


def best_of(fn, reps):
    best = float("inf")
    out = None
    for _ in range(reps):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def workloads():
    primes = np.flatnonzero(kernels._sieve_np(10**6)).astype(np.int64)
    # Q of norm 490_000 over Z[i]: (700) = (700, 0, 700); I = (2, 1, 1)
    mask_args = (0, 1, 2, 1, 1, 700, 0, 700)
    yield "sieve(1e7)", lambda f: f(10**7), ("_sieve_np", "_sieve_nb")
    yield (
        "kron(-20, primes<1e6)",
        lambda f: f(-20, primes),
        ("_kron_np", "_kron_nb"),
    )

    def run_mark(f):
        mask = np.zeros(700 * 700, dtype=np.bool_)
        f(mask, *mask_args)
        return mask

    yield "mark_class(490k pts)", run_mark, ("_mark_class_np", "_mark_class_nb")
    yield (
        "level_labels(490k pts)",
        lambda f: f(700, 700, 50, 0, 50),
        ("_level_labels_np", "_level_labels_nb"),
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=5, help="timing repetitions")
    args = parser.parse_args()

    if kernels._nb is None:
        raise SystemExit(
            "numba backend unavailable (COVERDIST_BACKEND=numpy or numba "
            "missing); nothing to compare"
        )

    print(f"{'kernel':<24} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, call, (np_name, nb_name) in workloads():
        f_np = getattr(kernels, np_name)
        f_nb = getattr(kernels, nb_name)
        call(f_nb)  # warm-up: JIT compile outside the timed region
        t_np, out_np = best_of(lambda: call(f_np), args.reps)
        t_nb, out_nb = best_of(lambda: call(f_nb), args.reps)
        assert np.array_equal(out_np, out_nb), f"{name}: backends disagree"
        print(f"{name:<24} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
