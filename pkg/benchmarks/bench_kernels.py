#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the three hot paths on representative shapes: the batched
equilibrium solver, the tensor-likelihood fit driver, and the logistic
fit driver. Run from the repository root:

    python3 benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from klpref._kernels import numpy_impl

try:
    from klpref._kernels import numba_impl
except ImportError:
    numba_impl = None

from klpref.core import make_instance
from klpref.learners import generate_offline_dataset
from klpref.models import gp_preference_matrices


def time_call(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_cases():
    inst = make_instance(variant="gp", seed=7)
    bt_inst = make_instance(variant="bt", seed=7)
    rng = np.random.default_rng(0)
    ref = inst.ref_policy

    X200 = rng.random((200, inst.k))
    Qs = np.ascontiguousarray(gp_preference_matrices(inst.params.tensor, X200, inst.actions))

    cases = []
    for eta in (1.0, 3.0):
        cases.append(
            (
                f"nash_solve_batch E=200 eta={eta:g}",
                lambda impl, Qs=Qs, eta=eta: impl.nash_solve_batch(
                    Qs, ref, eta, 1e-10, 10_000
                ),
            )
        )

    for n in (2_000, 20_000):
        data = generate_offline_dataset(inst, n, np.random.default_rng(n))
        Xa, a1, a2, y = (np.ascontiguousarray(v) for v in data.views())
        A = np.ascontiguousarray(inst.actions)
        theta0 = np.full(inst.k**3, 0.5)
        args = (Xa, A, a1, a2, y, 0.0, 1.0, 100, 1e-6, 1e-4, 1.0, 1e-14, 2.0)
        cases.append(
            (
                f"gp_fit n={n} (100 iter budget)",
                lambda impl, theta0=theta0, args=args: impl.gp_fit(theta0.copy(), *args),
            )
        )

    data = generate_offline_dataset(bt_inst, 20_000, np.random.default_rng(1))
    Xb, b1, b2, yb = (np.ascontiguousarray(v) for v in data.views())
    Ab = np.ascontiguousarray(bt_inst.actions)
    w0 = np.full(bt_inst.k**2, 0.5)
    bt_args = (Xb, Ab, b1, b2, yb, 0.0, 1.0, 100, 1e-6, 1e-4, 1.0, 1e-14, 2.0)
    cases.append(
        (
            "bt_fit n=20000 (100 iter budget)",
            lambda impl, w0=w0, bt_args=bt_args: impl.bt_fit(w0.copy(), *bt_args),
        )
    )
    return cases


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    cases = bench_cases()
    print(f"{'case':<38} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, fn in cases:
        t_np = time_call(lambda: fn(numpy_impl), args.repeats)
        if numba_impl is None:
            print(f"{name:<38} {t_np * 1e3:9.2f}ms {'n/a':>10} {'n/a':>8}")
            continue
        fn(numba_impl)  # JIT warm-up outside the timer
        t_nb = time_call(lambda: fn(numba_impl), args.repeats)
        print(
            f"{name:<38} {t_np * 1e3:9.2f}ms {t_nb * 1e3:9.2f}ms {t_np / t_nb:7.1f}x"
        )


if __name__ == "__main__":
    main()
