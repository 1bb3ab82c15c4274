#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Times the eigendecomposition / PSD-projection kernels across surface sizes
and one representative subproblem solve per backend.  Forcing a backend for
a whole process works via STARFD_BACKEND={compiled,numpy}; this script
instead swaps the kernel functions in place so both backends run in one go.

Usage: python bench/bench_backends.py [--repeats 2000]
"""

import argparse
import time

import numpy as np

from starfd import _kernels
from starfd._kernels import available_backends, get_backend


def time_call(fn, *args, repeats):
    fn(*args)  # warmup
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def bench_kernels(repeats):
    rng = np.random.default_rng(0)
    rows = []
    for m in (4, 8, 16, 32, 64):
        a = rng.standard_normal((2, m, m)) + 1j * rng.standard_normal((2, m, m))
        a = (a + a.conj().transpose(0, 2, 1)) / 2.0
        reps = max(10, repeats // m)
        row = {"m": m}
        for name in available_backends():
            mod = get_backend(name)
            row[f"eigh_{name}"] = time_call(mod.eigh_stack, a, repeats=reps)
            row[f"proj_{name}"] = time_call(mod.psd_project_stack, a, repeats=reps)
        rows.append(row)
    return rows


def bench_solver():
    from starfd.qsdp import QsdpOptions, solve_qsdp
    from starfd.validation import random_qsdp_instance

    results = {}
    for name in available_backends():
        mod = get_backend(name)
        saved = (
            _kernels.eigh_stack,
            _kernels.eigvalsh_stack,
            _kernels.psd_project_stack,
            _kernels.admm_step,
        )
        _kernels.eigh_stack = mod.eigh_stack
        _kernels.eigvalsh_stack = mod.eigvalsh_stack
        _kernels.psd_project_stack = mod.psd_project_stack
        _kernels.admm_step = getattr(mod, "admm_step", None)
        try:
            solve_qsdp(random_qsdp_instance(99, m=12), QsdpOptions(tolerance=1e-7))
            total = 0.0
            iters = 0
            for k in range(5):
                prob = random_qsdp_instance(k, m=12)
                t0 = time.perf_counter()
                sol = solve_qsdp(prob, QsdpOptions(tolerance=1e-7))
                total += time.perf_counter() - t0
                iters += sol.iterations
            results[name] = (total, iters)
        finally:
            (
                _kernels.eigh_stack,
                _kernels.eigvalsh_stack,
                _kernels.psd_project_stack,
                _kernels.admm_step,
            ) = saved
    return results


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=2000)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")
    if len(backends) < 2:
        print("compiled extension not built; numpy fallback only")

    print("\nkernel timings (microseconds per call, stack of 2 matrices)")
    header = f"{'m':>4}"
    for name in backends:
        header += f"  {'eigh_' + name:>14}  {'proj_' + name:>14}"
    print(header)
    for row in bench_kernels(args.repeats):
        line = f"{row['m']:>4}"
        for name in backends:
            line += f"  {row[f'eigh_{name}'] * 1e6:>14.1f}  {row[f'proj_{name}'] * 1e6:>14.1f}"
        print(line)

    print("\nsubproblem solves (5 random instances, m=12)")
    for name, (total, iters) in bench_solver().items():
        print(f"  {name:>9}: {total:.3f}s total, {iters} iterations, "
              f"{1e6 * total / max(iters, 1):.0f} us/iteration")


if __name__ == "__main__":
    main()
