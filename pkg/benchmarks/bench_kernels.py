"""Compare the numba and numpy enumeration backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from ncwb import _kernels, scenarios
from ncwb.assign import ProblemBuilder, enumerate_deterministic_assignments


def dense_system(n, target, radix=2):
    """One row ``sum x_i = target``; it only prunes once every variable is set."""
    values = np.tile(np.linspace(0, 1, radix), (n, 1))
    return values, np.full(n, radix), np.ones((1, n)), np.array([target])


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if _kernels.HAS_NUMBA else [])
    cases = {
        "cabello-nakamura": lambda be: enumerate_deterministic_assignments(
            scenarios.cabello_nakamura_problem(), be),
        "xyz": lambda be: enumerate_deterministic_assignments(scenarios.xyz_problem(), be),
    }
    for n in (14, 18, 20):
        sys_ = dense_system(n, n / 2)
        cases[f"half-ones n={n}"] = lambda be, s=sys_: _kernels.search(*s, 1e-9, be)
    for n in (18, 20):
        sys_ = dense_system(n, 0.5)
        cases[f"unsatisfiable n={n}"] = lambda be, s=sys_: _kernels.search(*s, 1e-9, be)
    # warm up the JIT so compile time is not measured
    for be in backends:
        for fn in cases.values():
            fn(be)
    print(f"{'case':<22}" + "".join(f"{be:>12}" for be in backends) + ("   speedup" if len(backends) == 2 else ""))
    for name, fn in cases.items():
        times = [timeit(lambda: fn(be), args.repeat) for be in backends]
        row = f"{name:<22}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
