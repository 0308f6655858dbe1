"""Compiled vs pure-Python stepper on the same paths.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from pnlv import _kernels_py, kernels

CASES = [
    # name, kind, params, path, y0, tol
    ("PI segment", "PI", [0j], [0.1 + 0j, 1.2 + 0.3j], [100.0, -2000.0], 1e-12),
    ("PII segment", "PII", [0.3 + 0j], [0j, 3 + 1j], [0.2, -0.1], 1e-12),
    ("PIV segment", "PIV", [0.5 + 0j, -0.2 + 0j], [1 + 0j, 3 + 1j], [0.3, 0.1, 0.05], 1e-12),
    ("WH ray", "WH", [2 + 0j, 1 + 0j], [2 + 0j, 20 * np.exp(0.3j)], [-0.5], 1e-12),
]


def run(impl, case):
    _, kind, par, path, y0, tol = case
    t = time.perf_counter()
    s, Y, F, status, stats = kernels.run_path(kernels.KIND[kind], par, kernels.SEGMENT, path,
                                              y0, tol=tol, impl=impl)
    return time.perf_counter() - t, stats["accepted"], Y[-1]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not kernels.COMPILED:
        print("compiled kernels not available; only the pure-Python path runs")
    print(f"{'case':<14}{'steps':>8}{'python s':>12}{'cython s':>12}{'speedup':>10}{'max diff':>12}")
    for case in CASES:
        tp = min(run(_kernels_py, case)[0] for _ in range(args.repeat))
        _, n, yp = run(_kernels_py, case)
        if kernels.COMPILED:
            tc = min(run(kernels._impl, case)[0] for _ in range(args.repeat))
            _, _, yc = run(kernels._impl, case)
            diff = float(np.max(np.abs(yp - yc)))
            print(f"{case[0]:<14}{n:>8}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}{diff:>12.2e}")
        else:
            print(f"{case[0]:<14}{n:>8}{tp:>12.4f}{'-':>12}{'-':>10}{'-':>12}")


if __name__ == "__main__":
    main()
