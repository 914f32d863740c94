#!/usr/bin/env python3
"""Benchmark the compiled solver core against the pure-NumPy fallback.

Times hinge-SVM and epsilon-SVR dual solves on synthetic problems of growing
size and reports per-backend wall time, speedup, and objective agreement.

    python benchmarks/bench_solver.py [--sizes 100,200,400] [--repeats 3]
"""

import argparse
import time

import numpy as np

from riskrfe.solvers import available_backends


def _problems(n, rng):
    X = rng.uniform(-1.0, 1.0, (n, 8))
    w = np.zeros(8)
    w[:3] = (1.0, -0.5, 1.0)
    margins = X @ w
    y = np.where(margins >= 0, 1.0, -1.0)
    G = X @ X.T
    lam = 2.0 / (n * 1.0)
    C = 1.0 / (2 * n * lam)

    Qc = np.ascontiguousarray((y[:, None] * y[None, :]) * G)
    pc = np.full(n, -1.0)

    y_reg = margins + 0.2 * rng.standard_normal(n)
    eps = 0.1
    yhat = np.concatenate([np.ones(n), -np.ones(n)])
    K2 = np.block([[G, G], [G, G]])
    Qr = np.ascontiguousarray((yhat[:, None] * yhat[None, :]) * K2)
    pr = np.concatenate([eps - y_reg, eps + y_reg])

    return ("hinge", Qc, pc, y, C), ("svr", Qr, pr, yhat, C)


def _dual(Q, p, beta):
    return 0.5 * beta @ Q @ beta + p @ beta


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="100,200,400")
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--tol", type=float, default=1e-6)
    parser.add_argument("--max-iter", type=int, default=2_000_000)
    args = parser.parse_args()

    backends = available_backends()
    if "compiled" not in backends:
        print("note: compiled backend not built; timing the fallback only")
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(12345)

    header = f"{'problem':<10}{'n':>6}" + "".join(f"{name:>14}" for name in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}{'|d obj|':>12}"
    print(header)
    print("-" * len(header))

    for n in sizes:
        for kind, Q, p, yhat, C in _problems(n, rng):
            times = {}
            objs = {}
            for name, mod in backends.items():
                best = np.inf
                for _ in range(args.repeats):
                    t0 = time.perf_counter()
                    beta, _, _, viol = mod.smo_solve(Q, p, yhat, C, args.tol, args.max_iter)
                    best = min(best, time.perf_counter() - t0)
                times[name] = best
                objs[name] = _dual(Q, p, beta)
            row = f"{kind:<10}{n:>6}" + "".join(
                f"{times[name] * 1000:>11.1f} ms" for name in backends
            )
            if len(backends) == 2:
                row += f"{times['python'] / times['compiled']:>9.1f}x"
                row += f"{abs(objs['python'] - objs['compiled']):>12.2e}"
            print(row)


if __name__ == "__main__":
    main()
