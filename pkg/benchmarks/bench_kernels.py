"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from geored import kernels
from geored.expr import ExpressionArray
from geored.reduction import ReductionEngine
from geored.scenarios import load_scenario


def cases(rng):
    n, N = 4, 4
    A = rng.normal(size=(n, n))
    ginv = A @ A.T + n * np.eye(n)
    dg = rng.normal(size=(n, n, n))
    gamma = rng.normal(size=(n, n, n))
    v = rng.normal(size=n)
    E, DE = rng.normal(size=(n, N)), rng.normal(size=(n, N, n))
    arr = ExpressionArray(["1 + y^2", "-y", "sin(x)*cos(z)", "exp(-x*x)/(1 + z^2)", "atan2(y, x)"] * 4,
                          ["x", "y", "z"])
    x = np.array([0.3, 0.7, -0.2])

    def osc(y):
        return np.array([y[1], -y[0]])

    return {
        "christoffel_from_metric": lambda m: m.christoffel_from_metric(ginv, dg),
        "quad_contract": lambda m: m.quad_contract(gamma, v, v),
        "connection_table": lambda m: m.connection_table(E, DE, gamma),
        "eval_programs (20 exprs)": lambda m: m.eval_programs(arr.ops, arr.args, arr.offsets, x),
        "rk4_integrate (1000 steps)": lambda m: m.rk4_integrate(osc, [1.0, 0.0], 1e-3, 1000),
    }


def end_to_end(repeat):
    """Reduced rates on a fresh engine, under whichever backend is patched in."""
    sym = load_scenario("heisenberg_kk").symmetry
    xb, vb, eta = np.array([0.2, 0.4]), np.array([0.5, -0.3]), np.array([0.7])

    def go():
        ReductionEngine(sym, cache=False).rates(xb, vb, eta)

    return min(timeit.repeat(go, number=20, repeat=repeat)) / 20


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available_backends()
    rng = np.random.default_rng(0)
    table = cases(rng)
    names = sorted(backends)
    print(f"{'kernel':30s}" + "".join(f"{b:>14s}" for b in names) + (f"{'speedup':>10s}" if len(names) > 1 else ""))
    for label, fn in table.items():
        times = {}
        for b in names:
            mod = backends[b]
            number = 200 if "rk4" not in label else 5
            times[b] = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat)) / number
        row = f"{label:30s}" + "".join(f"{times[b] * 1e6:12.1f}us" for b in names)
        if len(names) > 1:
            row += f"{times['python'] / times['cython']:9.1f}x"
        print(row)
    saved = {k: getattr(kernels, k) for k in ("quad_contract", "connection_table", "christoffel_from_metric",
                                                "eval_program", "eval_programs")}
    times = {}
    for b in names:
        for k in saved:
            setattr(kernels, k, getattr(backends[b], k))
        times[b] = end_to_end(args.repeat)
    for k, f in saved.items():
        setattr(kernels, k, f)
    row = f"{'reduced rates (end to end)':30s}" + "".join(f"{times[b] * 1e6:12.1f}us" for b in names)
    if len(names) > 1:
        row += f"{times['python'] / times['cython']:9.1f}x"
    print(row)


if __name__ == "__main__":
    main()
