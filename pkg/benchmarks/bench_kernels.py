"""Time the compiled cube kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--max-n 18] [--repeat 5]

Prints one row per (kernel, N) with the best-of-``repeat`` time of each
backend, the speedup, and the largest absolute difference between the two
outputs.
"""
import argparse
import timeit

import numpy as np

from talagrand_lab.kernels import implementations


def _cases(mod, n, f, ind, w):
    return {
        "point_weights": lambda: mod.point_weights(n, 0.3),
        "derivative_moments r=1": lambda: mod.derivative_moments(f, w, n, 1.0),
        "derivative_moments r=2": lambda: mod.derivative_moments(f, w, n, 2.0),
        "derivative_moments r=1.5": lambda: mod.derivative_moments(f, w, n, 1.5),
        "influences": lambda: mod.influences(ind, w, n),
        "fwht": lambda: mod.fwht(f.copy()),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n", type=int, default=18)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    impls = implementations()
    if "cython" not in impls:
        print("compiled extension not available; only the numpy fallback is importable")
        return 1
    py, cy = impls["python"], impls["cython"]
    rng = np.random.default_rng(0)
    print(f"{'kernel':<26}{'N':>4}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}{'max diff':>12}")
    for n in range(6, args.max_n + 1, 4):
        f = rng.normal(size=1 << n)
        ind = (rng.random(1 << n) < 0.5).astype(np.float64)
        w = py.point_weights(n, 0.3)
        pc, cc = _cases(py, n, f, ind, w), _cases(cy, n, f, ind, w)
        for name in pc:
            number = max(1, 2 ** max(0, 14 - n))
            tp = min(timeit.repeat(pc[name], number=number, repeat=args.repeat)) / number
            tc = min(timeit.repeat(cc[name], number=number, repeat=args.repeat)) / number
            if name == "fwht":
                a, b = f.copy(), f.copy()
                py.fwht(a)
                cy.fwht(b)
            else:
                a, b = np.asarray(pc[name]()), np.asarray(cc[name]())
            diff = float(np.max(np.abs(a - b)))
            print(f"{name:<26}{n:>4}{tp * 1e3:>14.3f}{tc * 1e3:>14.3f}{tp / tc:>10.1f}{diff:>12.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
