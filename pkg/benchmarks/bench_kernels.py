"""Compare the compiled and numpy kernels, alone and inside a full integration.

    python3 benchmarks/bench_kernels.py --N 256 1024 4096 --repeat 5
"""
import argparse
import json
import timeit

import numpy as np

from nlgauge import kernels
from nlgauge.equation_model import PhysicalParams, doebner_goldin_numu, ab_from_numu
from nlgauge.grid import Grid
from nlgauge.solver import evolve, free_gaussian


def kernel_args(n, rng):
    a = rng.standard_normal(7)
    b = rng.standard_normal(7)
    arrs = [rng.standard_normal(n) for _ in range(12)]
    return (a, b, 0.3, *arrs, np.empty(n), np.empty(n))


def time_rhs(mod, n, repeat, rng):
    args = kernel_args(n, rng)
    number = max(1, 200000 // n)
    best = min(timeit.repeat(lambda: mod.rhs_assemble(*args), number=number, repeat=repeat))
    return best / number


def time_rk4(mod, n, repeat, rng):
    y, k1, k2, k3, k4 = (rng.standard_normal(2 * n) for _ in range(5))
    out = np.empty(2 * n)
    number = max(1, 200000 // n)
    best = min(timeit.repeat(lambda: mod.rk4_finish(y, k1, k2, k3, k4, 1e-3, out),
                             number=number, repeat=repeat))
    return best / number


def time_evolve(name, n, repeat):
    grid = Grid(40.0, n)
    ab = ab_from_numu(doebner_goldin_numu(PhysicalParams(D=0.1)))
    f0 = free_gaussian(grid).to_st()
    dt = 0.4 / (0.5 * grid.kmax ** 2)
    steps = 200
    best = min(timeit.repeat(lambda: evolve(ab, f0, 0.0, steps * dt, dt, backend=name),
                             number=1, repeat=repeat))
    return best / steps


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--N", type=int, nargs="+", default=[256, 1024, 4096])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--json", action="store_true", help="print machine-readable results")
    args = p.parse_args(argv)
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; only the numpy fallback is timed")
    rng = np.random.default_rng(0)
    rows = []
    for n in args.N:
        for name, mod in sorted(backends.items()):
            rows.append({"N": n, "backend": name,
                         "rhs_us": 1e6 * time_rhs(mod, n, args.repeat, rng),
                         "rk4_us": 1e6 * time_rk4(mod, n, args.repeat, rng),
                         "step_us": 1e6 * time_evolve(name, n, args.repeat)})
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    print(f"{'N':>6} {'backend':>8} {'rhs [us]':>10} {'rk4 [us]':>10} {'step [us]':>10}")
    for r in rows:
        print(f"{r['N']:>6} {r['backend']:>8} {r['rhs_us']:>10.2f} {r['rk4_us']:>10.2f} "
              f"{r['step_us']:>10.1f}")


if __name__ == "__main__":
    main()
