#!/usr/bin/env python3
"""Times the compiled assignment kernel against the numpy fallback on the
same seeded cost matrices and checks they return identical permutations.

Usage: python benchmarks/compare_backends.py [--sizes 250,500,1000] [--repeats 4]
"""

import argparse
import time

import numpy as np

from protosphere import _core


def time_solver(solver, cost, repeats):
    times = []
    for _ in range(repeats):
        tic = time.perf_counter()
        result = solver(cost)
        times.append((time.perf_counter() - tic) * 1000.0)
    return float(np.mean(times)), result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="100,250,500,1000")
    parser.add_argument("--repeats", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = _core.backends()
    print(f"available backends: {', '.join(backends)} (selected: {_core.BACKEND})")
    print("c," + ",".join(f"{name}_ms" for name in backends) + ",agree")
    for c in (int(s) for s in args.sizes.split(",")):
        rng = np.random.default_rng(args.seed)
        cost = rng.uniform(-1.0, 1.0, size=(c, c))
        results, cells = {}, []
        for name, solver in backends.items():
            mean_ms, mapping = time_solver(solver, cost, args.repeats)
            results[name] = mapping
            cells.append(f"{mean_ms:.3f}")
        agree = len({tuple(m.tolist()) for m in results.values()}) == 1
        print(f"{c}," + ",".join(cells) + f",{str(agree).lower()}")


if __name__ == "__main__":
    main()
