"""Time the numba and numpy learning kernels on the same workload.

    python benchmarks/bench_backends.py --n 100 --runs 50
"""

import argparse
import time

import numpy as np

from treeadapt._backend import HAVE_NUMBA
from treeadapt.learning import LearningConfig, run_phase
from treeadapt.plans import generate_synthetic
from treeadapt.topology import build_balanced_tree, random_bijection


def time_backend(backend, pop, tree, runs):
    # one untimed run so JIT compilation is excluded
    run_phase(pop, tree, random_bijection(tree, 0), LearningConfig(seed=0), backend=backend)
    costs = []
    start = time.perf_counter()
    for i in range(runs):
        trace = run_phase(pop, tree, random_bijection(tree, i), LearningConfig(seed=i), backend=backend)
        costs.append(trace.final_cost)
    return time.perf_counter() - start, np.array(costs)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--k", type=int, default=16)
    ap.add_argument("--d", type=int, default=100)
    ap.add_argument("--m", type=int, default=2)
    ap.add_argument("--runs", type=int, default=50)
    args = ap.parse_args()

    pop = generate_synthetic(args.n, args.k, args.d, seed=0)
    tree = build_balanced_tree(args.n, args.m)
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    results = {b: time_backend(b, pop, tree, args.runs) for b in backends}
    for b, (elapsed, _) in results.items():
        print(f"{b:6s} {elapsed:8.3f} s  {1000 * elapsed / args.runs:8.2f} ms/run")
    if len(results) == 2:
        (t_np, c_np), (t_nb, c_nb) = results["numpy"], results["numba"]
        print(f"speedup {t_np / t_nb:.1f}x, max |cost difference| {np.max(np.abs(c_np - c_nb)):.2e}")


if __name__ == "__main__":
    main()
