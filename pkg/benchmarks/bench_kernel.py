"""Throughput of the compiled tree walker against the numpy fallback.

    python benchmarks/bench_kernel.py --trials 1000000 --repeat 3
"""

import argparse
import time

import numpy as np

from thetasim import kernel, simulate
from thetasim.experiments import ExperimentSpec, build
from thetasim.pilotwave import PilotConfig
from thetasim.rng import base_key

CASES = [
    ("renninger", "orthodox", None),
    ("bomb-tester", "pilotwave", PilotConfig("randomize")),
    ("induced-coherence", "pilotwave", PilotConfig("absorb")),
]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=1_000_000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = {"numpy": kernel.python_walk_tree}
    if kernel.BACKEND == "cython":
        backends["cython"] = kernel.walk_tree
    else:
        print("compiled kernel not built; timing the numpy fallback only")

    print(f"{'experiment':<20}{'engine':<22}{'backend':<9}{'seconds':>9}{'Mtrials/s':>11}")
    for name, engine, config in CASES:
        tree = simulate.outcome_tree(build(ExperimentSpec(name)), engine, config)
        key = base_key(args.seed, simulate.engine_stream(engine, config))
        results = {}
        for backend, walk in backends.items():
            secs, leaves = best_of(lambda: walk(*tree.arrays(), key, 0, args.trials), args.repeat)
            results[backend] = leaves
            label = engine if config is None else f"{engine}:{config.mode}"
            print(f"{name:<20}{label:<22}{backend:<9}{secs:>9.4f}{args.trials / secs / 1e6:>11.2f}")
        first, *rest = results.values()
        for other in rest:
            if not np.array_equal(first, other):
                raise SystemExit(f"backends disagree on {name}")


if __name__ == "__main__":
    main()
