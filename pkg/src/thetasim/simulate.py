"""Batch Monte Carlo runs on top of the engines and the tree-walking kernel."""

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache

import numpy as np

from . import kernel, orthodox, pilotwave
from .errors import BadParameter
from .experiments import ExperimentSpec, build, expected_distribution
from .optics import Circuit
from .rng import MASK64, TrialRng, base_key
from .stats import RunReport
from .tree import enumerate_tree

ENGINES = (orthodox.ENGINE, pilotwave.ENGINE)


def engine_stream(engine, config=None):
    if engine == orthodox.ENGINE:
        return orthodox.ENGINE
    return (config or pilotwave.PilotConfig()).stream


def resolve(engine, mode=None, config=None):
    """Validate an engine/mode pair and return the pilot-wave config (or None)."""
    if engine == orthodox.ENGINE:
        if mode is not None or config is not None:
            raise BadParameter("the orthodox engine has no mode")
        return None
    if engine != pilotwave.ENGINE:
        raise BadParameter(f"unknown engine {engine!r}; choose from {ENGINES}")
    if config is None:
        config = pilotwave.PilotConfig(mode or pilotwave.ABSORB)
    elif mode is not None and mode != config.mode:
        raise BadParameter(f"mode {mode!r} conflicts with config mode {config.mode!r}")
    return config


def trial_function(circuit, engine, config=None):
    if engine == orthodox.ENGINE:
        return lambda rng, i=0: orthodox.sample_trial(circuit, rng, i)
    return lambda rng, i=0: pilotwave.run_trial(circuit, config, rng, i)


@lru_cache(maxsize=512)
def outcome_tree(circuit, engine, config=None):
    """Decision tree of one engine on one circuit (cached)."""
    return enumerate_tree(trial_function(circuit, engine, config), strict=False)


def iter_trials(circuit, engine, trials, seed, config=None, start=0):
    """Live trials through the Python engines, one event log per trial."""
    fn = trial_function(circuit, engine, config)
    stream = engine_stream(engine, config)
    for i in range(start, start + trials):
        yield fn(TrialRng(seed, i, stream), i)


def _walk_chunk(args):
    arrays, key, start, stop, n_leaves = args
    leaves = kernel.walk_tree(*arrays, key, start, stop)
    return np.bincount(leaves, minlength=n_leaves)


def shard_bounds(trials, workers):
    edges = np.linspace(0, trials, workers + 1).round().astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def leaf_counts(tree, seed, stream, trials, workers=1):
    """How many of ``trials`` kernel trials end at each leaf of ``tree``."""
    key = base_key(seed & MASK64, stream)
    jobs = [(tree.arrays(), key, a, b, len(tree.leaves)) for a, b in shard_bounds(trials, workers)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_walk_chunk, jobs))
    else:
        parts = [_walk_chunk(job) for job in jobs]
    return np.sum(parts, axis=0) if parts else np.zeros(len(tree.leaves), dtype=np.int64)


def leaf_ids(circuit, engine, trials, seed, config=None, start=0):
    """Leaf reached by each kernel trial; index ``tree.leaves`` for the logs."""
    tree = outcome_tree(circuit, engine, config)
    key = base_key(seed & MASK64, engine_stream(engine, config))
    return tree, kernel.walk_tree(*tree.arrays(), key, start, start + trials)


def _describe(target):
    if isinstance(target, ExperimentSpec):
        return build(target), target.name, target.params(), expected_distribution(target)
    if isinstance(target, Circuit):
        return target, target.name, {}, orthodox.propagate(target).distribution
    raise BadParameter(f"cannot simulate {target!r}")


def run(target, engine=orthodox.ENGINE, trials=100_000, seed=0, mode=None, workers=1, config=None):
    """Simulate ``trials`` photons and summarize them against the analytic oracle.

    ``target`` is an :class:`ExperimentSpec` (oracle: its closed form) or a
    :class:`Circuit` (oracle: the orthodox propagation).
    """
    if not isinstance(trials, int) or trials < 1:
        raise BadParameter(f"trials must be a positive integer, got {trials!r}")
    if workers < 1:
        raise BadParameter("workers must be >= 1")
    config = resolve(engine, mode, config)
    circuit, name, params, expected = _describe(target)
    tree = outcome_tree(circuit, engine, config)
    per_leaf = leaf_counts(tree, seed, engine_stream(engine, config), trials, workers)
    counts = Counter()
    histogram = Counter()
    for leaf, n in zip(tree.leaves, per_leaf.tolist()):
        if n:
            counts[leaf.outcome] += n
            for e in leaf.events:
                histogram[e.kind.value] += n
    return RunReport(
        experiment=name,
        params=params,
        engine=engine,
        mode=config.mode if config else None,
        trials=trials,
        seed=seed,
        counts=dict(counts),
        expected=dict(expected),
        events_histogram=dict(histogram),
    )
