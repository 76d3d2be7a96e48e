import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thetasim import errors, kernel, simulate
from thetasim.experiments import ExperimentSpec, build, phase_sweep, shipped_specs
from thetasim.pilotwave import PilotConfig
from thetasim.rng import MASK64, TrialRng, base_key, choice_table, mix64, pick, trial_key, uniform_from
from thetasim.tree import enumerate_tree

RUNS = [("orthodox", None), ("pilotwave", PilotConfig("absorb")), ("pilotwave", PilotConfig("randomize"))]
needs_cython = pytest.mark.skipif(kernel.BACKEND != "cython", reason="compiled kernel not built")


def test_mix64_reference_values():
    # SplitMix64 outputs for state 0 (first three draws of the reference generator).
    state, out = 0, []
    for _ in range(3):
        out.append(mix64(state))
        state = (state + 0x9E3779B97F4A7C15) & MASK64
    assert out == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_numpy_mix64_matches_python():
    from thetasim._kernel_py import mix64 as np_mix
    xs = np.array([0, 1, 2**63, MASK64, 0xDEADBEEF], dtype=np.uint64)
    with np.errstate(over="ignore"):
        assert [int(v) for v in np_mix(xs)] == [mix64(int(x)) for x in xs]


def test_choice_table():
    idx, cum = choice_table([0.0, 3.0, 1.0])
    assert idx == [1, 2] and cum == [0.75, 1.0]
    assert pick(cum, 0.74) == 0 and pick(cum, 0.75) == 1
    assert choice_table([0.0, 0.0]) == ([], [])


def test_single_option_consumes_no_draw():
    rng = TrialRng(1, 0, "x")
    assert rng.choose([0.0, 1.0]) == 1 and rng.draws == 0
    rng.choose([0.5, 0.5])
    assert rng.draws == 1


def test_streams_are_distinct():
    keys = {trial_key(5, s, 0) for s in ("orthodox", "pilotwave:absorb", "pilotwave:randomize")}
    assert len(keys) == 3
    assert trial_key(5, "orthodox", 1) != trial_key(5, "orthodox", 0)
    assert 0.0 <= uniform_from(trial_key(5, "orthodox", 0), 0) < 1.0


def _tree(spec, engine, config):
    return simulate.outcome_tree(build(spec), engine, config)


@pytest.mark.parametrize("engine, config", RUNS, ids=["orthodox", "absorb", "randomize"])
@pytest.mark.parametrize("spec", shipped_specs(), ids=lambda s: s.label())
def test_tree_probabilities(spec, engine, config):
    tree = _tree(spec, engine, config)
    assert sum(leaf.probability for leaf in tree.leaves) == pytest.approx(1.0, abs=1e-12)
    assert all(leaf.outcome != "<malformed>" for leaf in tree.leaves)


def test_strict_enumeration_rejects_malformed_logs():
    config = PilotConfig(empty_wave_clicks=True)
    circuit = build(ExperimentSpec("renninger"))
    fn = simulate.trial_function(circuit, "pilotwave", config)
    with pytest.raises(errors.MalformedLog):
        enumerate_tree(fn, strict=True)


@needs_cython
@pytest.mark.parametrize("engine, config", RUNS, ids=["orthodox", "absorb", "randomize"])
@pytest.mark.parametrize("spec", shipped_specs() + phase_sweep(5), ids=lambda s: s.label())
def test_backends_agree(spec, engine, config):
    tree = _tree(spec, engine, config)
    key = base_key(123456789, simulate.engine_stream(engine, config))
    a = kernel.walk_tree(*tree.arrays(), key, 1000, 51000)
    b = kernel.python_walk_tree(*tree.arrays(), key, 1000, 51000)
    np.testing.assert_array_equal(a, b)


@given(seed=st.integers(0, 2**64 - 1), start=st.integers(0, 2**40))
@settings(max_examples=25, deadline=None)
def test_kernel_replays_live_engine(seed, start):
    spec = ExperimentSpec("bomb-tester", bomb="usable")
    circuit = build(spec)
    for engine, config in RUNS:
        tree, ids = simulate.leaf_ids(circuit, engine, 40, seed, config, start=start)
        live = simulate.iter_trials(circuit, engine, 40, seed, config, start=start)
        for i, log in zip(ids, live):
            assert [e.with_trial(0) for e in log] == list(tree.leaves[i].events)


@pytest.mark.slow
@pytest.mark.parametrize("spec", [ExperimentSpec("bomb-tester"), ExperimentSpec("induced-coherence", transmittance=0.5)],
                         ids=lambda s: s.label())
def test_kernel_replays_live_engine_at_scale(spec):
    circuit = build(spec)
    config = PilotConfig("randomize")
    tree, ids = simulate.leaf_ids(circuit, "pilotwave", 20_000, 2024, config)
    for i, log in zip(ids, simulate.iter_trials(circuit, "pilotwave", 20_000, 2024, config)):
        assert [e.with_trial(0) for e in log] == list(tree.leaves[i].events)


@pytest.mark.parametrize("workers", [1, 2, 3, 7])
def test_worker_count_does_not_change_results(workers):
    spec = ExperimentSpec("induced-coherence", transmittance=0.25)
    base = simulate.run(spec, "pilotwave", 50_001, 9, mode="randomize").to_dict()
    assert simulate.run(spec, "pilotwave", 50_001, 9, mode="randomize", workers=workers).to_dict() == base


def test_shard_bounds_cover_range():
    for trials, workers in [(10, 3), (7, 10), (100_000, 8)]:
        bounds = simulate.shard_bounds(trials, workers)
        assert bounds[0][0] == 0 and bounds[-1][1] == trials
        assert all(a[1] == b[0] for a, b in zip(bounds, bounds[1:]))


def test_pure_python_switch():
    env = dict(os.environ, THETASIM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import thetasim.kernel as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
