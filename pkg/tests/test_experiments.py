import math

import numpy as np
import pytest

import oracles
from thetasim import errors
from thetasim.experiments import (
    ExperimentSpec,
    build,
    expected_distribution,
    phase_sweep,
    shipped_specs,
)
from thetasim.optics import NonlinearCrystal, Obstacle, PhaseShifter
from thetasim.orthodox import propagate

GRID = np.round(np.arange(0.0, 1.0 + 1e-9, 0.05), 10)
PHASES = np.round(np.arange(0.0, 2 * math.pi, 0.05), 10)


def full_grid():
    specs = list(shipped_specs())
    specs += [ExperimentSpec("induced-coherence", transmittance=float(t)) for t in GRID]
    specs += [ExperimentSpec("mach-zehnder", phase=float(p)) for p in PHASES]
    specs += [ExperimentSpec("renninger", delay_short=0.5, delay_long=7.0)]
    return specs


@pytest.mark.parametrize("spec", full_grid(), ids=lambda s: s.label())
def test_normalized_and_consistent_with_orthodox(spec):
    expected = expected_distribution(spec)
    assert abs(math.fsum(expected.values()) - 1.0) <= 1e-12
    got = propagate(build(spec)).distribution
    assert set(got) == set(expected)
    for k in expected:
        assert abs(got[k] - expected[k]) <= 1e-9


@pytest.mark.parametrize("spec, expected", [
    (ExperimentSpec("renninger"), {"D1": 0.5, "D2": 0.5}),
    (ExperimentSpec("renninger-fiber"), {"D1": 0.5, "D2": 0.5}),
    (ExperimentSpec("bomb-tester"), {"Explosion": 0.5, "D1": 0.25, "D2": 0.25}),
    (ExperimentSpec("bomb-tester", bomb="fake"), {"D1": 0.0, "D2": 1.0}),
    (ExperimentSpec("induced-coherence"), {"D1": 0.0, "D2": 1.0}),
    (ExperimentSpec("induced-coherence", transmittance=0.0), {"D1": 0.5, "D2": 0.5}),
    (ExperimentSpec("induced-coherence", transmittance=0.5), {"D1": 0.25, "D2": 0.75}),
])
def test_expected_examples(spec, expected):
    assert expected_distribution(spec) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("phi", [0.0, 0.3, math.pi / 2, 2.0, math.pi])
def test_phase_closed_form_vs_matrices(phi):
    d = expected_distribution(ExperimentSpec("mach-zehnder", phase=phi))
    assert (d["D1"], d["D2"]) == pytest.approx(oracles.mach_zehnder(phi), abs=1e-12)


def test_geometry():
    mz = build(ExperimentSpec("mach-zehnder"))
    assert not any(isinstance(e, PhaseShifter) for e in mz.elements)
    bomb = build(ExperimentSpec("bomb-tester", bomb="usable"))["BOMB"]
    assert isinstance(bomb, Obstacle) and bomb.usable and bomb.transmittance == 0.0
    assert build(ExperimentSpec("bomb-tester", bomb="usable")).segment("psi2").source == "BS1"
    ic = build(ExperimentSpec("induced-coherence", transmittance=0.0))
    assert ic["O"].category == "opaque" and ic["O"].transmittance == 0.0
    assert ic.segment("idler1").source == "NL1" and ic.segment("idler1-o").target == "NL2"
    assert sum(isinstance(e, NonlinearCrystal) for e in ic.elements) == 2


@pytest.mark.parametrize("kwargs", [
    {"name": "stern-gerlach"},
    {"name": "mach-zehnder", "bomb": "usable"},
    {"name": "bomb-tester", "bomb": "live"},
    {"name": "induced-coherence", "transmittance": -0.1},
    {"name": "induced-coherence", "phase": 1.0},
    {"name": "renninger", "delay_short": 3.0, "delay_long": 1.0},
    {"name": "mach-zehnder", "phase": math.nan},
])
def test_invalid_specs(kwargs):
    with pytest.raises(errors.BadParameter):
        ExperimentSpec(**kwargs)


def test_sweep_points():
    sweep = phase_sweep(20)
    assert len(sweep) == 20
    assert sweep[5].phase == pytest.approx(math.pi / 2)
    assert len({s.label() for s in shipped_specs()}) == len(shipped_specs())
