import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from thetasim import experiments  # noqa: E402


@pytest.fixture
def renninger():
    return experiments.build(experiments.ExperimentSpec("renninger"))


@pytest.fixture
def mach_zehnder():
    return experiments.build(experiments.ExperimentSpec("mach-zehnder"))


@pytest.fixture
def usable_bomb():
    return experiments.build(experiments.ExperimentSpec("bomb-tester", bomb="usable"))


@pytest.fixture
def fake_bomb():
    return experiments.build(experiments.ExperimentSpec("bomb-tester", bomb="fake"))


def mz_spec_dict():
    """Mach-Zehnder as a raw circuit document, for mutation in error tests."""
    return experiments.circuit_spec(experiments.ExperimentSpec("mach-zehnder"))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
