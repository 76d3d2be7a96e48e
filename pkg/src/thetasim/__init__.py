"""Single-photon interferometry simulated two ways.

The orthodox engine sums amplitudes over paths and samples outcomes by the
Born rule; the pilot-wave engine propagates a real wave that steers one
indivisible corpuscle.  The two are checked against each other and against
closed-form predictions for a handful of classic setups.
"""

from .errors import ThetasimError
from .experiments import ExperimentSpec, expected_distribution, shipped_specs
from .kernel import BACKEND
from .optics import Circuit, build_circuit, load_circuit
from .pilotwave import PilotConfig
from .simulate import run
from .stats import RunReport, compare

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Circuit",
    "ExperimentSpec",
    "PilotConfig",
    "RunReport",
    "ThetasimError",
    "build_circuit",
    "compare",
    "expected_distribution",
    "load_circuit",
    "run",
    "shipped_specs",
]
