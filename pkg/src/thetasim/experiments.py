"""Canonical circuits for the five shipped setups and their closed-form outcomes.

The expected distributions here are written down by hand from the geometry
of each setup and do not call either engine; they are the oracle both
engines are checked against.
"""

import math
from dataclasses import asdict, dataclass

from .errors import BadParameter
from .events import OutcomeDistribution
from .optics import build_circuit

RENNINGER = "renninger"
RENNINGER_FIBER = "renninger-fiber"
MACH_ZEHNDER = "mach-zehnder"
BOMB_TESTER = "bomb-tester"
INDUCED_COHERENCE = "induced-coherence"
NAMES = (RENNINGER, RENNINGER_FIBER, MACH_ZEHNDER, BOMB_TESTER, INDUCED_COHERENCE)
BOMBS = ("absent", "fake", "usable")

SHORT_DELAY = 1.0
LONG_DELAY = 3.0
FIBER_DELAY = 100.0


@dataclass(frozen=True)
class ExperimentSpec:
    """A named setup plus the variant options that apply to it.

    ``transmittance=None`` means the object between the crystals is absent.
    """

    name: str
    bomb: str = None
    transmittance: float = None
    phase: float = None
    delay_short: float = None
    delay_long: float = None

    def __post_init__(self):
        if self.name not in NAMES:
            raise BadParameter(f"unknown experiment {self.name!r}; choose from {NAMES}")
        allowed = {
            RENNINGER: {"delay_short", "delay_long"},
            RENNINGER_FIBER: {"delay_short", "delay_long"},
            MACH_ZEHNDER: {"phase"},
            BOMB_TESTER: {"bomb"},
            INDUCED_COHERENCE: {"transmittance"},
        }[self.name]
        for key in ("bomb", "transmittance", "phase", "delay_short", "delay_long"):
            if getattr(self, key) is not None and key not in allowed:
                raise BadParameter(f"{key} does not apply to {self.name}")
        if self.name == BOMB_TESTER:
            if self.bomb is None:
                object.__setattr__(self, "bomb", "usable")
            if self.bomb not in BOMBS:
                raise BadParameter(f"bomb must be one of {BOMBS}, got {self.bomb!r}")
        if self.name == MACH_ZEHNDER and self.phase is None:
            object.__setattr__(self, "phase", 0.0)
        if self.phase is not None and not math.isfinite(self.phase):
            raise BadParameter(f"phase {self.phase} is not finite")
        if self.transmittance is not None and not 0.0 <= self.transmittance <= 1.0:
            raise BadParameter(f"transmittance {self.transmittance} outside [0, 1]")
        if self.name in (RENNINGER, RENNINGER_FIBER):
            if self.delay_short is None:
                object.__setattr__(self, "delay_short", SHORT_DELAY)
            if self.delay_long is None:
                default = FIBER_DELAY if self.name == RENNINGER_FIBER else LONG_DELAY
                object.__setattr__(self, "delay_long", default)
            if not 0.0 <= self.delay_short < self.delay_long:
                raise BadParameter("Renninger delays need 0 <= short < long, got "
                                   f"{self.delay_short}, {self.delay_long}")

    def params(self):
        return {k: v for k, v in asdict(self).items() if k != "name" and v is not None}

    def label(self):
        extra = ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}"
                         for k, v in self.params().items())
        return f"{self.name}({extra})" if extra else self.name


def _el(eid, kind, **params):
    return {"id": eid, "kind": kind, "params": params}


def _seg(sid, src, dst, delay):
    return {"id": sid, "from": src, "to": dst, "delay": delay}


def renninger(spec):
    return {
        "name": spec.name,
        "elements": [
            _el("SPS", "source"),
            _el("BS", "beamsplitter", reflectivity=0.5),
            _el("D1", "detector", label="D1"),
            _el("D2", "detector", label="D2"),
        ],
        "segments": [
            _seg("psi", "SPS.out", "BS.in0", 0.0),
            _seg("psi1", "BS.out1", "D1.in", spec.delay_short),
            _seg("psi2", "BS.out0", "D2.in", spec.delay_long),
        ],
    }


def _mach_zehnder_arms(lower):
    """Upper arm (reflected at BS1) via M1, lower arm via ``lower`` then M2."""
    elements = [
        _el("SPS", "source"),
        _el("BS1", "beamsplitter", reflectivity=0.5),
        _el("M1", "mirror"),
        _el("M2", "mirror"),
        _el("BS2", "beamsplitter", reflectivity=0.5),
        _el("D1", "detector", label="D1"),
        _el("D2", "detector", label="D2"),
    ]
    segments = [
        _seg("psi", "SPS.out", "BS1.in0", 0.0),
        _seg("psi1", "BS1.out1", "M1.in", 1.0),
        _seg("psi1-m", "M1.out", "BS2.in1", 1.0),
        _seg("psi2-m", "M2.out", "BS2.in0", 1.0),
        _seg("to-d1", "BS2.out0", "D1.in", 1.0),
        _seg("to-d2", "BS2.out1", "D2.in", 1.0),
    ]
    if lower is None:
        segments.append(_seg("psi2", "BS1.out0", "M2.in", 1.0))
    else:
        elements.insert(4, lower)
        segments += [
            _seg("psi2", "BS1.out0", f"{lower['id']}.in", 0.5),
            _seg("psi2-x", f"{lower['id']}.out", "M2.in", 0.5),
        ]
    return elements, segments


def mach_zehnder(spec):
    lower = None
    if spec.phase:
        lower = _el("PS", "phaseshifter", phase=spec.phase)
    elements, segments = _mach_zehnder_arms(lower)
    return {"name": spec.name, "elements": elements, "segments": segments}


def bomb_tester(spec):
    lower = None
    if spec.bomb == "usable":
        lower = _el("BOMB", "obstacle", category="bomb", usable=True, transmittance=0.0)
    elif spec.bomb == "fake":
        lower = _el("BOMB", "obstacle", category="bomb", usable=False, transmittance=1.0)
    elements, segments = _mach_zehnder_arms(lower)
    return {"name": spec.name, "elements": elements, "segments": segments}


def induced_coherence(spec):
    """Two down-conversion crystals, one per interferometer arm.

    The idler of NL1 is sent through the object O into NL2's seed port so
    that it arrives together with NL2's pump; the signals recombine at BS2
    with equal arm lengths.
    """
    elements = [
        _el("SPS", "source"),
        _el("BS1", "beamsplitter", reflectivity=0.5),
        _el("NL1", "crystal"),
        _el("NL2", "crystal"),
        _el("M1", "mirror"),
        _el("M2", "mirror"),
        _el("BS2", "beamsplitter", reflectivity=0.5),
        _el("D1", "detector", label="D1"),
        _el("D2", "detector", label="D2"),
    ]
    segments = [
        _seg("pump", "SPS.out", "BS1.in0", 0.0),
        _seg("pump1", "BS1.out1", "NL1.pump", 1.0),
        _seg("pump2", "BS1.out0", "NL2.pump", 2.0),
        _seg("signal1", "NL1.signal", "M1.in", 2.0),
        _seg("signal1-m", "M1.out", "BS2.in1", 1.0),
        _seg("signal2", "NL2.signal", "M2.in", 1.0),
        _seg("signal2-m", "M2.out", "BS2.in0", 1.0),
        _seg("to-d1", "BS2.out0", "D1.in", 1.0),
        _seg("to-d2", "BS2.out1", "D2.in", 1.0),
    ]
    if spec.transmittance is None:
        segments.append(_seg("idler1", "NL1.idler", "NL2.seed", 1.0))
    else:
        elements.insert(4, _el("O", "obstacle", category="opaque", transmittance=spec.transmittance))
        segments += [
            _seg("idler1", "NL1.idler", "O.in", 0.5),
            _seg("idler1-o", "O.out", "NL2.seed", 0.5),
        ]
    return {"name": spec.name, "elements": elements, "segments": segments}


_BUILDERS = {
    RENNINGER: renninger,
    RENNINGER_FIBER: renninger,
    MACH_ZEHNDER: mach_zehnder,
    BOMB_TESTER: bomb_tester,
    INDUCED_COHERENCE: induced_coherence,
}


def circuit_spec(spec):
    """Structured circuit description (the circuit-file document) for ``spec``."""
    return _BUILDERS[spec.name](spec)


def build(spec):
    return build_circuit(circuit_spec(spec))


def expected_distribution(spec):
    if spec.name in (RENNINGER, RENNINGER_FIBER):
        return OutcomeDistribution({"D1": 0.5, "D2": 0.5})
    if spec.name == MACH_ZEHNDER:
        half = spec.phase / 2.0
        return OutcomeDistribution({"D1": math.sin(half) ** 2, "D2": math.cos(half) ** 2})
    if spec.name == BOMB_TESTER:
        if spec.bomb == "usable":
            # Half the photons meet the bomb; the other half see an unbalanced
            # splitter at BS2 and divide evenly.
            return OutcomeDistribution({"Explosion": 0.5, "D1": 0.25, "D2": 0.25})
        return OutcomeDistribution({"D1": 0.0, "D2": 1.0})
    t = 1.0 if spec.transmittance is None else spec.transmittance
    return OutcomeDistribution({"D1": (1.0 - t) / 2.0, "D2": (1.0 + t) / 2.0})


def shipped_specs():
    """Every variant exercised by the verification grid."""
    specs = [
        ExperimentSpec(RENNINGER),
        ExperimentSpec(RENNINGER_FIBER),
        ExperimentSpec(MACH_ZEHNDER),
    ]
    specs += [ExperimentSpec(BOMB_TESTER, bomb=b) for b in BOMBS]
    specs.append(ExperimentSpec(INDUCED_COHERENCE))
    specs += [ExperimentSpec(INDUCED_COHERENCE, transmittance=t) for t in (0.0, 0.25, 0.5, 0.75, 1.0)]
    return specs


def phase_sweep(points=20):
    return [ExperimentSpec(MACH_ZEHNDER, phase=2.0 * math.pi * k / points) for k in range(points)]
