"""Circuit representation and optical element semantics.

A circuit is a directed acyclic graph of elements joined by timed path
segments.  Segments connect an output port of one element to an input port
of another and carry a non-negative delay in dimensionless time units.

Port names per element kind:

================  ==================  ======================
kind              inputs              outputs
================  ==================  ======================
source            (none)              out
beamsplitter      in0, in1            out0, out1
mirror            in                  out
phaseshifter      in                  out
obstacle          in                  out
crystal           pump, seed*         signal, idler*
detector          in                  (none)
================  ==================  ======================

Ports marked ``*`` are optional.  Beam-splitter inputs may be left open (an
open input carries vacuum); every other non-optional port must be connected
exactly once.

Beam-splitter convention: ``out = U @ in`` with
``U = [[sqrt(t), i*sqrt(r)], [i*sqrt(r), sqrt(t)]]``, ``t = 1 - r``.
``out0`` is the transmitted port for light entering ``in0`` and ``out1``
the reflected one.
"""

import cmath
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import ClassVar

from .errors import (
    AmbiguousPath,
    BadElementParameter,
    BadParameter,
    CircuitError,
    CircuitParseError,
    CyclicGraph,
    DanglingPort,
    DuplicateId,
    MissingSource,
    MultipleSources,
    NoPath,
    UnreachableDetector,
    UnreachableElement,
)

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# Elements


@dataclass(frozen=True)
class Element:
    id: str
    kind: ClassVar[str] = ""
    inputs: ClassVar[tuple] = ()
    outputs: ClassVar[tuple] = ()
    optional_inputs: ClassVar[tuple] = ()
    optional_outputs: ClassVar[tuple] = ()

    def params(self):
        return {}


@dataclass(frozen=True)
class Source(Element):
    kind: ClassVar[str] = "source"
    outputs: ClassVar[tuple] = ("out",)


@dataclass(frozen=True)
class BeamSplitter(Element):
    reflectivity: float = 0.5
    kind: ClassVar[str] = "beamsplitter"
    inputs: ClassVar[tuple] = ("in0", "in1")
    outputs: ClassVar[tuple] = ("out0", "out1")
    optional_inputs: ClassVar[tuple] = ("in0", "in1")

    def __post_init__(self):
        if not 0.0 <= self.reflectivity <= 1.0:
            raise BadElementParameter(f"reflectivity {self.reflectivity} outside [0, 1]",
                                      field=f"{self.id}.reflectivity")

    def params(self):
        return {"reflectivity": self.reflectivity}

    @property
    def matrix(self):
        return splitter_matrix(self.reflectivity)


@dataclass(frozen=True)
class Mirror(Element):
    kind: ClassVar[str] = "mirror"
    inputs: ClassVar[tuple] = ("in",)
    outputs: ClassVar[tuple] = ("out",)


@dataclass(frozen=True)
class PhaseShifter(Element):
    phase: float = 0.0
    kind: ClassVar[str] = "phaseshifter"
    inputs: ClassVar[tuple] = ("in",)
    outputs: ClassVar[tuple] = ("out",)

    def __post_init__(self):
        if not math.isfinite(self.phase):
            raise BadElementParameter(f"phase {self.phase} is not finite", field=f"{self.id}.phase")

    def params(self):
        return {"phase": self.phase}


BOMB = "bomb"
OPAQUE = "opaque"


@dataclass(frozen=True)
class Obstacle(Element):
    """Bomb or opaque object.  A fake bomb has no fuse and is transparent."""

    category: str = OPAQUE
    usable: bool = True
    transmittance: float = 0.0
    kind: ClassVar[str] = "obstacle"
    inputs: ClassVar[tuple] = ("in",)
    outputs: ClassVar[tuple] = ("out",)

    def __post_init__(self):
        if self.category not in (BOMB, OPAQUE):
            raise BadElementParameter(f"unknown obstacle category {self.category!r}",
                                      field=f"{self.id}.category")
        if not 0.0 <= self.transmittance <= 1.0:
            raise BadElementParameter(f"transmittance {self.transmittance} outside [0, 1]",
                                      field=f"{self.id}.transmittance")
        if self.category == BOMB and not self.usable and self.transmittance != 1.0:
            raise BadElementParameter("a fake bomb does not interact; its transmittance must be 1",
                                      field=f"{self.id}.transmittance")

    @property
    def is_bomb(self):
        return self.category == BOMB and self.usable

    def params(self):
        p = {"category": self.category, "transmittance": self.transmittance}
        if self.category == BOMB:
            p["usable"] = self.usable
        return p


@dataclass(frozen=True)
class NonlinearCrystal(Element):
    """Down-converts one pump photon into a signal/idler pair.

    An idler wave injected into ``seed`` at the moment the pump arrives
    phase-locks this crystal's emission to the crystal that produced it.
    """

    kind: ClassVar[str] = "crystal"
    inputs: ClassVar[tuple] = ("pump", "seed")
    outputs: ClassVar[tuple] = ("signal", "idler")
    optional_inputs: ClassVar[tuple] = ("seed",)
    optional_outputs: ClassVar[tuple] = ("idler",)


@dataclass(frozen=True)
class Detector(Element):
    label: str = ""
    kind: ClassVar[str] = "detector"
    inputs: ClassVar[tuple] = ("in",)

    def __post_init__(self):
        if not self.label:
            object.__setattr__(self, "label", self.id)

    def params(self):
        return {"label": self.label}


ELEMENT_KINDS = {cls.kind: cls for cls in
                 (Source, BeamSplitter, Mirror, PhaseShifter, Obstacle, NonlinearCrystal, Detector)}


def splitter_matrix(reflectivity):
    if not 0.0 <= reflectivity <= 1.0:
        raise BadParameter(f"reflectivity {reflectivity} outside [0, 1]")
    t = math.sqrt(1.0 - reflectivity)
    r = 1j * math.sqrt(reflectivity)
    return ((t, r), (r, t))


def beamsplitter_transform(inputs, reflectivity):
    """Map the amplitude pair on (in0, in1) to the pair on (out0, out1)."""
    (u00, u01), (u10, u11) = splitter_matrix(reflectivity)
    a, b = complex(inputs[0]), complex(inputs[1])
    return (u00 * a + u01 * b, u10 * a + u11 * b)


def phase_factor(phase):
    return cmath.exp(1j * phase)


# ---------------------------------------------------------------------------
# Circuit


@dataclass(frozen=True)
class PathSegment:
    id: str
    source: str
    source_port: str
    target: str
    target_port: str
    delay: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.delay) and self.delay >= 0.0):
            raise BadElementParameter(f"delay {self.delay} must be finite and >= 0",
                                      field=f"{self.id}.delay")


@dataclass(frozen=True)
class Circuit:
    """Validated, immutable circuit.  Build through :func:`build_circuit`."""

    name: str
    elements: tuple
    segments: tuple
    _by_id: dict = field(repr=False, compare=False, default=None)

    def __getitem__(self, element_id):
        return self._by_id[element_id]

    def __contains__(self, element_id):
        return element_id in self._by_id

    @cached_property
    def source(self):
        return next(e for e in self.elements if isinstance(e, Source))

    @cached_property
    def detectors(self):
        return tuple(e for e in self.elements if isinstance(e, Detector))

    @cached_property
    def obstacles(self):
        return tuple(e for e in self.elements if isinstance(e, Obstacle))

    @cached_property
    def crystals(self):
        return tuple(e for e in self.elements if isinstance(e, NonlinearCrystal))

    @cached_property
    def outgoing(self):
        """``(element id, output port) -> PathSegment``."""
        return {(s.source, s.source_port): s for s in self.segments}

    @cached_property
    def incoming(self):
        """``(element id, input port) -> PathSegment``."""
        return {(s.target, s.target_port): s for s in self.segments}

    @cached_property
    def topo_index(self):
        return {eid: i for i, eid in enumerate(_topological_order(self.elements, self.segments))}

    def segment(self, segment_id):
        for s in self.segments:
            if s.id == segment_id:
                return s
        raise KeyError(segment_id)

    def detector(self, name):
        """Look a detector up by element id or label."""
        for d in self.detectors:
            if name in (d.id, d.label):
                return d
        raise NoPath(f"no detector named {name!r} in circuit {self.name!r}")

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "elements": [{"id": e.id, "kind": e.kind, "params": e.params()} for e in self.elements],
            "segments": [{"id": s.id, "from": f"{s.source}.{s.source_port}",
                          "to": f"{s.target}.{s.target_port}", "delay": s.delay}
                         for s in self.segments],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _topological_order(elements, segments):
    ids = [e.id for e in elements]
    succ = defaultdict(list)
    indeg = {eid: 0 for eid in ids}
    for s in segments:
        succ[s.source].append(s.target)
        indeg[s.target] += 1
    ready = [eid for eid in ids if indeg[eid] == 0]
    order = []
    while ready:
        eid = ready.pop(0)
        order.append(eid)
        for nxt in succ[eid]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                ready.append(nxt)
    if len(order) != len(ids):
        stuck = sorted(eid for eid in ids if indeg[eid] > 0)
        raise CyclicGraph(f"cycle through elements {stuck}")
    return order


def _make_element(raw, where):
    if not isinstance(raw, dict):
        raise CircuitParseError("element must be an object", field=where)
    eid = raw.get("id")
    if not isinstance(eid, str) or not eid:
        raise CircuitParseError("missing or empty 'id'", field=f"{where}.id")
    kind = raw.get("kind")
    cls = ELEMENT_KINDS.get(kind)
    if cls is None:
        raise BadElementParameter(f"unknown element kind {kind!r}", field=f"{where}.kind")
    params = raw.get("params") or {}
    if not isinstance(params, dict):
        raise CircuitParseError("'params' must be an object", field=f"{where}.params")
    allowed = {f for f in cls.__dataclass_fields__ if f != "id"}
    unknown = set(params) - allowed
    if unknown:
        raise BadElementParameter(f"unknown parameter(s) {sorted(unknown)} for {kind}",
                                  field=f"{where}.params")
    try:
        return cls(id=eid, **params)
    except CircuitError as exc:
        raise type(exc)(str(exc).split(": ", 1)[-1], field=f"{where}.params") from None
    except (TypeError, ValueError) as exc:
        raise BadElementParameter(str(exc), field=f"{where}.params") from None


def _split_port(ref, where):
    if not isinstance(ref, str) or "." not in ref:
        raise CircuitParseError(f"port reference {ref!r} is not 'element.port'", field=where)
    elem, port = ref.rsplit(".", 1)
    return elem, port


def build_circuit(spec):
    """Validate a structured circuit description and return a :class:`Circuit`.

    ``spec`` is a mapping with ``name``, ``elements`` (``{id, kind, params}``)
    and ``segments`` (``{id?, from: "elem.port", to: "elem.port", delay}``),
    i.e. exactly the document stored in a circuit file.
    """
    if isinstance(spec, Circuit):
        return spec
    if not isinstance(spec, dict):
        raise CircuitParseError("circuit description must be an object")
    name = spec.get("name", "circuit")
    raw_elements = spec.get("elements")
    raw_segments = spec.get("segments")
    if not isinstance(raw_elements, list):
        raise CircuitParseError("'elements' must be a list", field="elements")
    if not isinstance(raw_segments, list):
        raise CircuitParseError("'segments' must be a list", field="segments")

    elements = []
    by_id = {}
    for i, raw in enumerate(raw_elements):
        el = raw if isinstance(raw, Element) else _make_element(raw, f"elements[{i}]")
        if el.id in by_id:
            raise DuplicateId(f"duplicate element id {el.id!r}", field=f"elements[{i}].id")
        by_id[el.id] = el
        elements.append(el)

    sources = [e for e in elements if isinstance(e, Source)]
    if not sources:
        raise MissingSource("circuit has no source", field="elements")
    if len(sources) > 1:
        raise MultipleSources(f"{len(sources)} sources: {[s.id for s in sources]}", field="elements")

    segments = []
    seg_ids = set()
    used_ports = {}
    for i, raw in enumerate(raw_segments):
        where = f"segments[{i}]"
        if isinstance(raw, PathSegment):
            seg = raw
        else:
            if not isinstance(raw, dict):
                raise CircuitParseError("segment must be an object", field=where)
            src, sport = _split_port(raw.get("from"), f"{where}.from")
            dst, dport = _split_port(raw.get("to"), f"{where}.to")
            delay = raw.get("delay", 0.0)
            if isinstance(delay, bool) or not isinstance(delay, (int, float)):
                raise BadElementParameter(f"delay {delay!r} is not a number", field=f"{where}.delay")
            sid = raw.get("id") or f"{src}.{sport}->{dst}.{dport}"
            try:
                seg = PathSegment(sid, src, sport, dst, dport, float(delay))
            except BadElementParameter as exc:
                raise BadElementParameter(str(exc).split(": ", 1)[-1], field=f"{where}.delay") from None
        if seg.id in seg_ids:
            raise DuplicateId(f"duplicate segment id {seg.id!r}", field=f"{where}.id")
        seg_ids.add(seg.id)
        for elem, port, side, attr in ((seg.source, seg.source_port, "outputs", "from"),
                                       (seg.target, seg.target_port, "inputs", "to")):
            if elem not in by_id:
                raise DanglingPort(f"unknown element {elem!r}", field=f"{where}.{attr}")
            if port not in getattr(by_id[elem], side):
                raise DanglingPort(f"{by_id[elem].kind} {elem!r} has no {side[:-1]} port {port!r}",
                                   field=f"{where}.{attr}")
            if (elem, port, side) in used_ports:
                raise DanglingPort(f"port {elem}.{port} already used by segment "
                                   f"{used_ports[(elem, port, side)]!r}", field=f"{where}.{attr}")
            used_ports[(elem, port, side)] = seg.id
        segments.append(seg)

    for el in elements:
        for port in el.outputs:
            if port not in el.optional_outputs and (el.id, port, "outputs") not in used_ports:
                raise DanglingPort(f"output port {el.id}.{port} is not connected", field="segments")
        for port in el.inputs:
            if port not in el.optional_inputs and (el.id, port, "inputs") not in used_ports:
                raise DanglingPort(f"input port {el.id}.{port} is not connected", field="segments")

    _topological_order(elements, segments)

    succ = defaultdict(list)
    for s in segments:
        succ[s.source].append(s.target)
    seen = {sources[0].id}
    stack = [sources[0].id]
    while stack:
        for nxt in succ[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    for el in elements:
        if el.id not in seen:
            cls = UnreachableDetector if isinstance(el, Detector) else UnreachableElement
            raise cls(f"{el.kind} {el.id!r} is not reachable from the source", field="segments")

    labels = [d.label for d in elements if isinstance(d, Detector)]
    if len(labels) != len(set(labels)):
        raise DuplicateId(f"detector labels are not unique: {labels}", field="elements")

    return Circuit(name=name, elements=tuple(elements), segments=tuple(segments), _by_id=by_id)


def load_circuit(text):
    """Parse a circuit file (JSON text)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitParseError(exc.msg, line=exc.lineno, field=f"column {exc.colno}") from None
    version = doc.get("schema_version", SCHEMA_VERSION) if isinstance(doc, dict) else None
    if version != SCHEMA_VERSION:
        raise CircuitParseError(f"unsupported schema_version {version!r}", field="schema_version")
    return build_circuit(doc)


# ---------------------------------------------------------------------------
# Delays


def _physical_successors(circuit, element, port):
    """Output ports an amplitude entering ``element.port`` can continue on."""
    if isinstance(element, NonlinearCrystal):
        return element.outputs if port == "pump" else ()
    return element.outputs


def path_delays(circuit, detector):
    """Total delay of every physical source-to-detector path, in DFS order."""
    target = circuit.detector(detector).id
    delays = []

    def walk(elem_id, port, t):
        el = circuit[elem_id]
        if el.id == target:
            delays.append(t)
            return
        for out in _physical_successors(circuit, el, port):
            seg = circuit.outgoing.get((el.id, out))
            if seg is not None:
                walk(seg.target, seg.target_port, t + seg.delay)

    src = circuit.source
    seg = circuit.outgoing[(src.id, "out")]
    walk(seg.target, seg.target_port, seg.delay)
    return delays


def total_delay(circuit, detector):
    """Sum of segment delays on the unique source-to-``detector`` path."""
    delays = path_delays(circuit, detector)
    if not delays:
        raise NoPath(f"no path from the source to {detector!r}")
    if len(delays) > 1:
        raise AmbiguousPath(detector, delays)
    return delays[0]
