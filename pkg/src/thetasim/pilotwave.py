"""Pilot-wave engine: a real theta wave guiding one indivisible corpuscle.

The theta wave splits at every element and is propagated as a set of
packets in arrival-time order.  Exactly one packet carries the corpuscle
(the acron).  Wherever the wave branches, the acron follows one branch with
probability proportional to that branch's superposed intensity
(*eurhythmy*).  Empty packets are physically real: they interfere, they are
absorbed or phase-scrambled by obstacles, and they reach detectors, but
they never carry enough energy to make anything click or explode.
"""

import heapq
import math
from dataclasses import dataclass, replace

from .errors import AcronLost, AcronPacketNotAllowed, BadParameter, ZeroTotalIntensity
from .events import (
    DARK,
    Coherence,
    EventKind,
    TrialEvent,
    WavePacket,
    superposed_intensity,
)
from .optics import (
    BeamSplitter,
    Detector,
    Mirror,
    NonlinearCrystal,
    Obstacle,
    PhaseShifter,
    beamsplitter_transform,
    phase_factor,
)
from .orthodox import effective_transmittance, time_bin

ENGINE = "pilotwave"
ABSORB = "absorb"
RANDOMIZE = "randomize"
MODES = (ABSORB, RANDOMIZE)


@dataclass(frozen=True)
class PilotConfig:
    """Engine options.

    ``routing`` and ``empty_wave_clicks`` exist so the test suite can plant
    known-wrong physics and check that it is caught: ``routing="argmax"``
    sends the acron deterministically to the brightest port, and
    ``empty_wave_clicks=True`` lets empty waves fire detectors.
    """

    mode: str = ABSORB
    routing: str = "eurhythmy"
    empty_wave_clicks: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise BadParameter(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.routing not in ("eurhythmy", "argmax"):
            raise BadParameter(f"unknown routing {self.routing!r}")

    @property
    def stream(self):
        return f"{ENGINE}:{self.mode}"


def eurhythmy_route(intensities, rng, routing="eurhythmy"):
    """Pick the output port the acron follows.

    Probability of each port is its share of the total superposed intensity;
    dark ports are never chosen.
    """
    weights = [w if w > DARK else 0.0 for w in intensities]
    if not any(weights):
        raise ZeroTotalIntensity(f"all output ports are dark: {list(intensities)}")
    if routing == "argmax":
        return max(range(len(weights)), key=weights.__getitem__)
    return rng.choose(weights)


def split_wave(packet, splitter, rng, in_port="in0", routing="eurhythmy"):
    """Split one packet at a beam splitter into its (out0, out1) packets.

    If the packet carries the acron, exactly one output inherits it, chosen in
    proportion to the output intensities.
    """
    j = splitter.inputs.index(in_port)
    pair = [0j, 0j]
    pair[j] = packet.amplitude
    amps = beamsplitter_transform(pair, splitter.reflectivity)
    outs = [replace(packet, amplitude=a, carries_acron=False) for a in amps]
    if packet.carries_acron:
        k = eurhythmy_route([o.intensity for o in outs], rng, routing)
        outs[k].carries_acron = True
    return tuple(outs)


def empty_wave_obstacle_interaction(packet, obstacle, mode, rng, coherence):
    """Act of an obstacle on an empty wave.

    Returns ``(packet or None, event or None)``.  A blocking obstacle either
    absorbs the empty wave or scrambles its phase so that it can no longer
    interfere; a partially transmitting one attenuates it; a transparent one
    (including a fake bomb) leaves it untouched.
    """
    if packet.carries_acron:
        raise AcronPacketNotAllowed("the acron-carrying packet must go through trigger_obstacle")
    trans = effective_transmittance(obstacle)
    if trans >= 1.0:
        return packet, None
    if trans > 0.0:
        return replace(packet, amplitude=packet.amplitude * math.sqrt(trans)), None
    if mode == ABSORB:
        return None, TrialEvent(packet.arrival_time, EventKind.ABSORPTION, obstacle.id)
    randomized = replace(packet, phase_randomized=True, random_phase=rng.phase(),
                         coherence_group=coherence.new_group())
    return randomized, None


def trigger_obstacle(packet, obstacle):
    """Event produced when the acron itself meets a blocking obstacle.

    Returns None for a fake bomb, which the acron passes unharmed.
    """
    if effective_transmittance(obstacle) >= 1.0:
        return None
    kind = EventKind.EXPLOSION if obstacle.is_bomb else EventKind.ABSORPTION
    return TrialEvent(packet.arrival_time, kind, obstacle.id, particle=True)


def detect(packet, detector, config=None):
    if packet.carries_acron or (config is not None and config.empty_wave_clicks):
        return TrialEvent(packet.arrival_time, EventKind.CLICK, detector.label,
                          particle=packet.carries_acron)
    return TrialEvent(packet.arrival_time, EventKind.EMPTY_WAVE_ARRIVAL, detector.label)


def induced_coherence(seed_fraction, seed_group, coherence):
    """Coherence group for the signal of a seeded crystal.

    An idler delivered in full phase-locks the new signal to the seeding
    group; a partial delivery scales the cross term by the delivered
    fraction; nothing delivered leaves the signal incoherent.
    """
    if seed_group is not None and seed_fraction >= 1.0 - 1e-12:
        return seed_group
    group = coherence.new_group()
    if seed_group is not None and seed_fraction > 0.0:
        coherence.link(group, seed_group, seed_fraction)
    return group


def assign_pair_acron(pump, signal, idler):
    """Within a down-converted pair the detected (signal) photon carries the acron."""
    signal.carries_acron = pump.carries_acron
    idler.carries_acron = False


def _merge(packets):
    """Sum coherent packets of the same group; phase-randomized ones stay apart."""
    merged = {}
    loose = []
    for p in packets:
        if p.phase_randomized:
            loose.append(p)
            continue
        key = (p.coherence_group, p.species)
        if key in merged:
            q = merged[key]
            q.amplitude += p.amplitude
            q.carries_acron = q.carries_acron or p.carries_acron
            if q.origin != p.origin:
                q.origin = None
        else:
            merged[key] = replace(p)
    return list(merged.values()) + loose


def _port_intensity(packets, coherence):
    return superposed_intensity([(p.amplitude, p.coherence_group, p.phase_randomized)
                                 for p in packets], coherence)


class _Trial:
    def __init__(self, circuit, config, rng, trial_index):
        self.circuit = circuit
        self.config = config
        self.rng = rng
        self.trial_index = trial_index
        self.coherence = Coherence()
        self.queue = []
        self.seq = 0
        self.events = []
        self.acron_consumed = False
        self.terminated = False
        self.emitted = {}

    def log(self, event):
        self.events.append(event.with_trial(self.trial_index))
        if event.particle:
            self.acron_consumed = True

    def send(self, element, port, packet):
        seg = self.circuit.outgoing.get((element.id, port))
        if seg is None or packet.intensity <= DARK:
            if packet.carries_acron:
                raise AcronLost(f"acron left {element.id}.{port} on a dark or open port")
            return
        t = packet.arrival_time + seg.delay
        packet = replace(packet, segment=seg.id, arrival_time=t)
        self.seq += 1
        heapq.heappush(self.queue, (time_bin(t), self.circuit.topo_index[seg.target], self.seq,
                                    seg.target, seg.target_port, packet))

    def run(self):
        src = self.circuit.source
        start = WavePacket(amplitude=1.0 + 0j, segment="", arrival_time=0.0, carries_acron=True,
                           coherence_group=self.coherence.new_group(), origin=src.id)
        self.send(src, "out", start)
        while self.queue and not self.terminated:
            t, _, _, elem_id, port, packet = heapq.heappop(self.queue)
            inputs = {port: [packet]}
            while self.queue and self.queue[0][0] == t and self.queue[0][3] == elem_id:
                _, _, _, _, p2, pk2 = heapq.heappop(self.queue)
                inputs.setdefault(p2, []).append(pk2)
            self.process(self.circuit[elem_id], inputs)
        if not self.acron_consumed:
            raise AcronLost(f"trial {self.trial_index} ended without a terminal event")
        return self.events

    def process(self, el, inputs):
        if isinstance(el, BeamSplitter):
            self.beamsplitter(el, inputs)
        elif isinstance(el, (Mirror, PhaseShifter)):
            factor = phase_factor(el.phase) if isinstance(el, PhaseShifter) else 1.0
            for p in inputs["in"]:
                self.send(el, "out", replace(p, amplitude=p.amplitude * factor))
        elif isinstance(el, Obstacle):
            self.obstacle(el, inputs["in"])
        elif isinstance(el, NonlinearCrystal):
            self.crystal(el, inputs.get("pump", []), inputs.get("seed", []))
        elif isinstance(el, Detector):
            for p in inputs["in"]:
                self.log(detect(p, el, self.config))

    def beamsplitter(self, el, inputs):
        incoming = [(port, p) for port in el.inputs for p in inputs.get(port, [])]
        routing = self.config.routing
        if len(incoming) == 1:
            port, p = incoming[0]
            out0, out1 = split_wave(p, el, self.rng, port, routing)
            self.send(el, "out0", out0)
            self.send(el, "out1", out1)
            return
        ports = {out: [] for out in el.outputs}
        acron = False
        for port, p in incoming:
            # Pieces of the carrier stay flagged through the merge so the
            # acron can keep to its own wave on the chosen port.
            for out, piece in zip(el.outputs, split_wave(replace(p, carries_acron=False), el,
                                                         None, port)):
                piece.carries_acron = p.carries_acron
                ports[out].append(piece)
            acron = acron or p.carries_acron
        ports = {out: _merge(ps) for out, ps in ports.items()}
        if acron:
            intensities = [_port_intensity(ports[out], self.coherence) for out in el.outputs]
            k = eurhythmy_route(intensities, self.rng, routing)
            chosen = ports[el.outputs[k]]
            lineage = [q for q in chosen if q.carries_acron and q.intensity > DARK]
            carrier = lineage[0] if lineage else max(chosen, key=lambda q: q.intensity)
            for ps in ports.values():
                for q in ps:
                    q.carries_acron = q is carrier
        for out in el.outputs:
            for p in ports[out]:
                self.send(el, out, p)

    def obstacle(self, el, packets):
        trans = effective_transmittance(el)
        carrier = [p for p in packets if p.carries_acron]
        if carrier and trans < 1.0:
            p = carrier[0]
            blocked = trans == 0.0 or self.rng.choose([trans, 1.0 - trans]) == 1
            if blocked:
                self.log(trigger_obstacle(p, el))
                self.terminated = True
                return
        for p in packets:
            if p.carries_acron:
                out = replace(p, amplitude=p.amplitude * math.sqrt(trans))
                event = None
            else:
                out, event = empty_wave_obstacle_interaction(p, el, self.config.mode, self.rng,
                                                             self.coherence)
            if event is not None:
                self.log(event)
            if out is not None:
                self.send(el, "out", out)

    def crystal(self, el, pumps, seeds):
        seeds = [s for s in seeds if not s.phase_randomized]
        for pump in _merge(pumps):
            if pump.intensity <= DARK:
                continue
            seed_group, fraction = None, 0.0
            if not pump.phase_randomized:
                for s in _merge(seeds):
                    emitted = self.emitted.get(s.origin)
                    if emitted:
                        f = min(s.intensity / emitted, 1.0)
                        if f > fraction:
                            seed_group, fraction = s.coherence_group, f
            group = induced_coherence(fraction, seed_group, self.coherence)
            signal = WavePacket(pump.amplitude, "", pump.arrival_time, coherence_group=group,
                                species="signal", origin=el.id)
            idler = WavePacket(pump.amplitude, "", pump.arrival_time, coherence_group=group,
                               species="idler", origin=el.id)
            assign_pair_acron(pump, signal, idler)
            self.emitted[el.id] = pump.intensity
            self.send(el, "signal", signal)
            self.send(el, "idler", idler)


def run_trial(circuit, config, rng, trial_index=0):
    """Simulate one photon and return its full event log in time order.

    Propagation continues after the acron clicks so that the empty waves'
    arrivals are logged; an explosion or absorption of the acron ends the
    trial at once.
    """
    return _Trial(circuit, config or PilotConfig(), rng, trial_index).run()
