"""Orthodox engine: probability amplitudes, the Born rule and collapse.

Amplitudes are propagated as a sum over source-to-site paths.  A *site* is
anywhere the photon can end up: a detector, or an obstacle that absorbs it.
Paths reaching the same site in the same time bin are superposed (cross
terms weighted by the coherence between their groups) before squaring.

Sampling draws one outcome per trial from the resulting distribution.  No
trajectory is simulated: what the engine reports beyond the outcome is the
collapse bookkeeping, including negative-result collapses at sites the
photon was not found at before it was finally seen.
"""

import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import AllPathsBlocked, BadParameter
from .events import (
    DARK,
    EXPLOSION_LABEL,
    Coherence,
    EventKind,
    OutcomeDistribution,
    TrialEvent,
    WavePacket,
    absorbed_label,
    superposed_intensity,
)
from .optics import (
    BeamSplitter,
    Detector,
    Mirror,
    NonlinearCrystal,
    Obstacle,
    PhaseShifter,
    phase_factor,
    splitter_matrix,
)

ENGINE = "orthodox"
PLAIN_GROUP = 0


def time_bin(t):
    return round(t, 9)


def effective_transmittance(obstacle):
    return 1.0 if obstacle.category == "bomb" and not obstacle.usable else obstacle.transmittance


def _walk(circuit, elem_id, port, t, amp, group, species, seg, groups, on_site, on_seed, on_segment=None):
    """Depth-first sum over paths starting at ``elem_id.port``."""
    el = circuit[elem_id]
    if on_segment is not None:
        on_segment(seg, t - seg.delay, amp, group)

    def go(out, a, g=group, sp=species):
        nxt = circuit.outgoing.get((el.id, out))
        if nxt is not None:
            _walk(circuit, nxt.target, nxt.target_port, t + nxt.delay, a, g, sp, nxt,
                  groups, on_site, on_seed, on_segment)

    if isinstance(el, Detector):
        if species != "idler":
            on_site(el, seg, t, amp, group)
    elif isinstance(el, BeamSplitter):
        j = el.inputs.index(port)
        u = splitter_matrix(el.reflectivity)
        for k, out in enumerate(el.outputs):
            if u[k][j] != 0:
                go(out, amp * u[k][j])
    elif isinstance(el, Mirror):
        go("out", amp)
    elif isinstance(el, PhaseShifter):
        go("out", amp * phase_factor(el.phase))
    elif isinstance(el, Obstacle):
        trans = effective_transmittance(el)
        if trans < 1.0 and species != "idler":
            on_site(el, seg, t, amp * math.sqrt(1.0 - trans), group)
        if trans > 0.0:
            go("out", amp * math.sqrt(trans))
    elif isinstance(el, NonlinearCrystal):
        if port == "seed":
            if on_seed is not None:
                on_seed(el, t, amp, group)
        elif species != "idler":
            g = groups[el.id]
            go("signal", amp, g, "signal")


def _source_walk(circuit, groups, on_site, on_seed=None, on_segment=None):
    seg = circuit.outgoing[(circuit.source.id, "out")]
    _walk(circuit, seg.target, seg.target_port, seg.delay, 1.0 + 0j, PLAIN_GROUP, "plain", seg,
          groups, on_site, on_seed, on_segment)


@dataclass
class CoherenceGrouping:
    """Coherence groups of the signal emitted by each crystal."""

    groups: dict
    coherence: Coherence
    seed_fraction: dict = field(default_factory=dict)

    def group(self, crystal_id):
        return self.groups[crystal_id]


def which_path_decoherence(circuit):
    """Decide how coherent the signals of different crystals are.

    A crystal whose seed port receives the idler of another crystal, in the
    same time bin as its own pump, emits a signal whose cross term with that
    crystal's signal is scaled by the fraction of idler intensity delivered.
    An unobstructed idler path therefore gives full coherence, a blocked one
    distinct groups (which-path information available), and a partial
    transmittance ``t`` a cross term scaled by ``t``.
    """
    coherence = Coherence()
    groups = {c.id: coherence.new_group() for c in circuit.crystals}
    fractions = {}
    if not circuit.crystals:
        return CoherenceGrouping(groups, coherence, fractions)

    pump_times = defaultdict(set)

    def on_site(*_):
        pass

    def on_segment(seg, t_enter, amp, group):
        if seg.target_port == "pump" and isinstance(circuit[seg.target], NonlinearCrystal):
            if abs(amp) ** 2 > DARK:
                pump_times[seg.target].add(time_bin(t_enter + seg.delay))

    _source_walk(circuit, groups, on_site, on_segment=on_segment)

    order = sorted(circuit.crystals, key=lambda c: circuit.topo_index[c.id])
    for crystal in order:
        for t0 in sorted(pump_times[crystal.id]):
            seg = circuit.outgoing.get((crystal.id, "idler"))
            if seg is None:
                continue
            arrivals = defaultdict(complex)

            def on_seed(el, t, amp, _group, arrivals=arrivals):
                arrivals[(el.id, time_bin(t))] += amp

            _walk(circuit, seg.target, seg.target_port, t0 + seg.delay, 1.0 + 0j,
                  groups[crystal.id], "idler", seg, groups, on_site, on_seed)
            for (target, t), amp in arrivals.items():
                if t in pump_times[target]:
                    f = min(abs(amp) ** 2, 1.0)
                    key = (crystal.id, target)
                    fractions[key] = max(fractions.get(key, 0.0), f)

    for (a, b), f in sorted(fractions.items(), key=lambda kv: circuit.topo_index[kv[0][1]]):
        if f > 0.0:
            coherence.link(groups[b], groups[a], f)
    return CoherenceGrouping(groups, coherence, fractions)


@dataclass(frozen=True)
class Site:
    label: str
    element: str
    segment: str
    time: float
    probability: float
    kind: EventKind


@dataclass
class Propagation:
    """Analytic outcome data for one circuit."""

    sites: list
    distribution: OutcomeDistribution
    absorbed: dict
    arrival_times: dict
    grouping: CoherenceGrouping


def _site_event_kind(el):
    if isinstance(el, Detector):
        return EventKind.CLICK
    return EventKind.EXPLOSION if el.is_bomb else EventKind.ABSORPTION


def _site_label(el):
    if isinstance(el, Detector):
        return el.label
    return EXPLOSION_LABEL if el.is_bomb else absorbed_label(el.id)


@lru_cache(maxsize=256)
def propagate(circuit):
    """Born-rule probabilities for every site of ``circuit``."""
    grouping = which_path_decoherence(circuit)
    arrivals = defaultdict(list)
    feeds = {}

    def on_site(el, seg, t, amp, group):
        arrivals[(el.id, time_bin(t))].append((amp, group, False))
        feeds[el.id] = seg.id

    _source_walk(circuit, grouping.groups, on_site)

    sites = []
    for (eid, t), terms in arrivals.items():
        p = superposed_intensity(terms, grouping.coherence)
        if abs(p) < 1e-15:
            p = 0.0
        el = circuit[eid]
        sites.append(Site(_site_label(el), eid, feeds[eid], t, p, _site_event_kind(el)))
    sites.sort(key=lambda s: (s.time, circuit.topo_index[s.element], s.label))

    probs = defaultdict(float)
    times = defaultdict(list)
    absorbed = {}
    for d in circuit.detectors:
        probs[d.label] += 0.0
    for s in sites:
        probs[s.label] += s.probability
        if s.probability > 0.0:
            times[s.label].append(s.time)
        if s.kind is not EventKind.CLICK:
            absorbed[s.element] = absorbed.get(s.element, 0.0) + s.probability
    return Propagation(sites, OutcomeDistribution(probs), absorbed, dict(times), grouping)


def outcome_distribution(circuit):
    return propagate(circuit).distribution


def sample_trial(circuit, rng, trial_index=0):
    """Draw one outcome and return the trial's events in time order.

    Every site the photon could have reached strictly before the sampled
    outcome contributes a ``NegativeCollapse`` event: by then the wave has
    collapsed onto the remaining branches without any detection.
    """
    prop = propagate(circuit)
    live = [s for s in prop.sites if s.probability > 0.0]
    chosen = live[rng.choose([s.probability for s in live])]
    events = [TrialEvent(s.time, EventKind.NEGATIVE_COLLAPSE, s.segment, trial_index)
              for s in live if s.time < chosen.time]
    site = chosen.label if chosen.kind is EventKind.CLICK else chosen.element
    events.append(TrialEvent(chosen.time, chosen.kind, site, trial_index, particle=True))
    return events


@dataclass
class OrthodoxState:
    branches: list
    collapsed: bool
    absorbed_probability: float = 0.0
    rng_seed: int = None

    @property
    def norm(self):
        return math.fsum(b.intensity for b in self.branches)


def blocked_path_reduction(circuit):
    """Conditional state given that no obstacle absorbed the photon.

    The state is read off just after the last obstacle has acted: every path
    is located on the segment it occupies at that instant, coherent paths on
    the same segment are summed, and the survivors are renormalized.
    """
    if not circuit.obstacles:
        raise BadParameter(f"circuit {circuit.name!r} contains no obstacle")
    prop = propagate(circuit)
    grouping = prop.grouping

    obstacle_times = []
    reached = []

    def on_site(*_):
        pass

    def record(seg, t_enter, amp, group):
        reached.append((seg, t_enter, amp, group))
        if isinstance(circuit[seg.target], Obstacle):
            obstacle_times.append(t_enter + seg.delay)

    _source_walk(circuit, grouping.groups, on_site, on_segment=record)
    cut = max(obstacle_times) if obstacle_times else 0.0

    merged = {}
    for seg, t_enter, amp, group in reached:
        if t_enter <= cut < t_enter + seg.delay:
            key = (seg.id, time_bin(t_enter), group)
            merged[key] = merged.get(key, 0j) + amp

    branches = [WavePacket(amplitude=a, segment=sid, arrival_time=t + circuit.segment(sid).delay,
                           coherence_group=g)
                for (sid, t, g), a in merged.items() if abs(a) ** 2 > DARK]
    by_segment = defaultdict(list)
    for b in branches:
        by_segment[b.segment].append((b.amplitude, b.coherence_group, False))
    norm = math.fsum(superposed_intensity(terms, grouping.coherence) for terms in by_segment.values())
    if norm <= DARK:
        raise AllPathsBlocked(f"every branch of {circuit.name!r} is absorbed")
    absorbed = math.fsum(prop.absorbed.values())
    scale = 1.0 / math.sqrt(norm)
    for b in branches:
        b.amplitude *= scale
    branches.sort(key=lambda b: (circuit.topo_index[circuit.segment(b.segment).source], b.segment))
    return OrthodoxState(branches=branches, collapsed=absorbed > 0.0, absorbed_probability=absorbed)
