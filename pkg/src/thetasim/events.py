"""Wave packets, trial events and outcome distributions shared by both engines."""

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import BadParameter

# Intensities below this are treated as exactly dark.
DARK = 1e-24


class EventKind(str, Enum):
    CLICK = "Click"
    EXPLOSION = "Explosion"
    ABSORPTION = "Absorption"
    NEGATIVE_COLLAPSE = "NegativeCollapse"
    EMPTY_WAVE_ARRIVAL = "EmptyWaveArrival"


EXPLOSION_LABEL = "Explosion"


def absorbed_label(element_id):
    return f"Absorbed:{element_id}"


@dataclass(frozen=True)
class TrialEvent:
    """One timestamped occurrence inside a trial.

    ``site`` names the detector, obstacle or excluded branch involved.
    ``particle`` records provenance: True when the event was caused by the
    detected particle itself (the photon in the orthodox engine, the acron in
    the pilot-wave engine) rather than by an empty wave.
    """

    time: float
    kind: EventKind
    site: str
    trial_index: int = 0
    particle: bool = False

    @property
    def terminal(self):
        if self.kind in (EventKind.CLICK, EventKind.EXPLOSION):
            return True
        return self.kind is EventKind.ABSORPTION and self.particle

    def outcome(self):
        """Outcome label for a terminal event."""
        if self.kind is EventKind.CLICK:
            return self.site
        if self.kind is EventKind.EXPLOSION:
            return EXPLOSION_LABEL
        return absorbed_label(self.site)

    def with_trial(self, trial_index):
        return replace(self, trial_index=trial_index)


@dataclass
class WavePacket:
    amplitude: complex
    segment: str
    arrival_time: float
    carries_acron: bool = False
    coherence_group: int = 0
    phase_randomized: bool = False
    species: str = "plain"
    origin: str = None
    # Phase drawn when the packet was scrambled.  Kept apart from the
    # amplitude: it never enters an intensity, and multiplying it in would
    # only perturb intensities in the last bit.
    random_phase: float = None

    @property
    def intensity(self):
        a = self.amplitude
        return a.real * a.real + a.imag * a.imag


class Coherence:
    """Pairwise mutual coherence between coherence groups.

    Equal groups are fully coherent; distinct groups default to incoherent
    unless an explicit overlap in [0, 1] was registered.
    """

    def __init__(self):
        self._overlap = {}
        self._next = 1

    def new_group(self):
        g = self._next
        self._next += 1
        return g

    def set_overlap(self, a, b, value):
        if a == b:
            return
        if not 0.0 <= value <= 1.0 + 1e-12:
            raise BadParameter(f"overlap {value} outside [0, 1]")
        self._overlap[frozenset((a, b))] = min(value, 1.0)

    def overlap(self, a, b):
        if a == b:
            return 1.0
        return self._overlap.get(frozenset((a, b)), 0.0)

    def partners(self, group):
        for key, value in self._overlap.items():
            if group in key and value > 0.0:
                (other,) = key - {group}
                yield other, value

    def link(self, new, seed_group, fraction):
        """Lock ``new`` to ``seed_group`` with the given coherence fraction,
        inheriting the seed group's own partial coherences multiplicatively."""
        self.set_overlap(new, seed_group, fraction)
        for other, value in list(self.partners(seed_group)):
            if other != new:
                self.set_overlap(new, other, fraction * value)


def superposed_intensity(terms, coherence):
    """Intensity of a superposition of ``(amplitude, group, randomized)`` terms.

    Cross terms between groups are weighted by their mutual coherence;
    phase-randomized terms never contribute cross terms.
    """
    total = 0.0
    for i, (a, ga, ra) in enumerate(terms):
        total += a.real * a.real + a.imag * a.imag
        if ra:
            continue
        for b, gb, rb in terms[i + 1:]:
            if rb:
                continue
            w = coherence.overlap(ga, gb)
            if w:
                total += 2.0 * w * (a * b.conjugate()).real
    return total


class OutcomeDistribution(dict):
    """Mapping from outcome label to probability, normalized within ``tol``."""

    tol = 1e-12

    def __init__(self, entries=(), tol=None):
        super().__init__(entries)
        for label, p in self.items():
            if not (isinstance(p, float) or isinstance(p, int)) or math.isnan(p):
                raise BadParameter(f"probability for {label!r} is not a number: {p!r}")
            if p < -self.tol or p > 1.0 + self.tol:
                raise BadParameter(f"probability for {label!r} outside [0, 1]: {p}")
            self[label] = float(min(max(p, 0.0), 1.0))
        total = math.fsum(self.values())
        if abs(total - 1.0) > (self.tol if tol is None else tol):
            raise BadParameter(f"probabilities sum to {total!r}, not 1")

    def support(self):
        return {k for k, p in self.items() if p > 0.0}

    def __repr__(self):
        body = ", ".join(f"{k!r}: {v:.12g}" for k, v in sorted(self.items()))
        return f"OutcomeDistribution({{{body}}})"
