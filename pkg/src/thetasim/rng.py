"""Counter-based per-trial random streams.

Every trial owns a 64-bit key derived from ``(seed, stream, trial_index)``;
draw ``k`` of the trial is a pure function of that key and ``k``.  This is
what makes results independent of how trials are sharded across workers,
and lets the compiled kernel reproduce the Python engines bit for bit.

The mixing function is the SplitMix64 finalizer.  Routing draws use even
counters, phase draws odd counters, so the two streams never collide.
"""

import math
import zlib

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
INV_2_53 = 1.0 / (1 << 53)


def mix64(x):
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def stream_salt(stream):
    """Stable 32-bit salt for a named stream such as ``"pilotwave:absorb"``."""
    return zlib.crc32(stream.encode("utf-8"))


def base_key(seed, stream):
    return mix64((seed & MASK64) ^ (stream_salt(stream) << 32))


def trial_key(seed, stream, trial_index):
    return mix64((base_key(seed, stream) + trial_index) & MASK64)


def uniform_from(key, counter):
    return (mix64((key + counter) & MASK64) >> 11) * INV_2_53


def choice_table(weights, tol=0.0):
    """Reduce raw weights to the options a draw actually chooses between.

    Returns ``(indices, cumulative)`` where ``indices`` are the positions of
    weights above ``tol`` and ``cumulative`` is their normalized running sum
    with the last entry pinned to exactly 1.0.  Both the live engines and the
    compiled kernel sample with ``first k such that u < cumulative[k]``.
    """
    indices = [i for i, w in enumerate(weights) if w > tol]
    if not indices:
        return [], []
    total = math.fsum(weights[i] for i in indices)
    cumulative = []
    acc = 0.0
    for i in indices[:-1]:
        acc += weights[i] / total
        cumulative.append(acc)
    cumulative.append(1.0)
    return indices, cumulative


def pick(cumulative, u):
    for k, c in enumerate(cumulative):
        if u < c:
            return k
    return len(cumulative) - 1


class TrialRng:
    """Random source for a single trial.

    ``choose`` consumes one routing draw only when more than one option has
    non-zero weight; this rule is shared with the compiled tree walker.
    """

    def __init__(self, seed, trial_index=0, stream="default"):
        self.seed = seed
        self.trial_index = trial_index
        self.stream = stream
        self.key = trial_key(seed, stream, trial_index)
        self.draws = 0
        self.phase_draws = 0

    def choose(self, weights, tol=0.0):
        indices, cumulative = choice_table(weights, tol)
        if not indices:
            raise ValueError("no option has positive weight")
        if len(indices) == 1:
            return indices[0]
        u = uniform_from(self.key, 2 * self.draws)
        self.draws += 1
        return indices[pick(cumulative, u)]

    def phase(self):
        """Uniform phase in [0, 2*pi) from the independent phase stream."""
        u = uniform_from(self.key, 2 * self.phase_draws + 1)
        self.phase_draws += 1
        return 2.0 * math.pi * u
