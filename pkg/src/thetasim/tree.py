"""Exhaustive enumeration of an engine's random decisions.

A trial of either engine is a deterministic function of the answers its
random source gives to ``choose``.  Replaying the trial with scripted
answers visits every possible decision sequence; the result is a finite
tree whose leaves are complete event logs with exact probabilities.  The
tree is what the compiled kernel walks, so a kernel trial and a live trial
fed the same random stream produce the same log.
"""

from dataclasses import dataclass

import numpy as np

from .errors import MalformedLog
from .events import OutcomeDistribution
from .rng import choice_table
from .stats import terminal_outcome


class _ScriptedRng:
    def __init__(self, script):
        self.script = script
        self.decisions = []

    def choose(self, weights, tol=0.0):
        indices, cumulative = choice_table(weights, tol)
        if not indices:
            raise ValueError("no option has positive weight")
        if len(indices) == 1:
            return indices[0]
        depth = len(self.decisions)
        k = self.script[depth] if depth < len(self.script) else 0
        self.decisions.append((tuple(cumulative), k))
        return indices[k]

    def phase(self):
        return 0.0


@dataclass(frozen=True)
class Leaf:
    choices: tuple
    probability: float
    events: tuple
    outcome: str


@dataclass
class OutcomeTree:
    leaves: list
    child_start: np.ndarray
    child_count: np.ndarray
    cumulative: np.ndarray
    child: np.ndarray
    leaf_of: np.ndarray

    def distribution(self, labels=()):
        probs = {label: 0.0 for label in labels}
        for leaf in self.leaves:
            probs[leaf.outcome] = probs.get(leaf.outcome, 0.0) + leaf.probability
        return OutcomeDistribution(probs)

    def arrays(self):
        return (self.child_start, self.child_count, self.cumulative, self.child, self.leaf_of)


def enumerate_tree(trial, strict=True):
    """Enumerate every decision path of ``trial(rng) -> events``.

    With ``strict`` a leaf whose log does not hold exactly one terminal event
    raises :class:`MalformedLog`; otherwise its outcome is recorded as
    ``"<malformed>"`` so that the defect can be counted downstream.
    """
    runs = []
    stack = [()]
    while stack:
        script = stack.pop()
        rng = _ScriptedRng(script)
        events = tuple(trial(rng))
        taken = tuple(k for _, k in rng.decisions)
        for depth in range(len(script), len(rng.decisions)):
            n = len(rng.decisions[depth][0])
            for alt in range(n - 1, 0, -1):
                stack.append(taken[:depth] + (alt,))
        runs.append((taken, [c for c, _ in rng.decisions], events))
    runs.sort(key=lambda r: r[0])

    # Trie over decision sequences.
    children = [{}]
    cums = [None]
    leaf_index = {}
    leaves = []
    for taken, decisions, events in runs:
        node = 0
        prob = 1.0
        for cum, k in zip(decisions, taken):
            if cums[node] is None:
                cums[node] = cum
            lo = cum[k - 1] if k else 0.0
            prob *= cum[k] - lo
            nxt = children[node].get(k)
            if nxt is None:
                nxt = len(children)
                children[node][k] = nxt
                children.append({})
                cums.append(None)
            node = nxt
        try:
            outcome = terminal_outcome(events)
        except MalformedLog:
            if strict:
                raise
            outcome = "<malformed>"
        leaf_index[node] = len(leaves)
        leaves.append(Leaf(taken, prob, events, outcome))

    n = len(children)
    child_start = np.zeros(n, dtype=np.int64)
    child_count = np.zeros(n, dtype=np.int64)
    leaf_of = np.full(n, -1, dtype=np.int64)
    flat_cum = []
    flat_child = []
    for node in range(n):
        kids = children[node]
        child_start[node] = len(flat_child)
        child_count[node] = len(kids)
        if kids:
            if sorted(kids) != list(range(len(cums[node]))):
                raise RuntimeError(f"incomplete enumeration at tree node {node}")
            flat_cum.extend(cums[node])
            flat_child.extend(kids[k] for k in range(len(kids)))
        else:
            leaf_of[node] = leaf_index[node]
    return OutcomeTree(
        leaves=leaves,
        child_start=child_start,
        child_count=child_count,
        cumulative=np.asarray(flat_cum, dtype=np.float64),
        child=np.asarray(flat_child, dtype=np.int64),
        leaf_of=leaf_of,
    )
