"""Tallies, confidence intervals and chi-square tests for trial logs.

The chi-square survival function is evaluated here (series and continued
fraction for the regularized incomplete gamma function) so that the package
has no statistical dependency beyond the standard library.
"""

import math
from collections import Counter
from dataclasses import dataclass, field

from .errors import BadParameter, ImpossibleOutcome, MalformedLog, SpecMismatch

Z_99 = 2.576
EQUIVALENCE_ALPHA = 1e-3
SCHEMA_VERSION = 1


def terminal_outcome(log):
    terminals = [e for e in log if e.terminal]
    if len(terminals) != 1:
        raise MalformedLog(f"expected one terminal event, found {len(terminals)}: {terminals}")
    return terminals[0].outcome()


def tally(logs):
    """Count terminal outcomes over per-trial event logs."""
    counts = Counter()
    for log in logs:
        counts[terminal_outcome(log)] += 1
    return counts


def merge_counts(*parts):
    total = Counter()
    for part in parts:
        total.update(part)
    return total


def event_histogram(logs):
    hist = Counter()
    for log in logs:
        hist.update(e.kind.value for e in log)
    return hist


def wilson_interval(count, n, z=Z_99):
    """Wilson score interval for a binomial proportion."""
    if not (isinstance(count, int) and isinstance(n, int)):
        raise BadParameter("count and n must be integers")
    if n < 1 or not 0 <= count <= n or not z > 0:
        raise BadParameter(f"need n >= 1, 0 <= count <= n, z > 0; got {count}, {n}, {z}")
    p = count / n
    z2 = z * z
    denom = 1.0 + z2 / n
    centre = (p + z2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    lo = 0.0 if count == 0 else max(0.0, centre - half)
    hi = 1.0 if count == n else min(1.0, centre + half)
    return min(lo, p), max(hi, p)


def _gamma_series(a, x):
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(10000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_continued_fraction(a, x):
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def chi2_sf(statistic, dof):
    """Upper tail probability of the chi-square distribution."""
    if dof < 1:
        raise BadParameter(f"dof must be >= 1, got {dof}")
    if math.isinf(statistic):
        return 0.0
    if statistic <= 0.0:
        return 1.0
    a, x = dof / 2.0, statistic / 2.0
    if x == 0.0:  # statistic was subnormal
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, x))
    return min(1.0, _gamma_continued_fraction(a, x))


@dataclass(frozen=True)
class ChiSquare:
    statistic: float
    dof: int
    p_value: float

    @property
    def passed(self):
        return self.p_value > EQUIVALENCE_ALPHA

    def to_dict(self):
        return {"statistic": self.statistic, "dof": self.dof, "p_value": self.p_value}


def chi_square_gof(observed, expected, trials):
    """Pearson goodness of fit of outcome counts to a distribution.

    Categories with zero expected probability are excluded from the
    statistic; any observation in one raises :class:`ImpossibleOutcome`.
    """
    if not isinstance(trials, int) or trials < 1:
        raise BadParameter(f"trials must be a positive integer, got {trials!r}")
    if sum(observed.values()) != trials:
        raise BadParameter(f"counts sum to {sum(observed.values())}, not {trials}")
    impossible = {k: v for k, v in observed.items() if v and expected.get(k, 0.0) <= 0.0}
    if impossible:
        raise ImpossibleOutcome(impossible)
    live = [k for k, p in expected.items() if p > 0.0]
    if len(live) < 2:
        return ChiSquare(0.0, 0, 1.0)
    stat = 0.0
    for k in live:
        e = trials * expected[k]
        stat += (observed.get(k, 0) - e) ** 2 / e
    dof = len(live) - 1
    return ChiSquare(stat, dof, chi2_sf(stat, dof))


def homogeneity(counts_a, counts_b):
    """Two-sample chi-square homogeneity test on outcome counts."""
    na, nb = sum(counts_a.values()), sum(counts_b.values())
    if na < 1 or nb < 1:
        raise BadParameter("both samples need at least one trial")
    labels = sorted(k for k in set(counts_a) | set(counts_b) if counts_a.get(k, 0) + counts_b.get(k, 0))
    if len(labels) < 2:
        return ChiSquare(0.0, 0, 1.0)
    n = na + nb
    stat = 0.0
    for k in labels:
        col = counts_a.get(k, 0) + counts_b.get(k, 0)
        for obs, row in ((counts_a.get(k, 0), na), (counts_b.get(k, 0), nb)):
            e = row * col / n
            stat += (obs - e) ** 2 / e
    dof = len(labels) - 1
    return ChiSquare(stat, dof, chi2_sf(stat, dof))


def within_tolerance(count, trials, p, sigmas=5.0):
    """``|count/trials - p| <= sigmas * sqrt(p(1-p)/trials)``."""
    return abs(count / trials - p) <= sigmas * math.sqrt(p * (1.0 - p) / trials)


@dataclass
class RunReport:
    experiment: str
    params: dict
    engine: str
    mode: str
    trials: int
    seed: int
    counts: dict
    expected: dict
    events_histogram: dict = field(default_factory=dict)
    frequencies: dict = field(init=False)
    intervals: dict = field(init=False)
    gof: dict = field(init=False)

    def __post_init__(self):
        if self.trials < 1:
            raise BadParameter("a report needs at least one trial")
        if sum(self.counts.values()) != self.trials:
            raise BadParameter("counts do not sum to trials")
        labels = sorted(set(self.expected) | set(self.counts))
        self.counts = {k: int(self.counts.get(k, 0)) for k in labels}
        self.frequencies = {k: c / self.trials for k, c in self.counts.items()}
        self.intervals = {k: wilson_interval(c, self.trials) for k, c in self.counts.items()}
        try:
            res = chi_square_gof(self.counts, self.expected, self.trials)
            self.gof = {**res.to_dict(), "passed": res.passed, "impossible": {}}
        except ImpossibleOutcome as exc:
            self.gof = {"statistic": math.inf, "dof": None, "p_value": 0.0, "passed": False,
                        "impossible": exc.outcomes}

    def within_tolerance(self, sigmas=5.0):
        return all(within_tolerance(self.counts.get(k, 0), self.trials, self.expected.get(k, 0.0), sigmas)
                   for k in self.counts)

    def to_dict(self):
        gof = dict(self.gof)
        if math.isinf(gof["statistic"]):
            gof["statistic"] = "inf"
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "params": self.params,
            "engine": self.engine,
            "mode": self.mode,
            "trials": self.trials,
            "seed": self.seed,
            "counts": self.counts,
            "frequencies": self.frequencies,
            "intervals": {k: list(v) for k, v in self.intervals.items()},
            "expected": self.expected,
            "gof": gof,
            "events_histogram": dict(sorted(self.events_histogram.items())),
        }


@dataclass(frozen=True)
class Comparison:
    test: ChiSquare
    deltas: dict

    @property
    def verdict(self):
        return "PASS" if self.test.passed else "FAIL"


def compare(report_a, report_b):
    """Do two runs of the same experiment share one outcome distribution?"""
    if (report_a.experiment, report_a.params) != (report_b.experiment, report_b.params):
        raise SpecMismatch(f"{report_a.experiment} {report_a.params} vs "
                           f"{report_b.experiment} {report_b.params}")
    test = homogeneity(report_a.counts, report_b.counts)
    labels = sorted(set(report_a.frequencies) | set(report_b.frequencies))
    deltas = {k: report_a.frequencies.get(k, 0.0) - report_b.frequencies.get(k, 0.0) for k in labels}
    return Comparison(test, deltas)
