"""Cross-engine verification grid.

For every shipped experiment and seed, each engine (and each pilot-wave
mode) is checked against the closed-form oracle, and the engines are
checked against one another with a two-sample homogeneity test.  The
Mach-Zehnder phase sweep gets the same treatment at one seed per point.
"""

from dataclasses import dataclass

from . import experiments, simulate
from .pilotwave import ABSORB, RANDOMIZE, PilotConfig
from .stats import compare

DEFAULT_SEEDS = (1, 2, 3)
DEFAULT_TRIALS = 100_000
MUTATIONS = {
    "argmax-routing": {"routing": "argmax"},
    "empty-wave-clicks": {"empty_wave_clicks": True},
}
RUNS = ("orthodox", "pilot-absorb", "pilot-randomize")
CHECKS = (
    "orthodox~oracle",
    "pilot-absorb~oracle",
    "pilot-randomize~oracle",
    "orthodox=pilot-absorb",
    "orthodox=pilot-randomize",
    "pilot-absorb=pilot-randomize",
)


@dataclass(frozen=True)
class Cell:
    row: str
    check: str
    seed: int
    passed: bool
    detail: str

    def to_dict(self):
        return {"row": self.row, "check": self.check, "seed": self.seed,
                "verdict": "PASS" if self.passed else "FAIL", "detail": self.detail}


def _oracle_cell(row, check, seed, report):
    gof = report.gof
    if gof["impossible"]:
        return Cell(row, check, seed, False, f"ImpossibleOutcome {gof['impossible']}")
    ok = gof["passed"] and report.within_tolerance()
    detail = f"chi2={gof['statistic']:.3f} dof={gof['dof']} p={gof['p_value']:.4g}"
    if not report.within_tolerance():
        detail += " outside 5-sigma band"
    return Cell(row, check, seed, ok, detail)


def check_spec(spec, seed, trials=DEFAULT_TRIALS, mutation=None, workers=1):
    overrides = MUTATIONS[mutation] if mutation else {}
    reports = {
        "orthodox": simulate.run(spec, "orthodox", trials, seed, workers=workers),
        "pilot-absorb": simulate.run(spec, "pilotwave", trials, seed, workers=workers,
                                     config=PilotConfig(ABSORB, **overrides)),
        "pilot-randomize": simulate.run(spec, "pilotwave", trials, seed, workers=workers,
                                        config=PilotConfig(RANDOMIZE, **overrides)),
    }
    row = spec.label()
    cells = [_oracle_cell(row, f"{name}~oracle", seed, reports[name]) for name in RUNS]
    for a, b in (("orthodox", "pilot-absorb"), ("orthodox", "pilot-randomize"),
                 ("pilot-absorb", "pilot-randomize")):
        cmp = compare(reports[a], reports[b])
        cells.append(Cell(row, f"{a}={b}", seed, cmp.test.passed,
                          f"chi2={cmp.test.statistic:.3f} dof={cmp.test.dof} p={cmp.test.p_value:.4g}"))
    return cells


def run_suite(trials=DEFAULT_TRIALS, seeds=DEFAULT_SEEDS, sweep_points=20, mutation=None, workers=1):
    cells = []
    for spec in experiments.shipped_specs():
        for seed in seeds:
            cells += check_spec(spec, seed, trials, mutation, workers)
    for spec in experiments.phase_sweep(sweep_points):
        cells += check_spec(spec, seeds[0], trials, mutation, workers)
    return cells


def matrix(cells):
    """``{row: {check: "PASS" | "FAIL(seeds)"}}`` in grid order."""
    out = {}
    for c in cells:
        entry = out.setdefault(c.row, {}).setdefault(c.check, [])
        if not c.passed:
            entry.append(c.seed)
    return {row: {check: "PASS" if not bad else "FAIL(" + ",".join(map(str, bad)) + ")"
                  for check, bad in checks.items()}
            for row, checks in out.items()}


def format_matrix(cells):
    grid = matrix(cells)
    width = max(len(r) for r in grid) + 2
    header = "experiment".ljust(width) + " ".join(c.ljust(len(c)) for c in CHECKS)
    lines = [header, "-" * len(header)]
    for row, checks in grid.items():
        lines.append(row.ljust(width) + " ".join(checks.get(c, "-").ljust(len(c)) for c in CHECKS))
    return "\n".join(lines)
