"""Command-line interface: ``thetasim run | verify | oracle | export-circuit``.

Exit status: 0 success, 1 verification failure, 2 usage error, 3 I/O error.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

from . import experiments, simulate, verify
from .errors import BadParameter, CircuitError, ThetasimError
from .optics import load_circuit
from .pilotwave import MODES

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
SEED_ENV = "THETASIM_SEED"
FORMATS = ("table", "json", "csv")
PARAM_FLAGS = {
    "bomb": "--bomb",
    "transmittance": "--transmittance",
    "phase": "--phase",
    "delay_short": "--delay-short",
    "delay_long": "--delay-long",
}


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    command: str
    experiment: experiments.ExperimentSpec = None
    circuit_path: str = None
    engine: str = "orthodox"
    mode: str = None
    trials: int = 100_000
    seed: int = 0
    format: str = "table"
    output: str = None
    workers: int = 1
    seeds: tuple = field(default=verify.DEFAULT_SEEDS)
    sweep_points: int = 20
    mutate: str = None


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _seed(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if not -(2**63) <= value < 2**64:
        raise argparse.ArgumentTypeError(f"{value} does not fit in 64 bits")
    return value


def _finite(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"{text!r} is not finite")
    return value


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _experiment_flags(p, required=True):
    p.add_argument("--experiment", choices=experiments.NAMES, required=required)
    p.add_argument("--bomb", choices=experiments.BOMBS)
    p.add_argument("--transmittance", type=_finite)
    p.add_argument("--phase", type=_finite, help="radians")
    p.add_argument("--delay-short", type=_finite)
    p.add_argument("--delay-long", type=_finite)


def _output_flag(p):
    p.add_argument("--output", metavar="PATH", help="write here instead of standard output")


def build_parser():
    parser = _Parser(prog="thetasim", description="Single-photon interferometry: orthodox vs pilot-wave.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="simulate trials and compare with the analytic oracle")
    _experiment_flags(run, required=False)
    run.add_argument("--circuit", metavar="PATH", help="circuit file (JSON) instead of --experiment")
    run.add_argument("--engine", choices=simulate.ENGINES, default="orthodox")
    run.add_argument("--mode", choices=MODES, help="pilot-wave treatment of blocked empty waves")
    run.add_argument("--trials", type=_positive_int, default=100_000)
    run.add_argument("--seed", type=_seed, help=f"default: ${SEED_ENV} or 0")
    run.add_argument("--format", choices=FORMATS, default="table")
    run.add_argument("--workers", type=_positive_int, default=1)
    _output_flag(run)

    ver = sub.add_parser("verify", help="run the cross-engine verification grid")
    ver.add_argument("--trials", type=_positive_int, default=verify.DEFAULT_TRIALS)
    ver.add_argument("--seeds", type=_seed, nargs="+", default=list(verify.DEFAULT_SEEDS))
    ver.add_argument("--sweep-points", type=_positive_int, default=20)
    ver.add_argument("--mutate", choices=sorted(verify.MUTATIONS),
                     help="plant a known-wrong rule in the pilot-wave engine")
    ver.add_argument("--format", choices=("table", "json"), default="table")
    ver.add_argument("--workers", type=_positive_int, default=1)
    _output_flag(ver)

    orc = sub.add_parser("oracle", help="print the analytic outcome distribution")
    _experiment_flags(orc)
    orc.add_argument("--format", choices=FORMATS, default="table")
    _output_flag(orc)

    exp = sub.add_parser("export-circuit", help="write the circuit file (JSON) of an experiment")
    _experiment_flags(exp)
    _output_flag(exp)
    parser.commands = {"run": run, "verify": ver, "oracle": orc, "export-circuit": exp}
    return parser


def _experiment(ns, parser):
    given = {k: getattr(ns, k) for k in PARAM_FLAGS if getattr(ns, k, None) is not None}
    if ns.experiment is None:
        if given:
            flag = PARAM_FLAGS[next(iter(given))]
            parser.error(f"argument {flag}: requires --experiment")
        return None
    try:
        return experiments.ExperimentSpec(ns.experiment, **given)
    except BadParameter as exc:
        text = str(exc)
        culprit = next((PARAM_FLAGS[k] for k in given if text.startswith(k) or k in text), "--experiment")
        parser.error(f"argument {culprit}: {text}")


def _default_seed(parser):
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return _seed(raw.strip())
    except argparse.ArgumentTypeError as exc:
        parser.error(f"environment {SEED_ENV}: {exc}")


def parse_args(argv):
    """Validate ``argv`` into a :class:`CliConfig`; raises :class:`UsageError`."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    cfg = CliConfig(command=ns.command, output=ns.output)
    sub = parser.commands[ns.command]
    if ns.command == "verify":
        cfg.trials, cfg.seeds, cfg.sweep_points = ns.trials, tuple(ns.seeds), ns.sweep_points
        cfg.mutate, cfg.format, cfg.workers = ns.mutate, ns.format, ns.workers
        return cfg
    cfg.experiment = _experiment(ns, sub)
    if ns.command == "run":
        if (ns.circuit is None) == (cfg.experiment is None):
            sub.error("argument --circuit: give exactly one of --experiment or --circuit")
        if ns.engine == "orthodox" and ns.mode is not None:
            sub.error("argument --mode: the orthodox engine has no mode")
        cfg.circuit_path = ns.circuit
        cfg.engine, cfg.mode, cfg.trials = ns.engine, ns.mode, ns.trials
        cfg.seed = ns.seed if ns.seed is not None else _default_seed(sub)
        cfg.workers = ns.workers
    if ns.command in ("run", "oracle"):
        cfg.format = ns.format
    return cfg


# ---------------------------------------------------------------------------
# Rendering


def _csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _columns(rows):
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows) + "\n"


def _verdict(gof):
    if gof["impossible"]:
        return f"FAIL (impossible outcomes observed: {gof['impossible']})"
    return (f"{'PASS' if gof['passed'] else 'FAIL'} "
            f"(chi2={gof['statistic']:.4f}, dof={gof['dof']}, p={gof['p_value']:.4g})")


def render_report(report, fmt):
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    if fmt == "csv":
        rows = [("outcome", "count", "frequency", "ci_low", "ci_high", "expected")]
        for k, c in report.counts.items():
            lo, hi = report.intervals[k]
            rows.append((k, c, repr(report.frequencies[k]), repr(lo), repr(hi),
                         repr(report.expected.get(k, 0.0))))
        return _csv(rows)
    params = " ".join(f"{k}={v}" for k, v in report.params.items())
    engine = report.engine + (f" ({report.mode})" if report.mode else "")
    head = (f"experiment: {report.experiment}{' ' + params if params else ''}\n"
            f"engine: {engine}\ntrials: {report.trials}  seed: {report.seed}\n\n")
    rows = [("outcome", "count", "frequency", "99% CI", "expected")]
    for k, c in report.counts.items():
        lo, hi = report.intervals[k]
        rows.append((k, str(c), f"{report.frequencies[k]:.4f}", f"[{lo:.4f}, {hi:.4f}]",
                     f"{report.expected.get(k, 0.0):.4f}"))
    events = ", ".join(f"{k}={v}" for k, v in sorted(report.events_histogram.items()))
    return head + _columns(rows) + f"\nGOF vs oracle: {_verdict(report.gof)}\nevents: {events}\n"


def render_oracle(spec, fmt):
    dist = experiments.expected_distribution(spec)
    if fmt == "json":
        doc = {"experiment": spec.name, "params": spec.params(), "expected": dict(dist)}
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "csv":
        return _csv([("outcome", "probability")] + [(k, repr(p)) for k, p in dist.items()])
    return _columns([("outcome", "probability")] + [(k, f"{p:.12g}") for k, p in dist.items()])


def render_verify(cells, fmt):
    failed = [c for c in cells if not c.passed]
    if fmt == "json":
        doc = {"passed": not failed, "cells": [c.to_dict() for c in cells]}
        return json.dumps(doc, indent=2) + "\n"
    text = verify.format_matrix(cells) + "\n\n"
    if failed:
        text += f"{len(failed)} of {len(cells)} cells FAIL:\n"
        text += "".join(f"  {c.row} {c.check} seed={c.seed}: {c.detail}\n" for c in failed)
    else:
        text += f"all {len(cells)} cells PASS\n"
    return text


# ---------------------------------------------------------------------------
# Commands


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_run(cfg):
    if cfg.circuit_path is not None:
        with open(cfg.circuit_path, encoding="utf-8") as fh:
            target = load_circuit(fh.read())
    else:
        target = cfg.experiment
    report = simulate.run(target, cfg.engine, cfg.trials, cfg.seed, mode=cfg.mode, workers=cfg.workers)
    _emit(render_report(report, cfg.format), cfg.output)
    return EXIT_OK


def cmd_verify(cfg):
    cells = verify.run_suite(cfg.trials, cfg.seeds, cfg.sweep_points, cfg.mutate, cfg.workers)
    _emit(render_verify(cells, cfg.format), cfg.output)
    return EXIT_OK if all(c.passed for c in cells) else EXIT_FAIL


def cmd_oracle(cfg):
    _emit(render_oracle(cfg.experiment, cfg.format), cfg.output)
    return EXIT_OK


def cmd_export_circuit(cfg):
    _emit(experiments.build(cfg.experiment).to_json(), cfg.output)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "oracle": cmd_oracle, "export-circuit": cmd_export_circuit}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[cfg.command](cfg)
    except CircuitError as exc:
        print(f"thetasim: invalid circuit {cfg.circuit_path}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"thetasim: {exc}", file=sys.stderr)
        return EXIT_IO
    except ThetasimError as exc:
        print(f"thetasim: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
