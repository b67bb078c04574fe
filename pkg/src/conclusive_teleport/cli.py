"""``teleport-sim``: run, sweep and verify the teleportation protocols.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from typing import Optional, Sequence, Union

import numpy as np

from .analysis import (
    DEFAULT_INPUT,
    HAAR,
    SWEEP_COLUMNS,
    SweepRow,
    TrialSummary,
    analytic_branch_probs,
    analytic_success,
    conclusive_within_subspace,
    monte_carlo,
    sweep_alpha,
)
from .protocols import PROTOCOLS, QUBIT_ASSISTED, ChannelSpec, InputQubit, outcome_labels
from .verification import run_all

DEFAULT_TRIALS = 100_000
DEFAULT_SEED = 42
DEFAULT_GRID = (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
QUICK_TRIALS = 10_000
RENORM_TOL = 1e-6

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

InputSetting = Union[None, str, tuple[float, float, float, float]]


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    protocol: str = QUBIT_ASSISTED
    alpha_sq: float = 0.8
    input: InputSetting = None
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    output_format: str = "text"
    output_path: Optional[str] = None
    grid: Optional[list[float]] = None
    quick: bool = False
    timestamps: bool = False

    def validate(self) -> None:
        if not 0.5 <= self.alpha_sq <= 1.0:
            raise ConfigError("alpha_sq must lie in [0.5, 1]")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {', '.join(PROTOCOLS)}")
        for x in self.grid or ():
            if not 0.5 <= x <= 1.0:
                raise ConfigError(f"grid value {x!r}: alpha_sq must lie in [0.5, 1]")

    def input_qubit(self) -> InputQubit | str:
        if self.input is None:
            return DEFAULT_INPUT
        if self.input == HAAR:
            return HAAR
        re_a, im_a, re_b, im_b = self.input
        return InputQubit.normalized(complex(re_a, im_a), complex(re_b, im_b))

    def to_dict(self) -> dict:
        data = asdict(self)
        if isinstance(self.input, tuple):
            data["input"] = list(self.input)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        if isinstance(data.get("input"), list):
            data["input"] = tuple(data["input"])
        return cls(**data)


def parse_input(text: str) -> tuple[float, float, float, float]:
    try:
        parts = tuple(float(p) for p in text.split(","))
    except ValueError:
        raise ConfigError(f"--input expects re_a,im_a,re_b,im_b, got {text!r}") from None
    if len(parts) != 4 or not all(math.isfinite(p) for p in parts):
        raise ConfigError(f"--input expects four finite reals re_a,im_a,re_b,im_b, got {text!r}")
    norm = math.sqrt(sum(p * p for p in parts))
    if abs(norm - 1.0) > RENORM_TOL:
        raise ConfigError(f"input qubit must be normalised: |a|^2 + |b|^2 = {norm * norm!r}")
    if abs(norm * norm - 1.0) > 1e-12:
        print(f"warning: input norm {norm!r} renormalised to 1", file=sys.stderr)
        parts = tuple(p / norm for p in parts)
    return parts


def parse_grid(text: str) -> list[float]:
    try:
        grid = [float(x) for x in text.split(",")]
    except ValueError:
        raise ConfigError(f"malformed --grid {text!r}") from None
    if not grid or not all(math.isfinite(x) for x in grid):
        raise ConfigError(f"malformed --grid {text!r}")
    return grid


def _fmt(x: float) -> str:
    return "nan" if isinstance(x, float) and math.isnan(x) else f"{x:.17g}"


def _json_safe(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _dump_json(report: dict) -> str:
    return json.dumps(_json_safe(report), indent=2, allow_nan=False) + "\n"


def _header(config: RunConfig) -> list[str]:
    lines = ["# teleport-sim " + config.command]
    if config.timestamps:
        lines.append("# generated " + datetime.now(timezone.utc).isoformat(timespec="seconds"))
    for key, value in config.to_dict().items():
        if key in ("command", "timestamps"):
            continue
        lines.append(f"# {key} = {'default (0.6, 0.8)' if key == 'input' and value is None else value}")
    return lines


# --- run ---------------------------------------------------------------------

def build_run_report(config: RunConfig) -> dict:
    channel = ChannelSpec.from_alpha_sq(config.alpha_sq)
    inp = config.input_qubit()
    summary = monte_carlo(config.protocol, channel, inp, config.trials, config.seed)
    # branch formulas are linear in |a|^2, |b|^2, so the Haar average is the
    # value at |a|^2 = |b|^2 = 1/2
    ref_input = InputQubit(1 / math.sqrt(2), 1 / math.sqrt(2)) if inp == HAAR else inp
    analytic = {
        "success": analytic_success(config.protocol, channel),
        "conclusive_within_subspace": conclusive_within_subspace(channel),
        "branches": analytic_branch_probs(config.protocol, channel, ref_input),
        "input_averaged": inp == HAAR,
    }
    return {"config": config.to_dict(), "analytic": analytic, "empirical": summary.to_dict(), "checks": []}


def load_report(text: str) -> tuple[RunConfig, dict]:
    """Parse a JSON report back into its config and result sections."""
    data = json.loads(text)
    config = RunConfig.from_dict(data["config"])
    results = {k: data[k] for k in ("analytic", "empirical", "checks")}
    if config.command == "run":
        results["empirical"] = TrialSummary.from_dict(results["empirical"])
    elif config.command == "sweep":
        results["empirical"] = [
            SweepRow(**{k: (float("nan") if v is None else v) for k, v in row.items()})
            for row in results["empirical"]
        ]
    return config, results


def render_run(config: RunConfig, report: dict) -> str:
    analytic, empirical = report["analytic"], report["empirical"]
    labels = outcome_labels(config.protocol)
    if config.output_format == "json":
        return _dump_json(report)
    if config.output_format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["label", "analytic_probability", "empirical_frequency", "std_err"])
        for label in labels:
            writer.writerow([label, _fmt(analytic["branches"][label]),
                             _fmt(empirical["empirical_frequencies"][label]),
                             _fmt(empirical["standard_errors"][label])])
        return buf.getvalue()
    lines = _header(config)
    lines.append("")
    lines.append(f"{'branch':<16} {'analytic':>12} {'empirical':>12} {'std_err':>12}")
    for label in labels:
        lines.append(f"{label:<16} {analytic['branches'][label]:>12.6f} "
                     f"{empirical['empirical_frequencies'][label]:>12.6f} "
                     f"{empirical['standard_errors'][label]:>12.2e}")
    if analytic["input_averaged"]:
        lines.append("(analytic branch values averaged over Haar inputs)")
    lines.append("")
    lines.append(f"analytic success     {analytic['success']:.6f}")
    lines.append(f"empirical success    {empirical['success_rate']:.6f} +/- {empirical['success_std_err']:.2e}")
    lines.append(f"conclusive in subspace {analytic['conclusive_within_subspace']:.6f}")
    fid = empirical["mean_success_fidelity"]
    lines.append("mean success fidelity " + ("n/a (no successes)" if math.isnan(fid) else f"{fid:.12f}"))
    return "\n".join(lines) + "\n"


# --- sweep -------------------------------------------------------------------

def build_sweep_report(config: RunConfig) -> dict:
    grid = config.grid if config.grid is not None else list(DEFAULT_GRID)
    rows = sweep_alpha(grid, config.protocol, config.trials, config.seed, config.input_qubit())
    return {
        "config": config.to_dict(),
        "analytic": [{"alpha_sq": r.alpha_sq, "analytic_success": r.analytic_success,
                      "conclusive_within_subspace": r.conclusive_within_subspace} for r in rows],
        "empirical": [asdict(r) for r in rows],
        "checks": [],
    }


def render_sweep(config: RunConfig, report: dict) -> str:
    rows = report["empirical"]
    if config.output_format == "json":
        return _dump_json(report)
    if config.output_format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in SWEEP_COLUMNS])
        return buf.getvalue()
    lines = _header(config) + [""]
    lines.append("  ".join(f"{c:>26}" for c in SWEEP_COLUMNS))
    for row in rows:
        lines.append("  ".join(f"{row[c]:>26.10g}" for c in SWEEP_COLUMNS))
    return "\n".join(lines) + "\n"


# --- verify ------------------------------------------------------------------

def build_verify_report(config: RunConfig) -> dict:
    checks = run_all(seed=config.seed, quick=config.quick)
    return {"config": config.to_dict(), "analytic": {}, "empirical": {},
            "checks": [c.to_dict() for c in checks]}


def render_verify(config: RunConfig, report: dict) -> str:
    checks = report["checks"]
    if config.output_format == "json":
        return _dump_json(report)
    if config.output_format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name", "passed", "detail"])
        for c in checks:
            writer.writerow([c["name"], int(c["passed"]), c["detail"]])
        return buf.getvalue()
    lines = _header(config) + [""]
    for c in checks:
        lines.append(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['name']}: {c['detail']}")
    failed = [c["name"] for c in checks if not c["passed"]]
    lines.append("")
    lines.append(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    if failed:
        lines.append("failed: " + "; ".join(failed))
    return "\n".join(lines) + "\n"


# --- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--protocol", choices=PROTOCOLS, default=QUBIT_ASSISTED)
    common.add_argument("--alpha-sq", type=float, default=0.8,
                        help="squared larger Schmidt coefficient, in [0.5, 1] (default 0.8)")
    source = common.add_mutually_exclusive_group()
    source.add_argument("--input", metavar="RE_A,IM_A,RE_B,IM_B",
                        help="unknown qubit a|0> + b|1> (default a=0.6, b=0.8)")
    source.add_argument("--haar", action="store_true", help="draw a Haar-random input per trial")
    common.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--format", dest="output_format", choices=("text", "json", "csv"))
    common.add_argument("--out", dest="output_path", metavar="PATH")
    common.add_argument("--timestamps", action="store_true", help="stamp text reports with the time")

    parser = argparse.ArgumentParser(prog="teleport-sim", description="Run, sweep and verify the teleportation protocols.",
                                     epilog="exit codes: 0 ok, 1 verification failure, 2 usage or configuration error")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="sample one protocol at one channel")
    sweep = sub.add_parser("sweep", parents=[common], help="success probability across alpha^2")
    grid = sweep.add_mutually_exclusive_group()
    grid.add_argument("--grid", help="comma-separated alpha^2 values")
    grid.add_argument("--grid-steps", type=int, help="evenly spaced points over [0.5, 1]")
    verify = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    verify.add_argument("--quick", action="store_true", help="10^4 trials for the sampled checks")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    default_format = "csv" if args.command == "sweep" else "text"
    config = RunConfig(
        command=args.command,
        protocol=args.protocol,
        alpha_sq=args.alpha_sq,
        input=HAAR if args.haar else (parse_input(args.input) if args.input else None),
        trials=args.trials,
        seed=args.seed,
        output_format=args.output_format or default_format,
        output_path=args.output_path,
        quick=getattr(args, "quick", False),
        timestamps=args.timestamps,
    )
    if args.command == "sweep":
        if args.grid is not None:
            config.grid = parse_grid(args.grid)
        elif args.grid_steps is not None:
            if args.grid_steps < 1:
                raise ConfigError("--grid-steps must be at least 1")
            config.grid = [float(x) for x in np.linspace(0.5, 1.0, args.grid_steps)]
    if config.quick:
        config.trials = min(config.trials, QUICK_TRIALS)
    config.validate()
    return config


COMMANDS = {
    "run": (build_run_report, render_run),
    "sweep": (build_sweep_report, render_sweep),
    "verify": (build_verify_report, render_verify),
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"teleport-sim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    build, render = COMMANDS[config.command]
    report = build(config)
    text = render(config, report)
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if config.command == "verify" and not all(c["passed"] for c in report["checks"]):
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
