"""Command-line interface.

Exit codes
----------
0  success
1  unexpected internal error
2  unreadable or invalid input file, bad config, bad argument
3  covariance not positive definite
4  samples and statistics dimensions disagree
5  output could not be written

Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .core import DimensionMismatch, NotPositiveDefinite, RfiMvueError, validate_statistics
from .estimators import DetectionConfig, baseline_estimate, weighted_sum_estimate
from .formats import format_vector, read_samples, read_statistics
from .harness import SweepConfig, plot_series, run_sweep, summarize, sweep_to_csv, sweep_to_json
from .harness import format_float
from .solver import solve_min_variance_weights

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_NOT_PD = 3
EXIT_DIMENSION = 4
EXIT_IO = 5

SEED_ENV = "RFI_MVUE_SEED"
DEFAULT_TRIALS = 10_000
FORMATS = ("csv", "json", "both")

CSV_NAME = "sweep.csv"
JSON_NAME = "sweep.json"
ERROR_PLOT_NAME = "error_vs_M.dat"
VARIANCE_PLOT_NAME = "variance_vs_M.dat"


class UsageError(Exception):
    """Invalid configuration or argument; maps to exit 2."""


@dataclasses.dataclass(frozen=True)
class CliConfig:
    sweep: SweepConfig
    out_dir: Path = Path(".")
    format: str = "both"
    workers: Optional[int] = None


def _parse_m_values(text: str) -> tuple:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(t) for t in text.replace(",", " ").split())


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# config key -> converter
CONFIG_KEYS = {
    "m_values": _parse_m_values,
    "trials_per_m": int,
    "footprint_size": int,
    "soil_power": float,
    "beta": float,
    "master_seed": int,
    "redraw_counts": _parse_bool,
    "out_dir": Path,
    "format": str,
    "workers": int,
}


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines, ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise UsageError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise UsageError(f"config line {lineno}: bad value for {key}: {exc}") from None
    return values


def build_cli_config(file_values: dict, overrides: dict, env=os.environ) -> CliConfig:
    """Merge config file values with flag overrides (flags win)."""
    values = {**file_values, **{k: v for k, v in overrides.items() if v is not None}}
    if "master_seed" not in values:
        env_seed = env.get(SEED_ENV)
        if env_seed is not None:
            try:
                values["master_seed"] = int(env_seed)
            except ValueError:
                raise UsageError(f"{SEED_ENV}={env_seed!r} is not an integer") from None
    fmt = values.pop("format", "both")
    if fmt not in FORMATS:
        raise UsageError(f"format must be one of {FORMATS}, got {fmt!r}")
    out_dir = values.pop("out_dir", Path("."))
    workers = values.pop("workers", None)
    if workers is not None and workers < 1:
        raise UsageError(f"workers must be >= 1, got {workers}")
    values.setdefault("trials_per_m", DEFAULT_TRIALS)
    try:
        sweep = SweepConfig(**values)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return CliConfig(sweep, Path(out_dir), fmt, workers)


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def cmd_weights(args) -> int:
    stats = read_statistics(args.stats)
    solution = solve_min_variance_weights(stats)
    print(f"weights {format_vector(solution.weights)}")
    print(f"multiplier {format_float(solution.multiplier)}")
    print(f"min_variance {format_float(solution.min_variance)}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    samples = read_samples(args.samples)
    stats = validate_statistics(read_statistics(args.stats))
    if len(samples) != stats.n:
        raise DimensionMismatch(
            f"samples file has {len(samples)} values, statistics file describes {stats.n}"
        )
    if args.method == "weighted":
        est = weighted_sum_estimate(samples, stats, solve_min_variance_weights(stats))
        print(f"estimate {format_float(est.value)}")
        print(f"theoretical_variance {format_float(est.diagnostics.theoretical_variance)}")
    else:
        try:
            config = DetectionConfig(beta=args.beta)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        est = baseline_estimate(samples, config)
        print(f"estimate {format_float(est.value)}")
        print(f"g {est.diagnostics.retained_count}")
        print(f"fallback {str(est.diagnostics.fallback).lower()}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    file_values = {}
    if args.config is not None:
        file_values = parse_config_text(Path(args.config).read_text())
    overrides = {
        "master_seed": args.seed,
        "workers": args.workers,
        "out_dir": args.out,
        "format": args.format,
    }
    config = build_cli_config(file_values, overrides)
    result = run_sweep(config.sweep, workers=config.workers)

    outputs = {}
    if config.format in ("csv", "both"):
        outputs[CSV_NAME] = sweep_to_csv(result)
    if config.format in ("json", "both"):
        outputs[JSON_NAME] = sweep_to_json(result)
    outputs[ERROR_PLOT_NAME], outputs[VARIANCE_PLOT_NAME] = plot_series(result)
    try:
        config.out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in outputs.items():
            (config.out_dir / name).write_text(text)
    except OSError as exc:
        _err(f"cannot write results: {exc}")
        return EXIT_IO
    print(summarize(result.records), file=sys.stderr)
    for name in outputs:
        print(config.out_dir / name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfi-mvue",
        description="Minimum-variance unbiased soil power estimation under additive RFI.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weights", help="optimal weights from a statistics file")
    p.add_argument("--stats", required=True, type=Path)
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("estimate", help="estimate soil power for one footprint")
    p.add_argument("--samples", required=True, type=Path)
    p.add_argument("--stats", required=True, type=Path)
    p.add_argument("--method", choices=("weighted", "baseline"), default="weighted")
    p.add_argument("--beta", type=float, default=1.0, help="detection threshold multiplier")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="run the Monte Carlo sweep over M")
    p.add_argument("--config", type=Path, help="key = value config file")
    p.add_argument("--seed", type=int, help=f"master seed (fallback: ${SEED_ENV})")
    p.add_argument("--workers", type=int, help="worker processes (default: all CPUs)")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--format", choices=FORMATS)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except NotPositiveDefinite as exc:
        _err(str(exc))
        return EXIT_NOT_PD
    except DimensionMismatch as exc:
        _err(f"dimension mismatch: {exc}")
        return EXIT_DIMENSION if args.command == "estimate" else EXIT_INPUT
    except (UsageError, RfiMvueError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    except OSError as exc:
        _err(f"cannot read input: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
