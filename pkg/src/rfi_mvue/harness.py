"""Monte Carlo comparison of the weighted-sum and baseline estimators.

For every ``M`` in the sweep, ``T`` independent footprints are synthesized and
both estimators are applied to the same realization.  Trial ``i`` at ``M``
draws from a generator keyed on ``(master_seed, M, i)`` alone, so results do
not depend on how trials are spread over workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from .core import FOOTPRINT_SIZE, InvalidParameter, RfiStatistics, SampleSet
from .estimators import _baseline_from_flags, _flags
from .rfi_sim import (
    COUNTS_STREAM,
    DEFAULT_SOIL_POWER,
    derive_statistics,
    draw_active_counts,
    draw_rfi_powers,
    make_rng,
    trial_rng,
)
from .solver import solve_diagonal_fast_path


@dataclass(frozen=True)
class SweepConfig:
    trials_per_m: int
    m_values: tuple = tuple(range(1, 11))
    footprint_size: int = FOOTPRINT_SIZE
    soil_power: float = DEFAULT_SOIL_POWER
    beta: float = 1.0
    master_seed: int = 0
    redraw_counts: bool = True

    def __post_init__(self):
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))
        if not self.m_values or min(self.m_values) < 1:
            raise InvalidParameter(f"m_values must be nonempty and >= 1, got {self.m_values}")
        if len(set(self.m_values)) != len(self.m_values):
            raise InvalidParameter(f"m_values contains duplicates: {self.m_values}")
        if self.trials_per_m < 1:
            raise InvalidParameter(f"trials_per_m must be >= 1, got {self.trials_per_m}")
        if self.footprint_size < 2:
            raise InvalidParameter(f"footprint_size must be >= 2, got {self.footprint_size}")
        if not self.soil_power >= 0 or not math.isfinite(self.soil_power):
            raise InvalidParameter(f"soil_power must be finite and >= 0, got {self.soil_power!r}")
        if not self.beta > 0:
            raise InvalidParameter(f"beta must be positive, got {self.beta!r}")
        if not 0 <= self.master_seed < 2**64:
            raise InvalidParameter(f"master_seed must fit in 64 unsigned bits, got {self.master_seed}")


@dataclass(frozen=True)
class TrialRecord:
    max_sources: int
    trial_index: int
    weighted_error: float
    baseline_error: float
    theoretical_variance: float
    retained_count: int
    fallback: bool


@dataclass(frozen=True)
class SweepRecord:
    M: int
    trials: int
    weighted_mean_error: float
    weighted_mean_abs_error: float
    weighted_error_variance: float
    theoretical_min_variance: float
    baseline_mean_error: float
    baseline_mean_abs_error: float
    baseline_error_variance: float
    baseline_fallback_count: int
    retained_fraction: float
    seed: int


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    records: tuple = field(default_factory=tuple)

    def record(self, m: int) -> SweepRecord:
        for r in self.records:
            if r.M == m:
                return r
        raise KeyError(m)


def fixed_counts(config: SweepConfig, m: int) -> np.ndarray:
    """Count vector shared by all trials at ``m`` when counts are not redrawn."""
    return draw_active_counts(m, config.footprint_size, make_rng(config.master_seed, COUNTS_STREAM, m))


def _trial(m: int, config: SweepConfig, trial_index: int, counts: Optional[np.ndarray]):
    rng = trial_rng(config.master_seed, m, trial_index)
    k = draw_active_counts(m, config.footprint_size, rng) if counts is None else counts
    samples = config.soil_power + draw_rfi_powers(k, rng)
    solution = solve_diagonal_fast_path(2.0 * k)
    weighted = float(solution.weights @ (samples - k))
    flags, _ = _flags(samples, config.beta)
    baseline, g, fallback = _baseline_from_flags(samples, flags)
    return (
        weighted - config.soil_power,
        baseline - config.soil_power,
        solution.min_variance,
        g,
        fallback,
    )


def run_trial(m: int, config: SweepConfig, trial_index: int) -> TrialRecord:
    """One footprint at ``M = m``: synthesize, estimate both ways, report errors.

    Errors are signed, ``estimate - soil_power``.
    """
    if m < 1:
        raise InvalidParameter(f"M must be >= 1, got {m}")
    counts = None if config.redraw_counts else fixed_counts(config, m)
    return TrialRecord(m, trial_index, *_trial(m, config, trial_index, counts))


def trial_inputs(m: int, config: SweepConfig, trial_index: int) -> tuple[SampleSet, RfiStatistics]:
    """The footprint and statistics that ``run_trial`` sees, as domain objects."""
    rng = trial_rng(config.master_seed, m, trial_index)
    if config.redraw_counts:
        k = draw_active_counts(m, config.footprint_size, rng)
    else:
        k = fixed_counts(config, m)
    samples = SampleSet(config.soil_power + draw_rfi_powers(k, rng))
    return samples, derive_statistics(k)


def _run_block(args) -> np.ndarray:
    m, config, start, stop = args
    counts = None if config.redraw_counts else fixed_counts(config, m)
    out = np.empty((stop - start, 5))
    for row, i in enumerate(range(start, stop)):
        out[row] = _trial(m, config, i, counts)
    return out


def _blocks(config: SweepConfig, workers: int):
    t = config.trials_per_m
    size = max(1, min(10_000, -(-t // (4 * workers))))
    for m in config.m_values:
        for start in range(0, t, size):
            yield (m, config, start, min(start + size, t))


def error_variance(errors: np.ndarray) -> float:
    """Mean squared error about zero, ``E[(estimate - p_soil)^2]``, divided by T.

    This is the error variance the minimum-variance weights minimize.  For a
    biased estimator it includes the squared bias; the spread about the mean
    error is ``error_variance - mean_error**2``.
    """
    return float(np.mean(np.square(errors)))


def _aggregate(m: int, config: SweepConfig, table: np.ndarray) -> SweepRecord:
    w_err, b_err, theory, g, fallback = table.T
    return SweepRecord(
        M=m,
        trials=config.trials_per_m,
        weighted_mean_error=float(np.mean(w_err)),
        weighted_mean_abs_error=float(np.mean(np.abs(w_err))),
        weighted_error_variance=error_variance(w_err),
        theoretical_min_variance=float(np.mean(theory)),
        baseline_mean_error=float(np.mean(b_err)),
        baseline_mean_abs_error=float(np.mean(np.abs(b_err))),
        baseline_error_variance=error_variance(b_err),
        baseline_fallback_count=int(fallback.sum()),
        retained_fraction=float(np.mean(g) / config.footprint_size),
        seed=config.master_seed,
    )


def run_trials(config: SweepConfig, workers: Optional[int] = 1) -> dict:
    """Per-trial table for every ``M``.

    Returns ``{M: array of shape (T, 5)}`` with columns weighted error,
    baseline error, theoretical variance, retained count, fallback flag, in
    trial-index order.
    """
    workers = workers or os.cpu_count() or 1
    blocks = list(_blocks(config, workers))
    if workers == 1:
        parts = map(_run_block, blocks)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, blocks))
    tables: dict = {m: [] for m in config.m_values}
    for (m, *_), part in zip(blocks, parts):
        tables[m].append(part)
    return {m: np.concatenate(p) for m, p in tables.items()}


def run_sweep(config: SweepConfig, workers: Optional[int] = 1) -> SweepResult:
    """Aggregate trials per ``M`` (population moments, divide by T).

    ``workers=None`` uses every available CPU.  Output is identical for any
    worker count because tables are reassembled in trial order before any
    reduction.
    """
    tables = run_trials(config, workers)
    return SweepResult(config, tuple(_aggregate(m, config, tables[m]) for m in config.m_values))


# --- serialization -------------------------------------------------------

CSV_COLUMNS = tuple(f.name for f in fields(SweepRecord))
_INT_COLUMNS = {"M", "trials", "baseline_fallback_count", "seed"}


def format_float(x: float) -> str:
    """Shortest decimal string that round-trips to the same double."""
    return repr(float(x))


def _cell(name: str, value) -> str:
    return str(int(value)) if name in _INT_COLUMNS else format_float(value)


def sweep_to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in result.records:
        writer.writerow([_cell(name, getattr(rec, name)) for name in CSV_COLUMNS])
    return buf.getvalue()


def _parse_record(row: dict) -> SweepRecord:
    return SweepRecord(
        **{k: int(row[k]) if k in _INT_COLUMNS else float(row[k]) for k in CSV_COLUMNS}
    )


def records_from_csv(text: str) -> tuple:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return tuple(_parse_record(row) for row in reader)


def sweep_to_json(result: SweepResult) -> str:
    config = asdict(result.config)
    config["m_values"] = list(config["m_values"])
    doc = {"config": config, "records": [asdict(r) for r in result.records]}
    return json.dumps(doc, indent=2) + "\n"


def sweep_from_json(text: str) -> SweepResult:
    doc = json.loads(text)
    return SweepResult(
        SweepConfig(**doc["config"]),
        tuple(SweepRecord(**r) for r in doc["records"]),
    )


def plot_series(result: SweepResult) -> tuple[str, str]:
    """Two-column ``M value`` text for error and error variance versus ``M``.

    Each file holds one block per estimator, blocks separated by two blank
    lines (gnuplot ``index`` convention).
    """

    def block(label, column):
        lines = [f"# {label}: M {column}"]
        lines += [f"{r.M} {format_float(getattr(r, column))}" for r in result.records]
        return "\n".join(lines)

    error = "\n\n\n".join(
        [block("weighted", "weighted_mean_abs_error"), block("baseline", "baseline_mean_abs_error")]
    )
    variance = "\n\n\n".join(
        [block("weighted", "weighted_error_variance"), block("baseline", "baseline_error_variance")]
    )
    return error + "\n", variance + "\n"


def summarize(records: Sequence[SweepRecord]) -> str:
    header = f"{'M':>3} {'w|err|':>10} {'b|err|':>10} {'w var':>10} {'b var':>10} {'theory':>10}"
    rows = [
        f"{r.M:>3} {r.weighted_mean_abs_error:10.4g} {r.baseline_mean_abs_error:10.4g} "
        f"{r.weighted_error_variance:10.4g} {r.baseline_error_variance:10.4g} "
        f"{r.theoretical_min_variance:10.4g}"
        for r in records
    ]
    return "\n".join([header, *rows])
