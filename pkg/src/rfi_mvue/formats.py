"""Plain-text statistics and sample files.

Statistics file::

    n
    mu_1 ... mu_n
    S_11 ... S_1n
    ...
    S_n1 ... S_nn

Sample file::

    n
    p_1 ... p_n

Values are whitespace separated decimal floats; blank lines are ignored.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import RfiMvueError, RfiStatistics, SampleSet
from .harness import format_float


class FormatError(RfiMvueError, ValueError):
    pass


def _lines(text: str) -> list[list[str]]:
    return [line.split() for line in text.splitlines() if line.strip()]


def _header(lines: list[list[str]], what: str) -> int:
    if not lines or len(lines[0]) != 1:
        raise FormatError(f"{what}: first line must hold the single integer n")
    try:
        n = int(lines[0][0])
    except ValueError:
        raise FormatError(f"{what}: bad length {lines[0][0]!r}") from None
    if n < 1:
        raise FormatError(f"{what}: n must be positive, got {n}")
    return n


def _row(tokens: list[str], n: int, what: str) -> np.ndarray:
    if len(tokens) != n:
        raise FormatError(f"{what}: expected {n} values, found {len(tokens)}")
    try:
        return np.array([float(t) for t in tokens])
    except ValueError as exc:
        raise FormatError(f"{what}: {exc}") from None


def parse_statistics(text: str) -> RfiStatistics:
    lines = _lines(text)
    n = _header(lines, "statistics")
    if len(lines) != n + 2:
        raise FormatError(f"statistics: expected {n + 2} non-empty lines, found {len(lines)}")
    mean = _row(lines[1], n, "statistics mean")
    cov = np.vstack([_row(lines[2 + i], n, f"statistics covariance row {i + 1}") for i in range(n)])
    return RfiStatistics(mean, cov)


def parse_samples(text: str) -> SampleSet:
    lines = _lines(text)
    n = _header(lines, "samples")
    if len(lines) != 2:
        raise FormatError(f"samples: expected 2 non-empty lines, found {len(lines)}")
    values = _row(lines[1], n, "samples")
    try:
        return SampleSet(values)
    except ValueError as exc:
        raise FormatError(f"samples: {exc}") from None


def format_vector(values) -> str:
    return " ".join(format_float(v) for v in np.asarray(values).ravel())


def format_statistics(stats: RfiStatistics) -> str:
    rows = [str(stats.n), format_vector(stats.mean)]
    rows += [format_vector(row) for row in stats.covariance]
    return "\n".join(rows) + "\n"


def format_samples(samples: SampleSet) -> str:
    return f"{len(samples)}\n{format_vector(samples.values)}\n"


def read_statistics(path) -> RfiStatistics:
    return parse_statistics(Path(path).read_text())


def read_samples(path) -> SampleSet:
    return parse_samples(Path(path).read_text())


def write_statistics(path, stats: RfiStatistics) -> None:
    Path(path).write_text(format_statistics(stats))


def write_samples(path, samples: SampleSet) -> None:
    Path(path).write_text(format_samples(samples))
