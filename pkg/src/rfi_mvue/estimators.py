"""Footprint estimators of soil power.

``weighted_sum_estimate`` subtracts the known RFI means and combines samples
with minimum-variance weights.  ``baseline_estimate`` is the detect-then-average
scheme: flag samples with ``|p - m| >= beta * sigma`` and average the rest.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import (
    BaselineDiagnostics,
    DimensionMismatch,
    Estimate,
    InvalidParameter,
    Method,
    RfiStatistics,
    SampleSet,
    WeightedDiagnostics,
    WeightSolution,
    check_same_length,
)


class CenterMode(enum.Enum):
    SAMPLE_ARITHMETIC_MEAN = "sample_mean"


class SpreadMode(enum.Enum):
    POPULATION_STD_DEV = "population_std"


@dataclass(frozen=True)
class DetectionConfig:
    beta: float = 1.0
    center_mode: CenterMode = CenterMode.SAMPLE_ARITHMETIC_MEAN
    spread_mode: SpreadMode = SpreadMode.POPULATION_STD_DEV

    def __post_init__(self):
        if not self.beta > 0:
            raise InvalidParameter(f"beta must be positive, got {self.beta!r}")


@dataclass(frozen=True)
class DetectionResult:
    flags: np.ndarray
    retained_count: int
    degenerate_spread: bool = False


def _flags(values: np.ndarray, beta: float) -> tuple[np.ndarray, bool]:
    m = values.mean()
    sigma = values.std()
    if sigma == 0.0:
        return np.zeros(values.size, dtype=bool), True
    return np.abs(values - m) >= beta * sigma, False


def threshold_detect(samples: SampleSet, config: DetectionConfig = DetectionConfig()) -> DetectionResult:
    """Flag samples deviating from the footprint mean by ``beta`` std devs or more.

    The centre is the arithmetic mean of all samples and the spread their
    population (divide-by-n) standard deviation.  Identical samples have zero
    spread; nothing is flagged and ``degenerate_spread`` is set.
    """
    flags, degenerate = _flags(samples.values, config.beta)
    flags.setflags(write=False)
    return DetectionResult(flags, int(flags.size - flags.sum()), degenerate)


def _baseline_from_flags(values: np.ndarray, flags: np.ndarray) -> tuple[float, int, bool]:
    keep = ~flags
    g = int(keep.sum())
    if g == 0:
        return float(values.mean()), 0, True
    return float(values[keep].mean()), g, False


def baseline_estimate(samples: SampleSet, config: DetectionConfig = DetectionConfig()) -> Estimate:
    """Mean of the samples that pass the threshold test.

    Raw samples are averaged without removing the RFI mean.  When every sample
    is flagged the mean of all samples is returned with ``fallback=True``.
    """
    result = threshold_detect(samples, config)
    value, g, fallback = _baseline_from_flags(samples.values, result.flags)
    return Estimate(value, Method.BASELINE_AVERAGE, BaselineDiagnostics(g, fallback))


def weighted_sum_estimate(
    samples: SampleSet, stats: RfiStatistics, weights: WeightSolution
) -> Estimate:
    """``sum_i A_i (p_i - mu_i)``."""
    check_same_length(samples, stats)
    if weights.weights.size != stats.n:
        raise DimensionMismatch(
            f"{weights.weights.size} weights for a footprint of {stats.n} samples"
        )
    value = float(weights.weights @ (samples.values - stats.mean))
    return Estimate(value, Method.WEIGHTED_SUM, WeightedDiagnostics(weights.min_variance))
