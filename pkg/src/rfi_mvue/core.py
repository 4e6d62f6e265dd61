"""Domain types shared across the package.

A footprint is a vector of ``n`` power samples (Watts).  For the SMAP layout
``n = 256`` and each sample is labelled by polarization, subband and time slot;
every numeric routine accepts any ``n >= 2``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Union

import numpy as np

N_POLARIZATIONS = 2
N_SUBBANDS = 16
N_TIMESLOTS = 8
FOOTPRINT_SIZE = N_POLARIZATIONS * N_SUBBANDS * N_TIMESLOTS

SYMMETRY_RTOL = 1e-12


class RfiMvueError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(RfiMvueError, ValueError):
    pass


class AsymmetricCovariance(RfiMvueError, ValueError):
    pass


class NonpositiveDiagonal(RfiMvueError, ValueError):
    pass


class NonpositiveVariance(RfiMvueError, ValueError):
    pass


class NotPositiveDefinite(RfiMvueError, ValueError):
    pass


class InvalidParameter(RfiMvueError, ValueError):
    pass


class NumericalError(RfiMvueError, ArithmeticError):
    """A solve finished but failed its own residual check."""


class Polarization(enum.IntEnum):
    HORIZONTAL = 0
    VERTICAL = 1


class Method(enum.Enum):
    WEIGHTED_SUM = "weighted"
    BASELINE_AVERAGE = "baseline"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SampleIndex:
    polarization: Polarization
    subband: int
    timeslot: int

    def __post_init__(self):
        object.__setattr__(self, "polarization", Polarization(self.polarization))
        if not 0 <= self.subband < N_SUBBANDS:
            raise InvalidParameter(f"subband {self.subband} outside [0, {N_SUBBANDS})")
        if not 0 <= self.timeslot < N_TIMESLOTS:
            raise InvalidParameter(f"timeslot {self.timeslot} outside [0, {N_TIMESLOTS})")

    @classmethod
    def from_flat(cls, flat: int) -> "SampleIndex":
        if not 0 <= flat < FOOTPRINT_SIZE:
            raise InvalidParameter(f"flat index {flat} outside [0, {FOOTPRINT_SIZE})")
        pol, rest = divmod(flat, N_SUBBANDS * N_TIMESLOTS)
        sub, slot = divmod(rest, N_TIMESLOTS)
        return cls(Polarization(pol), sub, slot)


def flat_index(idx: SampleIndex) -> int:
    """Position of a labelled sample in the flat 256-vector."""
    return (int(idx.polarization) * N_SUBBANDS + idx.subband) * N_TIMESLOTS + idx.timeslot


@dataclass(frozen=True)
class SampleSet:
    """Measured powers of one antenna footprint, in Watts."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size < 2:
            raise InvalidParameter(f"a footprint needs at least 2 samples, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise InvalidParameter("samples must be finite")
        object.__setattr__(self, "values", _frozen(v))

    def __len__(self) -> int:
        return self.values.size

    def at(self, idx: SampleIndex) -> float:
        if len(self) != FOOTPRINT_SIZE:
            raise DimensionMismatch(
                f"labelled access needs n={FOOTPRINT_SIZE}, footprint has n={len(self)}"
            )
        return float(self.values[flat_index(idx)])


@dataclass(frozen=True)
class RfiStatistics:
    """Mean vector and covariance matrix of the additive RFI power.

    Construction only coerces to float arrays; use :func:`validate_statistics`
    to check and symmetrize.
    """

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", _frozen(np.array(self.mean, dtype=float).ravel()))
        object.__setattr__(self, "covariance", _frozen(np.array(self.covariance, dtype=float)))

    @property
    def n(self) -> int:
        return self.mean.size


def validate_statistics(stats: RfiStatistics) -> RfiStatistics:
    """Check shapes, symmetry and diagonal sign, returning a symmetrized copy.

    Asymmetry within ``1e-12 * max(|S_ij|, |S_ji|, 1)`` is repaired by
    averaging with the transpose; anything larger is rejected.
    """
    mu, cov = stats.mean, stats.covariance
    n = mu.size
    if cov.ndim != 2 or cov.shape != (n, n):
        raise DimensionMismatch(f"mean has length {n} but covariance has shape {cov.shape}")
    if n < 2:
        raise InvalidParameter(f"need n >= 2, got {n}")
    if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(cov))):
        raise InvalidParameter("statistics must be finite")
    gap = np.abs(cov - cov.T)
    scale = np.maximum(np.maximum(np.abs(cov), np.abs(cov.T)), 1.0)
    if np.any(gap > SYMMETRY_RTOL * scale):
        i, j = np.unravel_index(np.argmax(gap / scale), gap.shape)
        raise AsymmetricCovariance(
            f"covariance not symmetric at ({i}, {j}): {cov[i, j]!r} vs {cov[j, i]!r}"
        )
    if np.any(np.diag(cov) <= 0.0):
        i = int(np.argmin(np.diag(cov)))
        raise NonpositiveDiagonal(f"covariance diagonal entry {i} is {cov[i, i]!r}")
    if np.array_equal(cov, cov.T):
        return stats
    return RfiStatistics(mu, 0.5 * (cov + cov.T))


def check_same_length(samples: SampleSet, stats: RfiStatistics) -> None:
    if len(samples) != stats.n:
        raise DimensionMismatch(
            f"footprint has {len(samples)} samples but statistics describe {stats.n}"
        )


@dataclass(frozen=True)
class WeightSolution:
    """Optimal weights ``A``, multiplier ``lam`` and the variance ``A' S A``."""

    weights: np.ndarray
    multiplier: float
    min_variance: float

    def __post_init__(self):
        object.__setattr__(self, "weights", _frozen(np.array(self.weights, dtype=float).ravel()))


@dataclass(frozen=True)
class WeightedDiagnostics:
    theoretical_variance: float


@dataclass(frozen=True)
class BaselineDiagnostics:
    retained_count: int
    fallback: bool


@dataclass(frozen=True)
class Estimate:
    value: float
    method: Method
    diagnostics: Union[WeightedDiagnostics, BaselineDiagnostics] = field(repr=True)

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise NumericalError(f"non-finite estimate {self.value!r}")
