"""Synthetic chi-squared RFI environments.

Each sample is hit by ``k_i`` sources, ``k_i`` uniform on ``{1..M}``.  A source
contributes the square of a standard normal amplitude, so the RFI power of a
sample is chi-squared with ``k_i`` degrees of freedom: mean ``k_i``, variance
``2 k_i``, independent across samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    FOOTPRINT_SIZE,
    InvalidParameter,
    RfiStatistics,
    SampleSet,
    _frozen,
)

DEFAULT_SOIL_POWER = 1.0

# spawn_key prefixes separating the per-trial and fixed-count streams
TRIAL_STREAM = 0
COUNTS_STREAM = 1


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``.

    Children are keyed by position rather than spawned sequentially, so any
    trial can be regenerated alone and the assignment of trials to workers
    never matters.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def trial_rng(seed: int, max_sources: int, trial_index: int) -> np.random.Generator:
    return make_rng(seed, TRIAL_STREAM, max_sources, trial_index)


@dataclass(frozen=True)
class RfiEnvironment:
    max_sources: int
    active_counts: np.ndarray
    soil_power: float = DEFAULT_SOIL_POWER
    seed: int = 0

    def __post_init__(self):
        k = np.array(self.active_counts, dtype=np.int64).ravel()
        if self.max_sources < 1:
            raise InvalidParameter(f"max_sources must be >= 1, got {self.max_sources}")
        if k.size < 2:
            raise InvalidParameter(f"need at least 2 samples, got {k.size}")
        if np.any(k < 1) or np.any(k > self.max_sources):
            raise InvalidParameter(f"active counts must lie in [1, {self.max_sources}]")
        if not self.soil_power >= 0:
            raise InvalidParameter(f"soil_power must be >= 0, got {self.soil_power!r}")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameter(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, "active_counts", _frozen(k))

    @classmethod
    def random(
        cls,
        max_sources: int,
        n: int = FOOTPRINT_SIZE,
        soil_power: float = DEFAULT_SOIL_POWER,
        seed: int = 0,
    ) -> "RfiEnvironment":
        k = draw_active_counts(max_sources, n, make_rng(seed, COUNTS_STREAM, max_sources))
        return cls(max_sources, k, soil_power, seed)


def draw_active_counts(max_sources: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. draws uniform on ``{1, ..., max_sources}``."""
    if max_sources < 1:
        raise InvalidParameter(f"max_sources must be >= 1, got {max_sources}")
    if n < 2:
        raise InvalidParameter(f"need n >= 2, got {n}")
    return rng.integers(1, max_sources, size=n, endpoint=True, dtype=np.int64)


def derive_statistics(active_counts) -> RfiStatistics:
    """Mean ``k_i`` and diagonal covariance ``2 k_i`` of chi-squared RFI."""
    k = np.asarray(active_counts)
    if k.ndim != 1 or k.size < 2:
        raise InvalidParameter(f"need a vector of at least 2 counts, got shape {k.shape}")
    if np.any(k < 1):
        raise InvalidParameter("active counts must be >= 1")
    k = k.astype(float)
    return RfiStatistics(k, np.diag(2.0 * k))


def draw_rfi_power(k: int, rng: np.random.Generator) -> float:
    """Sum of ``k`` squared standard normals."""
    if k < 1:
        raise InvalidParameter(f"k must be >= 1, got {k}")
    return float(draw_rfi_powers(np.array([k]), rng)[0])


def draw_rfi_powers(active_counts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Vectorized :func:`draw_rfi_power` over a count vector.

    Consumes the generator exactly like successive scalar calls, so the two
    paths yield identical values.
    """
    k = np.asarray(active_counts, dtype=np.int64)
    if np.any(k < 1):
        raise InvalidParameter("active counts must be >= 1")
    z = rng.standard_normal(int(k.sum()))
    starts = np.zeros(k.size, dtype=np.int64)
    np.cumsum(k[:-1], out=starts[1:])
    return np.add.reduceat(z * z, starts)


def synthesize_footprint(
    env: RfiEnvironment, rng: np.random.Generator | None = None
) -> tuple[SampleSet, RfiStatistics]:
    """Samples ``p_i = p_soil + P_RFI_i`` together with the true RFI statistics.

    Without an explicit generator the draw is keyed on ``env.seed`` only.
    """
    if rng is None:
        rng = make_rng(env.seed, TRIAL_STREAM)
    rfi = draw_rfi_powers(env.active_counts, rng)
    return SampleSet(env.soil_power + rfi), derive_statistics(env.active_counts)
