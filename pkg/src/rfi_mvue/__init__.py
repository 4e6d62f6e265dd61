"""Minimum-variance unbiased soil power estimation for RFI-contaminated radiometer footprints."""

from .core import (
    AsymmetricCovariance,
    BaselineDiagnostics,
    DimensionMismatch,
    Estimate,
    InvalidParameter,
    Method,
    NonpositiveDiagonal,
    NonpositiveVariance,
    NotPositiveDefinite,
    NumericalError,
    Polarization,
    RfiMvueError,
    RfiStatistics,
    SampleIndex,
    SampleSet,
    WeightedDiagnostics,
    WeightSolution,
    flat_index,
    validate_statistics,
)
from .estimators import (
    DetectionConfig,
    DetectionResult,
    baseline_estimate,
    threshold_detect,
    weighted_sum_estimate,
)
from .harness import SweepConfig, SweepRecord, SweepResult, TrialRecord, run_sweep, run_trial
from .rfi_sim import (
    RfiEnvironment,
    derive_statistics,
    draw_active_counts,
    draw_rfi_power,
    synthesize_footprint,
)
from .solver import (
    FactorizationReport,
    evaluate_error_variance,
    solve_diagonal_fast_path,
    solve_min_variance_weights,
)

__version__ = "0.1.0"
