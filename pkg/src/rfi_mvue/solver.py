"""Minimum-variance weights under the unit-sum constraint.

Solves ``min A' S A  s.t.  1' A = 1``.  The stationarity conditions form the
bordered system::

    [ S   1 ] [ A   ]   [ 0 ]
    [ 1'  0 ] [ lam ] = [ 1 ]

whose unique solution for positive definite ``S`` is ``A = y / (1' y)`` with
``S y = 1`` and ``lam = -1 / (1' y)``.  The bordered matrix is indefinite, so
``S`` is factored on its own (``L D L'``) and the bordered residual is checked
afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import (
    DimensionMismatch,
    NonpositiveVariance,
    NotPositiveDefinite,
    NumericalError,
    RfiStatistics,
    WeightSolution,
    validate_statistics,
)

PD_TOLERANCE = 1e-12
KKT_RESIDUAL_TOLERANCE = 1e-8


@dataclass(frozen=True)
class FactorizationReport:
    is_positive_definite: bool
    min_pivot: float
    condition_hint: float


@dataclass(frozen=True)
class LdlFactor:
    """``S = L diag(d) L'`` with ``L`` unit lower triangular."""

    lower: np.ndarray
    pivots: np.ndarray

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        z = scipy.linalg.solve_triangular(
            self.lower, rhs, lower=True, unit_diagonal=True, check_finite=False
        )
        return scipy.linalg.solve_triangular(
            self.lower, z / self.pivots, lower=True, trans="T", unit_diagonal=True,
            check_finite=False,
        )


def factorize(covariance: np.ndarray) -> tuple[LdlFactor | None, FactorizationReport]:
    """Square-root-free ``L D L'`` factorization without pivoting.

    Elimination stops at the first pivot not exceeding
    ``PD_TOLERANCE * max(diag(covariance))``; the matrix is then reported as
    not positive definite and no factor is returned.
    """
    work = np.array(covariance, dtype=float)
    n = work.shape[0]
    threshold = PD_TOLERANCE * float(np.max(np.diag(work)))
    lower = np.eye(n)
    pivots = np.empty(n)
    for j in range(n):
        d = work[j, j]
        pivots[j] = d
        if not d > threshold:
            return None, FactorizationReport(False, float(d), np.inf)
        col = work[j + 1 :, j] / d
        lower[j + 1 :, j] = col
        work[j + 1 :, j + 1 :] -= np.outer(col, work[j, j + 1 :])
    lo, hi = float(pivots.min()), float(pivots.max())
    return LdlFactor(lower, pivots), FactorizationReport(True, lo, hi / lo)


def kkt_residual(cov: np.ndarray, solution: WeightSolution) -> float:
    """``max |S A + lam 1|``, the stationarity residual of the bordered system."""
    return float(np.max(np.abs(cov @ solution.weights + solution.multiplier)))


def solve_min_variance_weights(stats: RfiStatistics) -> WeightSolution:
    """Weights minimizing the estimation error variance ``A' S A``.

    Raises
    ------
    NotPositiveDefinite
        If the covariance has a factorization pivot below tolerance, in which case
        the minimizer is not unique.
    NumericalError
        If the bordered-system residual exceeds ``1e-8 * ||S||_inf``.
    """
    stats = validate_statistics(stats)
    cov = stats.covariance
    factor, report = factorize(cov)
    if factor is None or not report.is_positive_definite:
        raise NotPositiveDefinite(
            f"covariance is not positive definite (min pivot {report.min_pivot:.3e})"
        )
    y = factor.solve(np.ones(stats.n))
    total = float(y.sum())
    if not total > 0.0:
        raise NumericalError(f"1'S^-1 1 = {total!r} for a positive definite covariance")
    weights = y / total
    weights = weights / weights.sum()
    min_variance = 1.0 / total
    solution = WeightSolution(weights, -min_variance, min_variance)

    # ||S||_inf is the max absolute row sum
    norm = float(np.max(np.abs(cov).sum(axis=1)))
    residual = kkt_residual(cov, solution)
    if residual > KKT_RESIDUAL_TOLERANCE * norm:
        raise NumericalError(
            f"bordered-system residual {residual:.3e} exceeds {KKT_RESIDUAL_TOLERANCE} * {norm:.3e}"
        )
    return solution


def solve_diagonal_fast_path(variances) -> WeightSolution:
    """Inverse-variance weights for a diagonal covariance."""
    var = np.asarray(variances, dtype=float).ravel()
    if var.size < 2:
        raise DimensionMismatch(f"need at least 2 variances, got {var.size}")
    if not np.all(var > 0.0) or not np.all(np.isfinite(var)):
        raise NonpositiveVariance("all variances must be positive and finite")
    precision = 1.0 / var
    total = float(precision.sum())
    weights = precision / total
    weights = weights / weights.sum()
    min_variance = 1.0 / total
    return WeightSolution(weights, -min_variance, min_variance)


def evaluate_error_variance(weights, stats: RfiStatistics) -> float:
    """Error variance ``A' S A`` of an arbitrary weight vector."""
    a = np.asarray(weights, dtype=float).ravel()
    cov = stats.covariance
    if cov.shape != (a.size, a.size):
        raise DimensionMismatch(f"{a.size} weights against covariance of shape {cov.shape}")
    return float(a @ cov @ a)
