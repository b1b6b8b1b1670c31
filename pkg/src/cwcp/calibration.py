"""Weighted empirical score CDFs and conformal threshold calibration.

The calibration set pairs nonconformity scores with nonnegative importance
weights.  The weighted empirical CDF is

    F(t) = sum_i w_i * 1[s_i <= t] / sum_i w_i,

and the threshold at level ``l`` is the smallest calibration score t with
F(t) >= l, or +inf when no score reaches the level (the prediction set is
then trivial).  Levels above 1 are legal inputs: bias-corrected calibration
inflates the level additively and relies on the +inf fallback.

All functions are pure; inputs are copied and frozen at construction, so
values can be shared freely across threads or worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

CWCP_MODES = ("cwcp-expected", "cwcp-conditional")
METHOD_MODES = ("split", "wcp") + CWCP_MODES


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ScoredCalibrationSet:
    """Nonconformity scores paired with nonnegative importance weights."""

    scores: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        scores = _frozen_array(self.scores)
        weights = _frozen_array(self.weights)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "weights", weights)
        if scores.shape[0] == 0:
            raise ValueError("calibration set is empty")
        if scores.shape != weights.shape:
            raise ValueError(
                f"{scores.shape[0]} scores vs {weights.shape[0]} weights"
            )
        if not np.all(np.isfinite(scores)):
            raise ValueError("scores must be finite")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise ValueError("weights must be finite and >= 0")
        if not np.any(weights > 0):
            raise ValueError("all weights are zero")

    def __len__(self) -> int:
        return self.scores.shape[0]


def _unit_scale(weights: np.ndarray) -> np.ndarray:
    """Weights divided by their maximum.

    The CDF is scale-free, so dividing by the max first makes that exact in
    floats: constant weights become exactly 1 and rescaling all weights
    cancels out of the division.
    """
    return weights / weights.max()


def _cdf_curve(cal: ScoredCalibrationSet) -> tuple[np.ndarray, np.ndarray]:
    """Distinct sorted scores and the CDF evaluated at each.

    Pairs are put in canonical (score, weight) order before the prefix sum,
    so every output is exactly invariant under permutation of the input
    pairs.
    """
    order = np.lexsort((cal.weights, cal.scores))
    s = cal.scores[order]
    w = _unit_scale(cal.weights[order])
    cum = np.cumsum(w)
    last = np.nonzero(np.r_[s[1:] != s[:-1], True])[0]
    return s[last], cum[last] / cum[-1]


def weighted_cdf(cal: ScoredCalibrationSet, t: float) -> float:
    """Weighted empirical CDF of the calibration scores at t."""
    if math.isnan(t):
        raise ValueError("t must not be NaN")
    w = _unit_scale(cal.weights)
    mass = math.fsum(w[cal.scores <= t])
    return mass / math.fsum(w)


@dataclass(frozen=True)
class CalibrationResult:
    """Threshold tau plus the level it was calibrated at.

    ``tau`` is either an element of the calibration score multiset or +inf;
    ``trivial_set`` flags the +inf case.  ``effective_level`` is recorded
    verbatim, even when it is >= 1.
    """

    tau: float
    effective_level: float
    m_cal: int
    trivial_set: bool


def calibrate_threshold(cal: ScoredCalibrationSet, level: float) -> CalibrationResult:
    """Smallest calibration score whose weighted CDF reaches ``level``.

    Parameters
    ----------
    cal : ScoredCalibrationSet
    level : float
        Target CDF level, any positive real.  Levels above the attainable
        maximum of 1 yield tau = +inf with ``trivial_set=True``.
    """
    if not level > 0.0:
        raise ValueError(f"level must be positive, got {level}")
    uniq, cdf = _cdf_curve(cal)
    idx = int(np.searchsorted(cdf, level, side="left"))
    if idx >= uniq.shape[0]:
        return CalibrationResult(math.inf, level, len(cal), True)
    return CalibrationResult(float(uniq[idx]), level, len(cal), False)


@dataclass(frozen=True)
class CalibrationConfig:
    """Target miscoverage plus the bias/error corrections applied to it."""

    alpha: float
    delta_hat: float = 0.0
    epsilon: float = 0.0
    mode: Literal["split", "wcp", "cwcp-expected", "cwcp-conditional"] = "cwcp-expected"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.epsilon < 0.0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.mode not in METHOD_MODES:
            raise ValueError(f"unknown mode {self.mode!r}")


def cwcp_effective_level(cfg: CalibrationConfig) -> float:
    """Inflated calibration level 1 - alpha + delta_hat + k*epsilon.

    k is 3 in expected mode and 5 in conditional mode.  The value is not
    clamped; ``calibrate_threshold`` turns levels past 1 into tau = +inf.
    """
    if cfg.mode not in CWCP_MODES:
        raise ValueError(f"effective level is defined for {CWCP_MODES}, got {cfg.mode!r}")
    k = 3.0 if cfg.mode == "cwcp-expected" else 5.0
    return 1.0 - cfg.alpha + cfg.delta_hat + k * cfg.epsilon


def evaluate_coverage(tau: float, test_scores) -> float:
    """Fraction of test scores <= tau (1.0 when tau is +inf)."""
    scores = np.asarray(test_scores, dtype=np.float64).reshape(-1)
    if scores.shape[0] == 0:
        raise ValueError("test score set is empty")
    return float(np.mean(scores <= tau))


def sup_cdf_gap(set_a: ScoredCalibrationSet, set_b: ScoredCalibrationSet) -> float:
    """sup_t |F_a(t) - F_b(t)| for two weightings of the same score list.

    Both CDFs are step functions jumping only at the shared scores, so the
    sup is attained on that finite grid and computed exactly.
    """
    if not np.array_equal(set_a.scores, set_b.scores):
        raise ValueError("score lists differ; only the weights may vary")
    _, cdf_a = _cdf_curve(set_a)
    _, cdf_b = _cdf_curve(set_b)
    return float(np.max(np.abs(cdf_a - cdf_b)))


@dataclass(frozen=True)
class CoverageRow:
    """One (method, shift, trial) outcome of an experiment sweep."""

    method: str
    param_b: float | None
    shift: float
    trial: int
    coverage: float
    tau: float
    level: float
    width: float | None = None
    error: str | None = None


@dataclass(frozen=True)
class CoverageReport:
    """Per-trial coverage records, validated and hashable by content."""

    rows: tuple[CoverageRow, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        seen = set()
        for row in self.rows:
            key = (row.method, row.shift, row.trial)
            if key in seen:
                raise ValueError(f"duplicate trial row {key}")
            seen.add(key)
            if row.error is None and not 0.0 <= row.coverage <= 1.0:
                raise ValueError(f"coverage {row.coverage} outside [0, 1] in {key}")

    def __len__(self) -> int:
        return len(self.rows)
