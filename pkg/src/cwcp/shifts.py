"""Synthetic covariate-shift families with closed-form density ratios.

Three families are built in:

* ``NeedleShift`` -- P uniform on the cube, Q mixes in extra mass on a small
  ball, so the ratio is two-valued and its sup blows up as the ball shrinks.
* ``PowerLawShift`` -- P uniform on (0, 1) with ratio 1/(2*sqrt(x)); the
  ratio has infinite second moment.
* ``GaussianTiltShift`` -- standard normal covariates with the first
  coordinate mean-shifted by beta; the ratio is the exponential tilt
  exp(beta*x1 - beta^2/2).

Each family knows its exact ratio, so fitted ratios and conformal output
can be scored against ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NeedleShift:
    """Uniform cube vs. mixture with extra mass on the ball ||x||_inf <= r."""

    r: float
    d: int
    theta: float

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise ValueError(f"r must be in (0, 1), got {self.r}")
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must be in (0, 1), got {self.theta}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")

    @property
    def ball_mass(self) -> float:
        """P-probability of the ball, r**d."""
        return self.r**self.d

    @property
    def ratio_inside(self) -> float:
        """Density ratio on the ball: 1 - theta + theta / r**d."""
        return 1.0 - self.theta + self.theta / self.ball_mass

    @property
    def ratio_outside(self) -> float:
        return 1.0 - self.theta

    def in_ball(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return np.max(np.abs(x), axis=1) <= self.r

    def q_score_cdf(self, tau: float) -> float:
        """Q-probability that the score ||X||_inf is <= tau, in closed form."""
        if tau >= 1.0 or np.isinf(tau):
            return 1.0
        if tau < 0.0:
            return 0.0
        base = (1.0 - self.theta) * tau**self.d
        spike = self.theta * min(tau / self.r, 1.0) ** self.d
        return base + spike


@dataclass(frozen=True)
class PowerLawShift:
    """P = U(0, 1) with ratio w(x) = 1 / (2*sqrt(x)); Q has CDF sqrt(x)."""


@dataclass(frozen=True)
class GaussianTiltShift:
    """N(0, I_d) vs. N(beta * e1, I_d)."""

    beta: float
    d: int

    def __post_init__(self):
        if not np.isfinite(self.beta):
            raise ValueError(f"beta must be finite, got {self.beta}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")


ShiftSpec = NeedleShift | PowerLawShift | GaussianTiltShift


def true_ratio(spec: ShiftSpec, x: np.ndarray) -> np.ndarray:
    """Exact density ratio dQ/dP of ``spec`` evaluated at rows of ``x``.

    Parameters
    ----------
    spec : ShiftSpec
        One of the built-in shift families.
    x : array
        Points in the family's support; (n, d) or (n,) for 1-d families.

    Returns
    -------
    ndarray of shape (n,)
    """
    if isinstance(spec, NeedleShift):
        inside = spec.in_ball(x)
        return np.where(inside, spec.ratio_inside, spec.ratio_outside)
    if isinstance(spec, GaussianTiltShift):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return np.exp(spec.beta * x[:, 0] - spec.beta**2 / 2.0)
    if isinstance(spec, PowerLawShift):
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if np.any(x <= 0.0):
            raise ValueError("power-law ratio is undefined at x <= 0")
        return 1.0 / (2.0 * np.sqrt(x))
    raise TypeError(f"unsupported shift spec: {spec!r}")
