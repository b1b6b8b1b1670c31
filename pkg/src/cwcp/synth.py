"""Seeded data generators for the synthetic shift families.

Generation is split into independent substreams per (family, source,
purpose), so covariates, mixture indicators and label noise never share
random state and regeneration with the same arguments is bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .shifts import GaussianTiltShift, NeedleShift, PowerLawShift, ShiftSpec
from .streams import normal, substream, uniform_open


@dataclass(frozen=True)
class GeneratedDataset:
    """A sample from one side (P or Q) of a shift family.

    ``x`` is always (n, d); ``y``/``scores``/``group`` are optional columns
    of length n.  ``seed`` and ``spec`` record provenance so the sample can
    be regenerated exactly.
    """

    x: np.ndarray
    y: np.ndarray | None = None
    scores: np.ndarray | None = None
    source: str = "P"
    seed: int = 0
    spec: ShiftSpec | None = None
    group: np.ndarray | None = None

    def __post_init__(self):
        if self.source not in ("P", "Q"):
            raise ValueError(f"source must be 'P' or 'Q', got {self.source!r}")
        n = self.x.shape[0]
        for name in ("y", "scores", "group"):
            col = getattr(self, name)
            if col is not None and col.shape[0] != n:
                raise ValueError(f"{name} has {col.shape[0]} rows, x has {n}")

    @property
    def n(self) -> int:
        return self.x.shape[0]


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")


def gen_needle(source: str, r: float, d: int, theta: float, n: int, seed: int) -> GeneratedDataset:
    """Draw n points from P or Q of the needle family.

    P is uniform on [0,1]^d x [0,1].  Q replaces a theta-fraction of the
    mass with draws uniform on the ball ||x||_inf <= r (times the same
    uniform label).  The nonconformity score is ||x||_inf.
    """
    _check_n(n)
    spec = NeedleShift(r=r, d=d, theta=theta)
    base = uniform_open(substream(seed, "needle", source, "x"), (n, d))
    x = base
    if source == "Q":
        mix = uniform_open(substream(seed, "needle", source, "mix"), n) < theta
        x = base.copy()
        x[mix] = base[mix] * r  # uniform on [0, r]^d
    y = uniform_open(substream(seed, "needle", source, "y"), n)
    scores = np.max(np.abs(x), axis=1)
    return GeneratedDataset(x=x, y=y, scores=scores, source=source, seed=seed, spec=spec)


def gen_gaussian_shift(source: str, beta: float, d: int, n: int, seed: int) -> GeneratedDataset:
    """Draw n points from the Gaussian mean-shift family.

    Covariates are N(0, I_d) under P and N(beta*e1, I_d) under Q; labels
    follow y = sum(x) + exp(x1^2) + N(0,1) under both.  Scores are left
    unset; compute them downstream as residuals to a fixed predictor.
    """
    _check_n(n)
    spec = GaussianTiltShift(beta=beta, d=d)
    x = normal(substream(seed, "gauss", source, "x"), (n, d))
    if source == "Q":
        x[:, 0] += beta
    noise = normal(substream(seed, "gauss", source, "noise"), n)
    y = x.sum(axis=1) + np.exp(x[:, 0] ** 2) + noise
    return GeneratedDataset(x=x, y=y, scores=None, source=source, seed=seed, spec=spec)


def gen_powerlaw(source: str, n: int, seed: int) -> GeneratedDataset:
    """Draw n points from the power-law family.

    P is U(0,1); Q has CDF sqrt(x), sampled by squaring a uniform.  The
    score column is x itself.
    """
    _check_n(n)
    u = uniform_open(substream(seed, "powerlaw", source, "x"), n)
    x = u if source == "P" else u**2
    return GeneratedDataset(
        x=x.reshape(-1, 1),
        y=None,
        scores=x.copy(),
        source=source,
        seed=seed,
        spec=PowerLawShift(),
    )


def draw_covariates(spec: ShiftSpec, source: str, n: int, seed: int) -> np.ndarray:
    """Covariate matrix (n, d) for any spec, without labels or scores."""
    if isinstance(spec, NeedleShift):
        return gen_needle(source, spec.r, spec.d, spec.theta, n, seed).x
    if isinstance(spec, GaussianTiltShift):
        return gen_gaussian_shift(source, spec.beta, spec.d, n, seed).x
    if isinstance(spec, PowerLawShift):
        return gen_powerlaw(source, n, seed).x
    raise TypeError(f"unsupported shift spec: {spec!r}")


def residual_scores(x: np.ndarray, y: np.ndarray, coefficients: np.ndarray) -> np.ndarray:
    """Absolute residual |y - (x @ w + b)| for an affine predictor.

    ``coefficients`` holds the d slope entries followed by the intercept.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    coefficients = np.asarray(coefficients, dtype=np.float64).reshape(-1)
    if coefficients.shape[0] != x.shape[1] + 1:
        raise ValueError(
            f"predictor expects {coefficients.shape[0] - 1} features, data has {x.shape[1]}"
        )
    pred = x @ coefficients[:-1] + coefficients[-1]
    return np.abs(np.asarray(y, dtype=np.float64).reshape(-1) - pred)


def fit_linear_predictor(d: int, seed: int, n_fit: int = 2000) -> np.ndarray:
    """Least-squares affine predictor trained on a fresh seeded P-sample.

    Stands in for a pre-trained regression model: the coefficients are a
    deterministic function of (d, seed, n_fit) and should be persisted with
    any experiment that uses them.
    """
    data = gen_gaussian_shift("P", beta=0.0, d=d, n=n_fit, seed=seed)
    design = np.column_stack([data.x, np.ones(data.n)])
    coef, *_ = np.linalg.lstsq(design, data.y, rcond=None)
    return coef
