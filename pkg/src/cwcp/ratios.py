"""Clipped least-squares importance fitting over concrete ratio families.

The estimation target is the density ratio w = dQ/dP.  Fitting minimizes
the least-squares importance-fitting risk

    risk(w) = (1/2m) * sum_i w(x_i)^2  -  (1/n) * sum_j w(x~_j)

over a ratio family whose members are clipped pointwise at a level B >= 1.
Clipping the family (rather than post-processing the fit) bounds every
candidate, which is what stabilizes both the fit and its downstream use in
weighted conformal calibration.

Four families are supported:

* ``PiecewiseConstant`` -- one weight per group; closed-form solution, with
  an optional simplex-style constraint when the group probabilities under
  P are known (solved by bisection on the constraint multiplier).
* ``ExponentialTilt`` -- x -> exp(x.mu - ||mu||^2/2); nonconvex after
  clipping, solved by full-batch subgradient descent with restarts.
* ``NeedleOneParam`` -- a two-valued family indexed by the on-ball weight
  beta; the clipped risk is piecewise quadratic in beta so the global
  minimum is found exactly from a handful of candidates.
* ``Tabulated`` -- explicit per-input values, clipped, no fitting.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .shifts import NeedleShift
from .streams import normal, substream


def _as_matrix(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    return arr


def _check_clip(b: float) -> float:
    b = float(b)
    if not (math.isfinite(b) and b >= 1.0):
        raise ValueError(f"clip level must be finite and >= 1, got {b}")
    return b


# ---------------------------------------------------------------------------
# Ratio families


@dataclass(frozen=True)
class PiecewiseConstant:
    """One ratio value per group.

    ``group_of`` maps an input batch to integer group ids in [0, k); when
    None the inputs themselves are taken as group ids.  ``probs`` are the
    known group probabilities under P, when available.  ``weights`` holds
    the fitted per-group values.
    """

    k: int
    group_of: Callable[[np.ndarray], np.ndarray] | None = None
    probs: np.ndarray | None = None
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"need at least one group, got k={self.k}")
        if self.probs is not None:
            probs = np.asarray(self.probs, dtype=np.float64).reshape(-1)
            if probs.shape[0] != self.k:
                raise ValueError(f"{probs.shape[0]} probs for k={self.k} groups")
            if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
                raise ValueError("group probabilities must be >= 0 and sum to 1")
            object.__setattr__(self, "probs", probs)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
            if w.shape[0] != self.k:
                raise ValueError(f"{w.shape[0]} weights for k={self.k} groups")
            object.__setattr__(self, "weights", w)

    def group_ids(self, x) -> np.ndarray:
        if self.group_of is not None:
            ids = np.asarray(self.group_of(x)).reshape(-1).astype(np.int64)
        else:
            ids = np.asarray(x).reshape(-1).astype(np.int64)
        if ids.size and (ids.min() < 0 or ids.max() >= self.k):
            raise ValueError(f"group ids outside [0, {self.k})")
        return ids


@dataclass(frozen=True)
class ExponentialTilt:
    """x -> exp(x @ mu - ||mu||^2 / 2) over R^d."""

    d: int
    mu: np.ndarray | None = None

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.mu is not None:
            mu = np.asarray(self.mu, dtype=np.float64).reshape(-1)
            if mu.shape[0] != self.d:
                raise ValueError(f"mu has dim {mu.shape[0]}, class has d={self.d}")
            if not np.all(np.isfinite(mu)):
                raise ValueError("mu must be finite")
            object.__setattr__(self, "mu", mu)


@dataclass(frozen=True)
class NeedleOneParam:
    """Two-valued ratios: beta on the ball ||x||_inf <= r, the matching
    off-ball value (1 - r^d beta)/(1 - r^d) elsewhere.

    beta ranges over [1 - theta + theta/r^d, 1/r^d], the values for which
    the pair is a valid density ratio between the needle family's P and a
    mixture placing at least the nominal extra mass on the ball.
    """

    r: float
    d: int
    theta: float
    beta: float | None = None

    def __post_init__(self):
        NeedleShift(r=self.r, d=self.d, theta=self.theta)  # validates r, d, theta
        if self.beta is not None:
            lo, hi = self.beta_interval()
            if not lo - 1e-12 <= self.beta <= hi + 1e-12:
                raise ValueError(f"beta={self.beta} outside [{lo}, {hi}]")

    def beta_interval(self) -> tuple[float, float]:
        u = self.r**self.d
        return 1.0 - self.theta + self.theta / u, 1.0 / u

    def values(self, beta: float) -> tuple[float, float]:
        """(on-ball, off-ball) unclipped values for a given beta."""
        u = self.r**self.d
        return beta, (1.0 - u * beta) / (1.0 - u)


@dataclass(frozen=True)
class Tabulated:
    """Explicit ratio value per input; inputs are indices into the table."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if vals.size == 0:
            raise ValueError("empty value table")
        object.__setattr__(self, "values", vals)


RatioClass = PiecewiseConstant | ExponentialTilt | NeedleOneParam | Tabulated


@dataclass(frozen=True)
class RatioFit:
    """A fitted ratio family member together with its clip level.

    Calling the fit evaluates min(ratio(x), B), guaranteed inside [0, B].
    The exponential tilt clips in log space before exponentiating, so large
    exponents never overflow.
    """

    ratio_class: RatioClass
    clip_b: float

    def __post_init__(self):
        object.__setattr__(self, "clip_b", _check_clip(self.clip_b))
        rc = self.ratio_class
        if isinstance(rc, PiecewiseConstant) and rc.weights is None:
            raise ValueError("piecewise fit has no group weights")
        if isinstance(rc, ExponentialTilt) and rc.mu is None:
            raise ValueError("tilt fit has no parameter vector")
        if isinstance(rc, NeedleOneParam) and rc.beta is None:
            raise ValueError("needle fit has no beta")

    def __call__(self, x) -> np.ndarray:
        rc, b = self.ratio_class, self.clip_b
        if isinstance(rc, PiecewiseConstant):
            raw = rc.weights[rc.group_ids(x)]
        elif isinstance(rc, ExponentialTilt):
            xm = _as_matrix(x)
            if xm.shape[1] != rc.d:
                raise ValueError(f"inputs have dim {xm.shape[1]}, class has d={rc.d}")
            expo = xm @ rc.mu - 0.5 * float(rc.mu @ rc.mu)
            return np.exp(np.minimum(expo, math.log(b)))
        elif isinstance(rc, NeedleOneParam):
            shape = NeedleShift(r=rc.r, d=rc.d, theta=rc.theta)
            on, off = rc.values(rc.beta)
            raw = np.where(shape.in_ball(x), on, off)
        elif isinstance(rc, Tabulated):
            idx = np.asarray(x).reshape(-1).astype(np.int64)
            raw = rc.values[idx]
        else:
            raise TypeError(f"unsupported ratio class: {rc!r}")
        return np.clip(raw, 0.0, b)


@dataclass(frozen=True)
class FitReport:
    """Fit output plus solver diagnostics."""

    fit: RatioFit
    empirical_risk: float
    iterations: int = 0
    restarts: int = 0
    converged: bool = True
    grad_norm: float | None = None
    multiplier: float | None = None
    slack: np.ndarray | None = None
    warnings: tuple[str, ...] = ()


def lsif_empirical_risk(fit: RatioFit, x_train, x_test) -> float:
    """Least-squares importance-fitting risk of a fit on two samples."""
    wtr = fit(x_train)
    wte = fit(x_test)
    if wtr.size == 0 or wte.size == 0:
        raise ValueError("both samples must be nonempty")
    return float(np.mean(wtr**2) / 2.0 - np.mean(wte))


# ---------------------------------------------------------------------------
# Piecewise-constant solvers


def _piecewise_counts(train_counts, test_counts) -> tuple[np.ndarray, np.ndarray]:
    mg = np.asarray(train_counts, dtype=np.float64).reshape(-1)
    ng = np.asarray(test_counts, dtype=np.float64).reshape(-1)
    if mg.shape != ng.shape:
        raise ValueError(f"{mg.shape[0]} train groups vs {ng.shape[0]} test groups")
    for name, arr in (("train", mg), ("test", ng)):
        if np.any(arr < 0) or np.any(arr != np.floor(arr)):
            raise ValueError(f"{name} counts must be nonnegative integers")
    return mg, ng


def _piecewise_risk(mg: np.ndarray, ng: np.ndarray, w: np.ndarray) -> float:
    """Normalized fitting risk of group weights, with empty sums taken as 0."""
    m, n = mg.sum(), ng.sum()
    train = float(mg @ w**2) / (2.0 * m) if m > 0 else 0.0
    test = float(ng @ w) / n if n > 0 else 0.0
    return train - test


def _piecewise_report(mg, ng, b, w, **extra) -> FitReport:
    k = mg.shape[0]
    fit = RatioFit(PiecewiseConstant(k=k, weights=np.clip(w, 0.0, b)), b)
    warn = ()
    if mg.sum() == 0:
        warn = ("degenerate fit: no source observations in any group",)
    return FitReport(
        fit=fit,
        empirical_risk=_piecewise_risk(mg, ng, np.clip(w, 0.0, b)),
        converged=True,
        warnings=warn,
        **extra,
    )


def fit_piecewise_unknown_p(train_counts, test_counts, b: float) -> FitReport:
    """Per-group closed form: w_g = min(test_g / train_g, B).

    Groups with no source observations get weight B when target
    observations exist (the ratio is formally infinite there) and weight 0
    when neither side was observed.
    """
    b = _check_clip(b)
    mg, ng = _piecewise_counts(train_counts, test_counts)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.minimum(ng / mg, b)
    w[(mg == 0) & (ng > 0)] = b
    w[(mg == 0) & (ng == 0)] = 0.0
    return _piecewise_report(mg, ng, b, w)


def _known_p_weights(nu: float, mg, ng, probs, b) -> np.ndarray:
    shifted = ng - nu * probs
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.clip(shifted / mg, 0.0, b)
    # Zero-source groups have a linear objective: all-or-nothing in nu,
    # with exact ties resolved to 0 (the feasibility-first choice).
    w[mg == 0] = np.where(shifted[mg == 0] > 0, b, 0.0)
    return w


def fit_piecewise_known_p(train_counts, test_counts, probs, b: float) -> FitReport:
    """Piecewise fit with the known-P constraint sum_g p_g w_g <= 1.

    Slack variables turn the defining equality sum_g p_g (w_g + s_g) = 1,
    s_g >= 0, into the inequality above.  If the box-clipped unconstrained
    solution is feasible it is returned as is; otherwise the constraint is
    active and the weights are w_g(nu) = clip((test_g - nu p_g)/train_g, 0, B)
    for the multiplier nu >= 0 located by bisection (the constraint value is
    monotone nonincreasing in nu).
    """
    b = _check_clip(b)
    mg, ng = _piecewise_counts(train_counts, test_counts)
    probs = np.asarray(probs, dtype=np.float64).reshape(-1)
    if probs.shape[0] != mg.shape[0]:
        raise ValueError(f"{probs.shape[0]} probs for {mg.shape[0]} groups")
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError("group probabilities must be >= 0 and sum to 1")

    w0 = _known_p_weights(0.0, mg, ng, probs, b)
    if float(probs @ w0) <= 1.0:
        slack_total = max(1.0 - float(probs @ w0), 0.0)
        return _piecewise_report(
            mg, ng, b, w0, multiplier=0.0, slack=np.full(mg.shape[0], slack_total)
        )

    def constraint(nu: float) -> float:
        return float(probs @ _known_p_weights(nu, mg, ng, probs, b))

    lo, hi = 0.0, 1.0
    while constraint(hi) > 1.0:
        hi *= 2.0
        if hi > 1e300:
            raise RuntimeError("constraint multiplier bracket failed to close")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if constraint(mid) > 1.0:
            lo = mid
        else:
            hi = mid
        if abs(constraint(hi) - 1.0) <= 1e-10:
            break
    nu = hi
    w = _known_p_weights(nu, mg, ng, probs, b)

    # The constraint value jumps wherever a zero-source group switches from
    # B to 0 (at nu = test_g / p_g).  If bisection landed on such a jump,
    # give the switching group the fractional weight that restores equality;
    # any value in [0, B] is optimal for it at that multiplier.
    deficit = 1.0 - float(probs @ w)
    if deficit > 1e-10:
        crossing = (mg == 0) & (probs > 0) & (np.abs(ng - nu * probs) <= max(1e-6, 1e-9 * nu))
        for g in np.nonzero(crossing)[0]:
            take = min(b, deficit / probs[g])
            w[g] = take
            deficit -= probs[g] * take
            if deficit <= 1e-10:
                break

    slack_total = max(1.0 - float(probs @ w), 0.0)
    return _piecewise_report(
        mg, ng, b, w, multiplier=nu, slack=np.full(mg.shape[0], slack_total)
    )


# ---------------------------------------------------------------------------
# Exponential tilt solver


@dataclass(frozen=True)
class TiltOptimizerSettings:
    """Subgradient-descent settings for the clipped tilt objective."""

    max_iters: int = 500
    initial_step: float = 0.1
    max_halvings: int = 30
    grad_tol: float = 1e-6
    restarts: int = 5
    seed: int = 0


def _tilt_value(mu, x_train, x_test, log_b):
    """Clipped risk only (used inside the line search)."""
    wtr = np.exp(np.minimum(x_train @ mu - 0.5 * float(mu @ mu), log_b))
    wte = np.exp(np.minimum(x_test @ mu - 0.5 * float(mu @ mu), log_b))
    return float(np.mean(wtr**2) / 2.0 - np.mean(wte))


def _tilt_value_and_grad(mu, x_train, x_test, log_b):
    """Clipped risk and its subgradient; clipped points contribute zero slope."""

    def side(xs):
        expo = xs @ mu - 0.5 * float(mu @ mu)
        active = expo < log_b
        return np.exp(np.minimum(expo, log_b)), active

    wtr, atr = side(x_train)
    wte, ate = side(x_test)
    m, n = x_train.shape[0], x_test.shape[0]
    value = float(np.mean(wtr**2) / 2.0 - np.mean(wte))
    coef_tr = wtr**2 * atr
    coef_te = wte * ate
    grad = (x_train.T @ coef_tr - mu * coef_tr.sum()) / m
    grad -= (x_test.T @ coef_te - mu * coef_te.sum()) / n
    return value, grad


def _descend(mu0, x_train, x_test, log_b, opt: TiltOptimizerSettings):
    """One restart of backtracking subgradient descent; returns the trace."""
    mu = mu0.copy()
    value, grad = _tilt_value_and_grad(mu, x_train, x_test, log_b)
    trace = [value]
    iters = 0
    converged = False
    for _ in range(opt.max_iters):
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= opt.grad_tol:
            converged = True
            break
        step = opt.initial_step
        accepted = False
        for _ in range(opt.max_halvings + 1):
            cand = mu - step * grad
            cand_value = _tilt_value(cand, x_train, x_test, log_b)
            if cand_value < value:
                mu = cand
                value, grad = _tilt_value_and_grad(mu, x_train, x_test, log_b)
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break  # stalled: no descent direction at this subgradient
        iters += 1
        trace.append(value)
    gnorm = float(np.linalg.norm(grad))
    return mu, value, iters, gnorm, converged or gnorm <= opt.grad_tol, trace


def fit_exponential_tilt(
    x_train, x_test, b: float, opt: TiltOptimizerSettings = TiltOptimizerSettings()
) -> FitReport:
    """Fit the clipped exponential tilt by subgradient descent with restarts.

    Restart initializations are the origin plus ``opt.restarts`` seeded
    Gaussian draws with per-coordinate scale 1/sqrt(d); the best final
    objective wins.  The clipped objective is nonconvex, so only a local
    minimum is guaranteed, but the returned objective is no worse than any
    restart's.
    """
    b = _check_clip(b)
    x_train = _as_matrix(x_train)
    x_test = _as_matrix(x_test)
    if x_train.shape[0] == 0 or x_test.shape[0] == 0:
        raise ValueError("both samples must be nonempty")
    if x_train.shape[1] != x_test.shape[1]:
        raise ValueError(
            f"dimension mismatch: train d={x_train.shape[1]}, test d={x_test.shape[1]}"
        )
    d = x_train.shape[1]
    log_b = math.log(b)

    inits = [np.zeros(d)]
    rng = substream(opt.seed, "tilt-init")
    for _ in range(opt.restarts):
        inits.append(normal(rng, d) / math.sqrt(d))

    best = None
    for mu0 in inits:
        mu, value, iters, gnorm, converged, _ = _descend(mu0, x_train, x_test, log_b, opt)
        if best is None or value < best[1]:
            best = (mu, value, iters, gnorm, converged)
    mu, value, iters, gnorm, converged = best
    fit = RatioFit(ExponentialTilt(d=d, mu=mu), b)
    return FitReport(
        fit=fit,
        empirical_risk=value,
        iterations=iters,
        restarts=len(inits),
        converged=converged,
        grad_norm=gnorm,
    )


# ---------------------------------------------------------------------------
# Needle solver


def fit_needle_class(x_train, x_test, b: float, r: float, d: int, theta: float) -> FitReport:
    """Exact minimizer of the clipped risk over the needle family.

    The clipped risk is quadratic in beta on either side of the clip kink
    beta = B, so the global minimum over the closed beta-interval is one of:
    the interval endpoints, each piece's stationary point (clamped to its
    piece), or the kink itself.
    """
    b = _check_clip(b)
    template = NeedleOneParam(r=r, d=d, theta=theta)
    shape = NeedleShift(r=r, d=d, theta=theta)
    x_train = _as_matrix(x_train)
    x_test = _as_matrix(x_test)
    if x_train.shape[0] == 0 or x_test.shape[0] == 0:
        raise ValueError("both samples must be nonempty")

    m, n = x_train.shape[0], x_test.shape[0]
    m_in = int(shape.in_ball(x_train).sum())
    n_in = int(shape.in_ball(x_test).sum())
    lo, hi = template.beta_interval()
    u = shape.ball_mass
    a0, c = 1.0 / (1.0 - u), -u / (1.0 - u)  # off-ball value = a0 + c*beta

    def risk_at(beta: float) -> float:
        on = min(beta, b)
        off = min(max(a0 + c * beta, 0.0), b)
        train = (m_in * on**2 + (m - m_in) * off**2) / (2.0 * m)
        test = (n_in * on + (n - n_in) * off) / n
        return train - test

    def stationary(quad: float, lin: float) -> float | None:
        return -lin / (2.0 * quad) if quad > 0 else None

    candidates = [lo, hi]
    if lo <= b:  # unclipped piece [lo, min(hi, b)]
        quad = (m_in + (m - m_in) * c**2) / (2.0 * m)
        lin = (m - m_in) * a0 * c / m - (n_in + (n - n_in) * c) / n
        stat = stationary(quad, lin)
        if stat is not None:
            candidates.append(min(max(stat, lo), min(hi, b)))
        if b <= hi:
            candidates.append(b)
    if b < hi:  # clipped piece [max(lo, b), hi]: on-ball value pinned at B
        quad = (m - m_in) * c**2 / (2.0 * m)
        lin = (m - m_in) * a0 * c / m - (n - n_in) * c / n
        stat = stationary(quad, lin)
        if stat is not None:
            candidates.append(min(max(stat, max(lo, b)), hi))

    beta_hat = min(sorted(set(candidates)), key=risk_at)
    fit = RatioFit(replace(template, beta=beta_hat), b)
    return FitReport(fit=fit, empirical_risk=risk_at(beta_hat), converged=True)


# ---------------------------------------------------------------------------
# Dispatch, model selection, sample-size planning


def clisf(
    ratio_class: RatioClass,
    b: float,
    x_train,
    x_test,
    opt: TiltOptimizerSettings = TiltOptimizerSettings(),
) -> FitReport:
    """Fit a clipped ratio of the given family on source/target samples.

    Dispatches to the family-specific solver; the returned evaluator is
    clipped at ``b`` in every case.
    """
    b = _check_clip(b)
    if isinstance(ratio_class, PiecewiseConstant):
        ids_train = ratio_class.group_ids(x_train)
        ids_test = ratio_class.group_ids(x_test)
        mg = np.bincount(ids_train, minlength=ratio_class.k)
        ng = np.bincount(ids_test, minlength=ratio_class.k)
        if ratio_class.probs is None:
            report = fit_piecewise_unknown_p(mg, ng, b)
        else:
            report = fit_piecewise_known_p(mg, ng, ratio_class.probs, b)
        fitted = replace(ratio_class, weights=report.fit.ratio_class.weights)
        return replace(report, fit=RatioFit(fitted, b))
    if isinstance(ratio_class, ExponentialTilt):
        return fit_exponential_tilt(x_train, x_test, b, opt)
    if isinstance(ratio_class, NeedleOneParam):
        return fit_needle_class(x_train, x_test, b, ratio_class.r, ratio_class.d, ratio_class.theta)
    if isinstance(ratio_class, Tabulated):
        fit = RatioFit(ratio_class, b)
        return FitReport(fit=fit, empirical_risk=lsif_empirical_risk(fit, x_train, x_test))
    raise ValueError(f"unsupported ratio class: {ratio_class!r}")


def srm_select(
    ratio_class: RatioClass,
    b_grid,
    lam: float,
    d: int,
    m: int,
    x_train,
    x_test,
    opt: TiltOptimizerSettings = TiltOptimizerSettings(),
) -> tuple[float, FitReport]:
    """Pick the clip level by structural risk minimization.

    Fits once per grid value and returns the (B, fit) minimizing

        empirical risk + lam * B * sqrt(d / m),

    with ties broken toward smaller B.  A grid point whose solver fails is
    skipped with a warning; only all points failing is fatal.
    """
    b_grid = [float(b) for b in b_grid]
    if not b_grid:
        raise ValueError("empty clip-level grid")
    if sorted(b_grid) != b_grid:
        raise ValueError("clip-level grid must be ascending")
    if lam < 0:
        raise ValueError(f"penalty strength must be >= 0, got {lam}")
    if m != np.asarray(x_train).shape[0]:
        raise ValueError(f"m={m} does not match the source sample size")

    best: tuple[float, float, FitReport] | None = None
    failures = 0
    for b in b_grid:
        try:
            report = clisf(ratio_class, b, x_train, x_test, opt)
        except Exception as exc:  # noqa: BLE001 - isolate per-grid-point failures
            failures += 1
            warnings.warn(f"fit failed at B={b}: {exc}", RuntimeWarning, stacklevel=2)
            continue
        objective = report.empirical_risk + lam * b * math.sqrt(d / m)
        if best is None or objective < best[0]:
            best = (objective, b, report)
    if best is None:
        raise RuntimeError(f"all {failures} grid points failed")
    return best[1], best[2]


@dataclass(frozen=True)
class SampleSizePlan:
    """Source/target sample sizes sufficient for a target fit accuracy."""

    m_train: int
    m_test: int
    b: float
    epsilon: float
    delta: float
    c_b: float
    c_tilde_b: float


def required_sample_sizes(
    b: float, epsilon: float, delta: float, c_b: float, c_tilde_b: float
) -> SampleSizePlan:
    """Exact ceilings of the finite-sample size requirements.

    The source size must dominate max(2304 B^2 C^2 / eps^2,
    5760 B^4 log(2/delta) / eps^2, 8 B^2 log(2/delta) / eps) and the target
    size max(2304 C~^2 / eps^2, 3456 B^2 log(2/delta) / eps^2,
    16 B log(2/delta) / eps), where C and C~ bound the complexity of the
    clipped family on either sample.
    """
    b = _check_clip(b)
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must be in (0, 1], got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if c_b <= 0 or c_tilde_b <= 0:
        raise ValueError("complexity constants must be positive")
    log_term = math.log(2.0 / delta)
    m_train = max(
        2304.0 * b**2 * c_b**2 / epsilon**2,
        5760.0 * b**4 * log_term / epsilon**2,
        8.0 * b**2 * log_term / epsilon,
    )
    m_test = max(
        2304.0 * c_tilde_b**2 / epsilon**2,
        3456.0 * b**2 * log_term / epsilon**2,
        16.0 * b * log_term / epsilon,
    )
    return SampleSizePlan(
        m_train=math.ceil(m_train),
        m_test=math.ceil(m_test),
        b=b,
        epsilon=epsilon,
        delta=delta,
        c_b=c_b,
        c_tilde_b=c_tilde_b,
    )


@dataclass(frozen=True)
class MonteCarloEstimate:
    """A Monte Carlo mean with its standard error."""

    value: float
    stderr: float
    n: int


def mc_population_risk(fit: RatioFit, p_sampler, q_sampler, n: int) -> MonteCarloEstimate:
    """Monte Carlo estimate of the population fitting risk of ``fit``.

    ``p_sampler`` and ``q_sampler`` map a sample size to fresh draws; they
    should be seeded closures so the estimate is reproducible.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    half_sq = fit(p_sampler(n)) ** 2 / 2.0
    target = fit(q_sampler(n))
    value = float(np.mean(half_sq) - np.mean(target))
    stderr = math.sqrt((np.var(half_sq) + np.var(target)) / n)
    return MonteCarloEstimate(value=value, stderr=stderr, n=n)
