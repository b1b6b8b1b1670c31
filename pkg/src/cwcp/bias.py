"""Clipping-bias estimation, analytic oracles, and finite-sample bounds.

Clipping a density ratio at B removes mass: the clipped ratio integrates to
less than 1 under P whenever the true ratio exceeds B somewhere.  The gap

    delta_B = E_P[(w(X) - B)^+] = 1 - E_P[min(w(X), B)]

is the bias that bias-corrected calibration adds back to its target level.
This module estimates delta_B from data (``estimate_clipping_bias``),
evaluates it in closed form for the built-in shift families, checks those
closed forms by Monte Carlo, and exposes every explicit finite-sample bound
used to size samples or certify the estimate.

At B = 1 the bias equals the total variation distance between P and Q,
which is the cross-check applied to every analytic family.

Numeric dependency: standard normal CDF values come from scipy's
erfc-based ``ndtr``, accurate well past 1e-12 absolute error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .ratios import MonteCarloEstimate, RatioFit
from .shifts import GaussianTiltShift, NeedleShift, PowerLawShift, ShiftSpec, true_ratio
from .synth import draw_covariates


@dataclass(frozen=True)
class BiasEstimate:
    """Estimated clipping bias, 1 minus the sample mean of a clipped fit."""

    delta_hat: float
    m_est: int
    clip_b: float


def estimate_clipping_bias(fit: RatioFit, x_sample) -> BiasEstimate:
    """Plug-in bias estimate from a fresh P-sample.

    Because the fit is bounded in [0, B], the estimate always lies in
    [1 - B, 1] and concentrates at rate sqrt(B/m) around the population
    value 1 - E_P[fit(X)].
    """
    values = fit(x_sample)
    if values.size == 0:
        raise ValueError("bias estimation sample is empty")
    return BiasEstimate(
        delta_hat=1.0 - float(np.mean(values)),
        m_est=int(values.size),
        clip_b=fit.clip_b,
    )


def analytic_delta_b(spec: ShiftSpec, b: float) -> float:
    """Closed-form clipping bias E_P[(w(X) - B)^+] for a shift family.

    The needle family's ratio is two-valued, so the positive part is a
    single term.  The power-law ratio has tail P(w >= t) = 1/(4 t^2), which
    integrates to 1/(4B).  The Gaussian tilt ratio is lognormal under P,
    giving the partial-expectation identity

        delta_B = Phi(beta/2 - ln(B)/beta) - B * Phi(-beta/2 - ln(B)/beta).

    The Monte Carlo estimator ``mc_delta_b`` is the oracle of record; these
    formulas are the fast path and are validated against it.
    """
    b = float(b)
    min_b = 0.5 if isinstance(spec, PowerLawShift) else 1.0
    if not b >= min_b:
        raise ValueError(f"clip level must be >= {min_b} for this family, got {b}")
    if isinstance(spec, NeedleShift):
        return spec.ball_mass * max(0.0, spec.ratio_inside - b)
    if isinstance(spec, PowerLawShift):
        return 1.0 / (4.0 * b)
    if isinstance(spec, GaussianTiltShift):
        s = abs(spec.beta)
        if s == 0.0:
            return 0.0
        z = math.log(b) / s
        return float(ndtr(s / 2.0 - z) - b * ndtr(-s / 2.0 - z))
    raise TypeError(f"unsupported shift spec: {spec!r}")


def analytic_tv(spec: ShiftSpec) -> float:
    """Total variation distance between P and Q; equals the bias at B = 1."""
    if isinstance(spec, NeedleShift):
        return spec.theta * (1.0 - spec.ball_mass)
    if isinstance(spec, PowerLawShift):
        return 0.25
    if isinstance(spec, GaussianTiltShift):
        return float(2.0 * ndtr(abs(spec.beta) / 2.0) - 1.0)
    raise TypeError(f"unsupported shift spec: {spec!r}")


def _maybe_clamp(value: float, clamp: bool) -> float:
    return min(max(value, 0.0), 1.0) if clamp else value


def bias_deviation_bound(
    b: float, epsilon: float, gamma: float, m: int, clamp: bool = True
) -> float:
    """Failure probability bound for the plug-in bias estimate.

    Bounds Pr[|estimate - truth| > epsilon + gamma] for a fit whose mean
    absolute error against the clipped truth is at most epsilon:

        2 * exp(-gamma^2 m / (2 B (1 + epsilon + gamma))).

    ``clamp`` trims the reported value to [0, 1]; pass False to keep the
    raw expression (useful for monotonicity checks in the vacuous regime).
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if b < 1:
        raise ValueError(f"clip level must be >= 1, got {b}")
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    raw = 2.0 * math.exp(-(gamma**2) * m / (2.0 * b * (1.0 + epsilon + gamma)))
    return _maybe_clamp(raw, clamp)


def weighted_dkw_bound(m: int, gamma: float, b_over_mu: float, clamp: bool = True) -> float:
    """Uniform-deviation bound for a weighted empirical CDF.

    With weights bounded by B and mean at least mu on the calibration
    distribution, the normalized weights are bounded by B' = B/mu and

        Pr[sup_t |F_m(t) - F(t)| > gamma]
            <= (72/gamma) exp(-m gamma^2 / (4 B')) + 2 exp(-m gamma^2 / (2 B'^2)).

    The caller supplies B' directly; deriving a lower bound on the weight
    mean is the caller's responsibility.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if b_over_mu < 1:
        raise ValueError(f"normalized weight bound must be >= 1, got {b_over_mu}")
    raw = (72.0 / gamma) * math.exp(-m * gamma**2 / (4.0 * b_over_mu)) + 2.0 * math.exp(
        -m * gamma**2 / (2.0 * b_over_mu**2)
    )
    return _maybe_clamp(raw, clamp)


def wcp_calibration_size(b: float, epsilon: float, delta: float) -> int:
    """Calibration-set size sufficient for conditional coverage at (eps, delta).

    The exact ceiling of max((16 B / eps^2) log(144 / (eps delta)),
    (32 B^2 / eps^2) log(4 / delta)).
    """
    if b < 1:
        raise ValueError(f"clip level must be >= 1, got {b}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    first = (16.0 * b / epsilon**2) * math.log(144.0 / (epsilon * delta))
    second = (32.0 * b**2 / epsilon**2) * math.log(4.0 / delta)
    return math.ceil(max(first, second))


def moment_bias_bound(rho: float, c: float, p: float, b0: float, b: float) -> float:
    """Clipping-bias bound from a tail-moment control on the true ratio.

    If E_P[f(w(X))] <= rho for some f nondecreasing on [B0, inf) with
    f(x) >= C (x - B0)^p there, then delta_B <= rho / (C (p-1) (B-B0)^(p-1))
    for every B > B0.
    """
    if rho < 0:
        raise ValueError(f"moment bound must be >= 0, got {rho}")
    if c <= 0:
        raise ValueError(f"scale constant must be > 0, got {c}")
    if p <= 1:
        raise ValueError(f"tail exponent must be > 1, got {p}")
    if b0 < 0 or b <= b0:
        raise ValueError(f"need B > B0 >= 0, got B={b}, B0={b0}")
    return rho / (c * (p - 1.0) * (b - b0) ** (p - 1.0))


def mc_delta_b(spec: ShiftSpec, b: float, n: int, seed: int) -> MonteCarloEstimate:
    """Monte Carlo clipping bias: mean over P-draws of (w(X) - B)^+."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    x = draw_covariates(spec, "P", n, seed)
    excess = np.maximum(true_ratio(spec, x) - b, 0.0)
    return MonteCarloEstimate(
        value=float(np.mean(excess)),
        stderr=float(np.sqrt(np.var(excess) / n)),
        n=n,
    )


@dataclass(frozen=True)
class RatioErrorEstimate:
    """Monte Carlo L1/L2 errors of a fit against an analytic target."""

    l1: float
    l2: float
    l1_stderr: float
    l2_stderr: float
    n: int
    target: str


def mc_l1_l2_error(
    fit: RatioFit, spec: ShiftSpec, target: str, n: int, seed: int
) -> RatioErrorEstimate:
    """E_P|fit - target| and E_P[(fit - target)^2] by Monte Carlo.

    ``target`` is "star" for the family's exact ratio or "star_clipped" for
    the exact ratio clipped at the fit's own level.  By Jensen's inequality
    l1 <= sqrt(l2) up to Monte Carlo error.
    """
    if target not in ("star", "star_clipped"):
        raise ValueError(f"target must be 'star' or 'star_clipped', got {target!r}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    x = draw_covariates(spec, "P", n, seed)
    ref = true_ratio(spec, x)
    if target == "star_clipped":
        ref = np.minimum(ref, fit.clip_b)
    diff = fit(x) - ref
    abs_diff = np.abs(diff)
    sq_diff = diff**2
    return RatioErrorEstimate(
        l1=float(np.mean(abs_diff)),
        l2=float(np.mean(sq_diff)),
        l1_stderr=float(np.sqrt(np.var(abs_diff) / n)),
        l2_stderr=float(np.sqrt(np.var(sq_diff) / n)),
        n=n,
        target=target,
    )
