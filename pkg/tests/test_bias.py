import math

import numpy as np
import pytest
from scipy.special import ndtr

from cwcp.bias import (
    analytic_delta_b,
    analytic_tv,
    bias_deviation_bound,
    estimate_clipping_bias,
    mc_delta_b,
    mc_l1_l2_error,
    moment_bias_bound,
    wcp_calibration_size,
    weighted_dkw_bound,
)
from cwcp.ratios import ExponentialTilt, NeedleOneParam, RatioFit, Tabulated
from cwcp.shifts import GaussianTiltShift, NeedleShift, PowerLawShift, true_ratio
from cwcp.streams import substream, uniform_open
from cwcp.synth import draw_covariates


def tabulated_fit(values, b=10.0):
    return RatioFit(Tabulated(values=np.asarray(values, dtype=float)), b)


class TestEstimateClippingBias:
    def test_unit_ratio_has_zero_bias(self):
        fit = tabulated_fit([1.0, 1.0, 1.0])
        est = estimate_clipping_bias(fit, np.array([0, 1, 2]))
        assert est.delta_hat == 0.0

    def test_mean_preserving_values(self):
        est = estimate_clipping_bias(tabulated_fit([0.5, 1.5]), np.array([0, 1]))
        assert est.delta_hat == 0.0

    def test_under_unit_mean(self):
        est = estimate_clipping_bias(tabulated_fit([0.2, 0.4]), np.array([0, 1]))
        assert est.delta_hat == pytest.approx(0.7, abs=1e-15)
        assert est.m_est == 2

    def test_range_invariant(self):
        rng = np.random.default_rng(3)
        for b in (1.0, 3.0):
            fit = tabulated_fit(rng.uniform(0, b, size=50), b=b)
            est = estimate_clipping_bias(fit, np.arange(50))
            assert 1.0 - b <= est.delta_hat <= 1.0

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            estimate_clipping_bias(tabulated_fit([1.0]), np.array([], dtype=int))

    def test_converges_to_analytic_bias(self):
        # exact clipped true ratio: deviation within 4 B / sqrt(m)
        beta, d, b, m = 1.0, 4, 2.0, 400
        spec = GaussianTiltShift(beta=beta, d=d)
        mu = np.zeros(d)
        mu[0] = beta
        fit = RatioFit(ExponentialTilt(d=d, mu=mu), b)
        truth = analytic_delta_b(spec, b)
        for rep in range(30):
            x = draw_covariates(spec, "P", m, 9000 + rep)
            est = estimate_clipping_bias(fit, x)
            assert abs(est.delta_hat - truth) <= 4.0 * b / math.sqrt(m)


class TestAnalyticDeltaB:
    def test_powerlaw_quarter_at_unit_clip(self):
        assert analytic_delta_b(PowerLawShift(), 1.0) == 0.25

    def test_powerlaw_inverse_in_b(self):
        assert analytic_delta_b(PowerLawShift(), 2.0) == 0.125
        assert analytic_delta_b(PowerLawShift(), 0.5) == 0.5

    def test_needle_two_point_formula(self):
        spec = NeedleShift(r=0.5, d=1, theta=0.5)
        assert analytic_delta_b(spec, 1.0) == pytest.approx(0.25, abs=1e-15)

    def test_needle_vanishes_beyond_sup(self):
        spec = NeedleShift(r=0.5, d=1, theta=0.5)
        assert analytic_delta_b(spec, spec.ratio_inside) == 0.0
        assert analytic_delta_b(spec, 10.0) == 0.0

    def test_gaussian_zero_shift(self):
        assert analytic_delta_b(GaussianTiltShift(beta=0.0, d=3), 2.0) == 0.0

    def test_nonincreasing_in_b(self):
        grid = [1.0, 1.5, 2.0, 4.0, 16.0]
        for spec in (PowerLawShift(), NeedleShift(0.3, 2, 0.4), GaussianTiltShift(1.2, 2)):
            vals = [analytic_delta_b(spec, b) for b in grid]
            assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_out_of_range_clip_rejected(self):
        with pytest.raises(ValueError):
            analytic_delta_b(NeedleShift(0.5, 1, 0.5), 0.9)
        with pytest.raises(ValueError):
            analytic_delta_b(PowerLawShift(), 0.4)


class TestAnalyticTv:
    def test_needle_closed_form(self):
        assert analytic_tv(NeedleShift(r=0.5, d=1, theta=0.5)) == 0.25

    def test_needle_vanishing_mixture(self):
        assert analytic_tv(NeedleShift(r=0.5, d=1, theta=1e-12)) == pytest.approx(0.0, abs=1e-12)

    def test_powerlaw(self):
        assert analytic_tv(PowerLawShift()) == 0.25

    def test_equals_bias_at_unit_clip(self):
        specs = [
            NeedleShift(0.5, 1, 0.5),
            NeedleShift(0.1, 3, 0.25),
            PowerLawShift(),
            GaussianTiltShift(0.7, 4),
            GaussianTiltShift(2.0, 1),
        ]
        for spec in specs:
            assert abs(analytic_tv(spec) - analytic_delta_b(spec, 1.0)) <= 1e-12


class TestBoundCalculators:
    def test_bias_deviation_value(self):
        assert bias_deviation_bound(1.0, 0.0, 1.0, 4) == pytest.approx(2 * math.exp(-1), abs=1e-12)

    def test_bias_deviation_monotone_in_m(self):
        vals = [bias_deviation_bound(2.0, 0.1, 0.5, m, clamp=False) for m in (10, 100, 1000)]
        assert vals[0] > vals[1] > vals[2]

    def test_bias_deviation_vacuous_regime_clamped(self):
        assert bias_deviation_bound(1.0, 0.0, 1e-9, 10) == 1.0
        assert bias_deviation_bound(1.0, 0.0, 1e-9, 10, clamp=False) == pytest.approx(2.0, rel=1e-6)

    def test_weighted_dkw_value(self):
        got = weighted_dkw_bound(10**6, 0.05, 4.0, clamp=False)
        expect = (72 / 0.05) * math.exp(-156.25) + 2 * math.exp(-78.125)
        assert got == pytest.approx(expect, rel=1e-12)
        assert got == pytest.approx(2 * math.exp(-78.125), rel=1e-30)

    def test_weighted_dkw_limits(self):
        assert weighted_dkw_bound(10**8, 0.05, 4.0, clamp=False) < 1e-300
        small = weighted_dkw_bound(5000, 0.05, 2.0, clamp=False)
        big = weighted_dkw_bound(5000, 0.05, 4.0, clamp=False)
        assert big > small  # doubling the weight bound loosens the bound

    def test_wcp_calibration_size_value(self):
        assert wcp_calibration_size(1.0, 0.1, 0.1) == 15320

    def test_wcp_calibration_size_monotonicity(self):
        base = wcp_calibration_size(1.0, 0.1, 0.1)
        assert wcp_calibration_size(2.0, 0.1, 0.1) >= base
        assert wcp_calibration_size(1.0, 0.05, 0.1) >= 4 * base - 1
        # with B doubled, the second (B^2) term exactly quadruples
        second = lambda b: (32 * b**2 / 0.1**2) * math.log(4 / 0.1)
        assert second(2.0) == 4 * second(1.0)

    def test_moment_bias_value(self):
        assert moment_bias_bound(1.0, 1.0, 2.0, 0.0, 4.0) == 0.25

    def test_moment_bias_limits(self):
        assert moment_bias_bound(0.0, 1.0, 2.0, 0.0, 4.0) == 0.0
        assert moment_bias_bound(1.0, 1.0, 2.0, 0.0, 1e12) < 1e-11

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            bias_deviation_bound(1.0, 0.0, 0.0, 4)
        with pytest.raises(ValueError):
            weighted_dkw_bound(0, 0.1, 2.0)
        with pytest.raises(ValueError):
            wcp_calibration_size(1.0, 1.5, 0.1)
        with pytest.raises(ValueError):
            moment_bias_bound(1.0, 1.0, 1.0, 0.0, 4.0)
        with pytest.raises(ValueError):
            moment_bias_bound(1.0, 1.0, 2.0, 4.0, 4.0)


class TestMcDeltaB:
    def test_powerlaw_matches_closed_form(self):
        est = mc_delta_b(PowerLawShift(), 2.0, 10**6, seed=7)
        assert abs(est.value - 0.125) <= 4 * est.stderr

    def test_needle_no_clipping_is_exactly_zero(self):
        spec = NeedleShift(r=0.4, d=1, theta=0.3)
        est = mc_delta_b(spec, spec.ratio_inside + 1.0, 10**4, seed=8)
        assert est.value == 0.0 and est.stderr == 0.0

    def test_gaussian_matches_closed_form(self):
        spec = GaussianTiltShift(beta=1.5, d=3)
        for b in (1.0, 2.0, 4.0):
            est = mc_delta_b(spec, b, 10**6, seed=9)
            assert abs(est.value - analytic_delta_b(spec, b)) <= 4 * est.stderr

    def test_needle_matches_closed_form(self):
        spec = NeedleShift(r=0.2, d=2, theta=0.45)  # ratio tops out at 11.8
        for b in (1.0, 2.0, 4.0):
            est = mc_delta_b(spec, b, 10**6, seed=10)
            assert abs(est.value - analytic_delta_b(spec, b)) <= 4 * est.stderr


class TestMcL1L2:
    def test_exact_clipped_truth_gives_zero(self):
        # the needle family contains the true ratio at the bottom of its
        # beta interval; dyadic parameters keep the identity float-exact
        spec = NeedleShift(r=0.5, d=1, theta=0.5)
        fit = RatioFit(NeedleOneParam(0.5, 1, 0.5, beta=spec.ratio_inside), 10.0)
        err = mc_l1_l2_error(fit, spec, "star", 10**4, seed=11)
        assert err.l1 == 0.0 and err.l2 == 0.0

    def test_exact_tilt_truth_gives_zero(self):
        spec = GaussianTiltShift(beta=0.75, d=3)
        mu = np.array([0.75, 0.0, 0.0])
        fit = RatioFit(ExponentialTilt(d=3, mu=mu), 10**6)
        err = mc_l1_l2_error(fit, spec, "star", 10**4, seed=14)
        assert err.l1 == 0.0 and err.l2 == 0.0

    def test_overestimated_needle_l1(self):
        # top-of-interval fit vs truth: l1 converges to 2(1-theta)(1-r^d)
        r, d, theta = 0.1, 1, 0.3
        spec = NeedleShift(r=r, d=d, theta=theta)
        u = r**d
        fit = RatioFit(NeedleOneParam(r, d, theta, beta=1.0 / u), 1.0 / u)
        err = mc_l1_l2_error(fit, spec, "star", 10**6, seed=12)
        expect = 2 * (1 - theta) * (1 - u)
        assert abs(err.l1 - expect) <= 4 * err.l1_stderr + 1e-9

    def test_jensen_inequality(self):
        spec = GaussianTiltShift(beta=0.8, d=2)
        fit = RatioFit(ExponentialTilt(d=2, mu=np.array([0.5, 0.1])), 3.0)
        for target in ("star", "star_clipped"):
            err = mc_l1_l2_error(fit, spec, target, 10**5, seed=13)
            assert err.l1 <= math.sqrt(err.l2) + 3 * (err.l1_stderr + err.l2_stderr)

    def test_unknown_target_rejected(self):
        fit = RatioFit(ExponentialTilt(d=1, mu=np.array([0.1])), 2.0)
        with pytest.raises(ValueError):
            mc_l1_l2_error(fit, GaussianTiltShift(0.1, 1), "oracle", 10, seed=1)


class TestBiasDeviationEmpirical:
    def test_lemma_regime_frequency_below_bound(self):
        # exact clipped truth (zero fit error), m=100, B=2, gamma=0.5:
        # empirical frequency of |est - truth| > gamma stays below the bound
        b, m, gamma, reps = 2.0, 100, 0.5, 10_000
        spec = PowerLawShift()
        truth = analytic_delta_b(spec, b)
        rng = substream(20_250_809, "lemma-bias")
        x = uniform_open(rng, (reps, m))
        clipped = np.minimum(true_ratio(spec, x.ravel()).reshape(reps, m), b)
        deltas = 1.0 - clipped.mean(axis=1)
        freq = float(np.mean(np.abs(deltas - truth) > gamma))
        bound = 2 * math.exp(-(gamma**2) * m / (2 * b * (1 + gamma)))
        assert freq <= bound
        assert bound == pytest.approx(bias_deviation_bound(b, 0.0, gamma, m), rel=1e-12)


class TestGaussianClosedFormDetails:
    def test_partial_expectation_identity(self):
        # independent quadrature check of the lognormal partial expectation
        from scipy.integrate import quad

        beta, b = 1.3, 3.0
        integrand = lambda x: max(math.exp(beta * x - beta**2 / 2) - b, 0.0) * math.exp(
            -(x**2) / 2
        ) / math.sqrt(2 * math.pi)
        numeric, abserr = quad(integrand, -12, 12, limit=200)
        closed = analytic_delta_b(GaussianTiltShift(beta=beta, d=5), b)
        assert closed == pytest.approx(numeric, abs=max(1e-10, 10 * abserr))

    def test_negative_shift_symmetric(self):
        a = analytic_delta_b(GaussianTiltShift(beta=1.1, d=2), 2.0)
        b = analytic_delta_b(GaussianTiltShift(beta=-1.1, d=2), 2.0)
        assert a == b

    def test_tv_formula(self):
        beta = 0.9
        assert analytic_tv(GaussianTiltShift(beta, 4)) == pytest.approx(
            2 * ndtr(beta / 2) - 1, abs=1e-15
        )
