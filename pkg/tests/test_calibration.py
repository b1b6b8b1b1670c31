import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cwcp.calibration import (
    CalibrationConfig,
    CoverageReport,
    CoverageRow,
    ScoredCalibrationSet,
    calibrate_threshold,
    cwcp_effective_level,
    evaluate_coverage,
    sup_cdf_gap,
    weighted_cdf,
)


def cal(scores, weights):
    return ScoredCalibrationSet(scores, weights)


class TestScoredCalibrationSet:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            cal([], [])

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            cal([1.0, 2.0], [1.0])

    def test_rejects_negative_weight(self):
        with pytest.raises(ValueError):
            cal([1.0], [-0.5])

    def test_rejects_all_zero_weights(self):
        with pytest.raises(ValueError):
            cal([1.0, 2.0], [0.0, 0.0])

    def test_rejects_nonfinite_scores(self):
        with pytest.raises(ValueError):
            cal([1.0, math.inf], [1.0, 1.0])

    def test_arrays_frozen(self):
        s = cal([1.0, 2.0], [1.0, 1.0])
        with pytest.raises(ValueError):
            s.scores[0] = 5.0


class TestWeightedCdf:
    def test_uniform_weights_reduce_to_empirical(self):
        s = cal([1, 2, 3, 4], [1, 1, 1, 1])
        assert weighted_cdf(s, 2.0) == 0.5

    def test_enumerated_weighted_mass(self):
        # direct enumeration: mass at scores <= 1 is 3 of total 4
        s = cal([1, 2], [3, 1])
        assert weighted_cdf(s, 1.0) == 0.75

    def test_total_mass_at_infinity(self):
        s = cal([5, -2, 7], [0.3, 1.2, 0.01])
        assert weighted_cdf(s, math.inf) == 1.0

    def test_zero_below_min_one_at_max(self):
        s = cal([1, 2, 3], [1, 2, 3])
        assert weighted_cdf(s, 0.999) == 0.0
        assert weighted_cdf(s, 3.0) == 1.0

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            weighted_cdf(cal([1.0], [1.0]), math.nan)


class TestCalibrateThreshold:
    def test_uniform_weights_quantile(self):
        res = calibrate_threshold(cal([0.1, 0.2, 0.3, 0.4], [1, 1, 1, 1]), 0.5)
        assert res.tau == 0.2
        assert not res.trivial_set

    def test_weighted_crossing(self):
        # F(1) = 0.75 < 0.8, F(2) = 1
        res = calibrate_threshold(cal([1, 2], [3, 1]), 0.8)
        assert res.tau == 2.0

    def test_level_above_one_gives_trivial_set(self):
        res = calibrate_threshold(cal([1, 2], [1, 1]), 1.2)
        assert math.isinf(res.tau)
        assert res.trivial_set
        assert res.effective_level == 1.2  # recorded verbatim

    def test_level_one_attained_at_max_score(self):
        res = calibrate_threshold(cal([3, 1, 2], [1, 1, 1]), 1.0)
        assert res.tau == 3.0

    def test_tiny_level_returns_smallest_score(self):
        res = calibrate_threshold(cal([4, 1, 2], [1, 1, 1]), 1e-9)
        assert res.tau == 1.0

    def test_nonpositive_level_rejected(self):
        with pytest.raises(ValueError):
            calibrate_threshold(cal([1.0], [1.0]), 0.0)

    def test_tau_is_calibration_score_or_inf(self):
        rng = np.random.default_rng(5)
        scores = rng.normal(size=40)
        weights = rng.uniform(0, 2, size=40)
        for level in (0.05, 0.3, 0.77, 0.999, 1.0, 1.4):
            res = calibrate_threshold(cal(scores, weights), level)
            assert math.isinf(res.tau) or res.tau in scores


class TestEffectiveLevel:
    def test_expected_mode(self):
        cfg = CalibrationConfig(alpha=0.2, delta_hat=0.05, epsilon=0.01, mode="cwcp-expected")
        assert cwcp_effective_level(cfg) == pytest.approx(0.88, abs=1e-15)

    def test_conditional_mode(self):
        cfg = CalibrationConfig(alpha=0.2, delta_hat=0.05, epsilon=0.01, mode="cwcp-conditional")
        assert cwcp_effective_level(cfg) == pytest.approx(0.90, abs=1e-15)

    def test_zero_correction_recovers_base_level(self):
        for mode in ("cwcp-expected", "cwcp-conditional"):
            cfg = CalibrationConfig(alpha=0.2, delta_hat=0.0, epsilon=0.0, mode=mode)
            assert cwcp_effective_level(cfg) == pytest.approx(0.80, abs=1e-15)

    def test_no_clamping_above_one(self):
        cfg = CalibrationConfig(alpha=0.1, delta_hat=0.3, epsilon=0.05, mode="cwcp-expected")
        assert cwcp_effective_level(cfg) == pytest.approx(1.35, abs=1e-15)

    def test_rejects_non_cwcp_modes(self):
        with pytest.raises(ValueError):
            cwcp_effective_level(CalibrationConfig(alpha=0.2, mode="split"))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            CalibrationConfig(alpha=1.5)
        with pytest.raises(ValueError):
            CalibrationConfig(alpha=0.2, epsilon=-0.1)
        with pytest.raises(ValueError):
            CalibrationConfig(alpha=0.2, mode="bogus")


class TestEvaluateCoverage:
    def test_infinite_threshold_covers_everything(self):
        assert evaluate_coverage(math.inf, [1e12, -5.0, 3.3]) == 1.0

    def test_direct_count(self):
        assert evaluate_coverage(2.0, [1, 2, 3, 4]) == 0.5

    def test_threshold_below_min(self):
        assert evaluate_coverage(0.5, [1, 2, 3]) == 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            evaluate_coverage(1.0, [])


class TestSupCdfGap:
    def test_identical_weights(self):
        a = cal([1, 2, 3], [1, 2, 1])
        b = cal([1, 2, 3], [1, 2, 1])
        assert sup_cdf_gap(a, b) == 0.0

    def test_enumerated_gap(self):
        # F1(1) = 0.5, F2(1) = 1.0
        assert sup_cdf_gap(cal([1, 2], [1, 1]), cal([1, 2], [2, 0])) == 0.5

    def test_scaled_weights_have_zero_gap(self):
        a = cal([1, 2, 5], [1, 3, 2])
        b = cal([1, 2, 5], [4, 12, 8])
        assert sup_cdf_gap(a, b) == 0.0

    def test_mismatched_scores_rejected(self):
        with pytest.raises(ValueError):
            sup_cdf_gap(cal([1, 2], [1, 1]), cal([1, 3], [1, 1]))


class TestCoverageReport:
    def test_duplicate_trial_rejected(self):
        row = CoverageRow("m", 1.0, 0.0, 0, 0.5, 1.0, 0.8)
        with pytest.raises(ValueError):
            CoverageReport(rows=(row, row))

    def test_coverage_range_enforced(self):
        with pytest.raises(ValueError):
            CoverageReport(rows=(CoverageRow("m", 1.0, 0.0, 0, 1.5, 1.0, 0.8),))

    def test_error_rows_may_carry_nan(self):
        row = CoverageRow("m", 1.0, 0.0, 0, math.nan, math.nan, math.nan, error="boom")
        assert len(CoverageReport(rows=(row,))) == 1


# ---------------------------------------------------------------------------
# Property tests

finite_scores = st.lists(
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False), min_size=1, max_size=40
)


weight_values = st.one_of(st.just(0.0), st.floats(min_value=1e-6, max_value=8.0))


@st.composite
def calibration_sets(draw):
    scores = draw(finite_scores)
    weights = draw(
        st.lists(weight_values, min_size=len(scores), max_size=len(scores))
    )
    if not any(w > 0 for w in weights):
        weights[draw(st.integers(0, len(weights) - 1))] = draw(
            st.floats(min_value=1e-3, max_value=8.0)
        )
    return scores, weights


@given(calibration_sets(), st.randoms(use_true_random=False), st.floats(0.01, 1.2))
def test_permutation_leaves_every_output_unchanged(sw, rand, level):
    scores, weights = sw
    pairs = list(zip(scores, weights))
    rand.shuffle(pairs)
    a = cal(scores, weights)
    b = cal([p[0] for p in pairs], [p[1] for p in pairs])
    for t in scores + [math.inf, -math.inf, 0.0]:
        assert weighted_cdf(a, t) == weighted_cdf(b, t)
    ra, rb = calibrate_threshold(a, level), calibrate_threshold(b, level)
    assert ra.tau == rb.tau and ra.trivial_set == rb.trivial_set


@given(calibration_sets(), st.integers(-20, 20), st.floats(0.01, 1.0))
def test_dyadic_weight_scaling_is_exact(sw, pow2, level):
    scores, weights = sw
    c = 2.0**pow2
    a = cal(scores, weights)
    b = cal(scores, [c * w for w in weights])
    for t in scores:
        assert weighted_cdf(a, t) == weighted_cdf(b, t)
    assert calibrate_threshold(a, level).tau == calibrate_threshold(b, level).tau


@given(calibration_sets(), st.floats(min_value=1e-6, max_value=1e6))
def test_general_weight_scaling_within_1e12_relative(sw, c):
    scores, weights = sw
    a = cal(scores, weights)
    b = cal(scores, [c * w for w in weights])
    for t in scores:
        fa, fb = weighted_cdf(a, t), weighted_cdf(b, t)
        assert fb == pytest.approx(fa, rel=1e-12, abs=1e-12)


@given(calibration_sets())
def test_constant_weights_equal_unweighted_ecdf(sw):
    scores, _ = sw
    s = cal(scores, [3.7] * len(scores))
    n = len(scores)
    for t in scores:
        assert weighted_cdf(s, t) == sum(x <= t for x in scores) / n


@given(calibration_sets(), st.floats(0.01, 1.3), st.floats(0.01, 1.3))
def test_threshold_nondecreasing_in_level(sw, l1, l2):
    scores, weights = sw
    lo, hi = min(l1, l2), max(l1, l2)
    s = cal(scores, weights)
    assert calibrate_threshold(s, lo).tau <= calibrate_threshold(s, hi).tau


@given(calibration_sets())
def test_cdf_nondecreasing_in_t(sw):
    scores, weights = sw
    s = cal(scores, weights)
    values = [weighted_cdf(s, t) for t in sorted(scores)]
    assert all(a <= b for a, b in zip(values, values[1:]))


@st.composite
def shared_score_instances(draw, max_atoms=50, b=4.0):
    n = draw(st.integers(1, max_atoms))
    scores = draw(
        st.lists(st.floats(-100, 100, allow_nan=False), min_size=n, max_size=n)
    )
    def weight_list():
        w = draw(st.lists(st.floats(0.0, b), min_size=n, max_size=n))
        if not any(x > 0 for x in w):
            w[0] = 1.0
        return w
    return scores, weight_list(), weight_list()


@given(shared_score_instances())
@settings(max_examples=200)
def test_cdf_perturbation_bound(inst):
    # gap between two weightings is at most the mean absolute weight
    # difference over the larger mean weight
    scores, w1, w2 = inst
    gap = sup_cdf_gap(cal(scores, w1), cal(scores, w2))
    m = len(scores)
    bound = (sum(abs(a - b) for a, b in zip(w1, w2)) / m) / max(
        sum(w1) / m, sum(w2) / m
    )
    assert gap <= bound + 1e-12
