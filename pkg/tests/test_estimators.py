import math

import numpy as np
import pytest

from ldpmean.estimators import (
    EstimatorConfig,
    default_n1,
    invert_mean,
    one_stage,
    one_stage_asymptotic_variance,
    optimal_asymptotic_variance,
    rescaled_estimate,
    three_stage,
    two_stage,
)
from ldpmean.mechanisms import privacy_params, rr_matrix, verify_ldp
from ldpmean.numerics import std_normal_cdf
from ldpmean.quantized import sign_fisher_info


class CountingRng:
    """Duck-typed stream wrapper that counts uniform draws."""

    def __init__(self, seed):
        self._rng = np.random.default_rng(seed)
        self.uniforms = 0

    def random(self, shape=None):
        if shape is not None:
            self.uniforms += int(np.prod(shape))
        else:
            self.uniforms += 1
        return self._rng.random(shape)


class TestInvertMean:
    def test_zero_mean_bit_returns_center(self):
        params = privacy_params(1.0)
        assert invert_mean(0.0, 2.5, params) == 2.5

    def test_clamps_at_threshold(self):
        params = privacy_params(1.0)
        t = params.t_eps
        center = -1.3
        assert invert_mean(t, center, params) == center
        assert invert_mean(-t, center, params) == center
        assert invert_mean(1.0, center, params) == center

    def test_zero_budget_always_clamps(self):
        params = privacy_params(0.0)
        assert invert_mean(0.0, 1.0, params) == 1.0

    @pytest.mark.parametrize("eps", [0.5, 1.0])
    @pytest.mark.parametrize("offset", [-2.0, -1.0, 0.0, 0.5, 2.0])
    def test_population_fixed_point(self, eps, offset):
        # feeding the exact population mean bit recovers the true mean
        params = privacy_params(eps)
        theta = 0.7
        center = theta + offset
        z_bar = params.t_eps * (1.0 - 2.0 * std_normal_cdf(center - theta))
        assert invert_mean(z_bar, center, params) == pytest.approx(theta, abs=1e-9)


class TestOneStage:
    def test_single_sample_clamps_to_guess(self):
        cfg = EstimatorConfig(epsilon=1.0, theta0=3.0)
        result = one_stage([10.0], cfg, np.random.default_rng(0))
        assert result.theta_hat == 3.0
        assert result.clamped == (True,)

    def test_empty_data_rejected(self):
        with pytest.raises(ValueError):
            one_stage([], EstimatorConfig(epsilon=1.0), np.random.default_rng(0))

    def test_consistency_at_fixed_guess(self):
        # theta0 one unit off; at n = 1e6 the estimate is within 0.02
        cfg = EstimatorConfig(epsilon=1.0, theta0=1.3)
        rng = np.random.default_rng(101)
        data = rng.standard_normal(10 ** 6) + 0.3
        result = one_stage(data, cfg, rng)
        assert abs(result.theta_hat - 0.3) < 0.02

    def test_scaled_mse_near_optimal_variance(self):
        # matched guess: n * MSE approaches the optimal variance
        cfg = EstimatorConfig(epsilon=1.0, theta0=0.0)
        n, reps = 10 ** 5, 1500
        errs = np.empty(reps)
        for r in range(reps):
            rng = np.random.default_rng(np.random.SeedSequence(202, spawn_key=(r,)))
            errs[r] = one_stage(rng.standard_normal(n), cfg, rng).theta_hat
        scaled = n * np.mean(errs ** 2)
        assert 6.5 < scaled < 8.2  # 7.356 with a generous Monte Carlo band


class TestOneStageVariance:
    def test_matched_guess_is_optimal(self):
        params = privacy_params(1.0)
        value = one_stage_asymptotic_variance(0.4, 0.4, params)
        assert value == pytest.approx(1.0 / sign_fisher_info(params), rel=1e-12)
        assert value == pytest.approx(
            (math.pi / 2) * ((math.e + 1) / (math.e - 1)) ** 2, rel=1e-12)

    def test_bad_guess_blows_up(self):
        params = privacy_params(1.0)
        base = one_stage_asymptotic_variance(0.0, 0.0, params)
        assert one_stage_asymptotic_variance(0.0, 3.0, params) >= 100.0 * base
        far = one_stage_asymptotic_variance(0.0, 4.0, params)
        assert math.isfinite(far) and far > 1e3

    def test_even_in_the_offset(self):
        params = privacy_params(0.8)
        for d in (0.5, 1.0, 2.5):
            assert one_stage_asymptotic_variance(0.0, d, params) == pytest.approx(
                one_stage_asymptotic_variance(0.0, -d, params), rel=1e-12)

    def test_zero_budget_infinite(self):
        assert one_stage_asymptotic_variance(0.0, 0.0, privacy_params(0.0)) == math.inf


class TestTwoStage:
    def test_clamped_pilot_falls_back_to_guess(self):
        # n1 = 1 forces |mean bit| = 1 >= t_eps, so stage two re-centers at theta0
        cfg = EstimatorConfig(epsilon=1.0, theta0=0.5, n1=1)
        rng = np.random.default_rng(7)
        result = two_stage(rng.standard_normal(500) + 0.5, cfg, rng)
        assert result.clamped[0]
        assert result.stage_estimates[0] == 0.5
        assert not result.clamped[1]

    def test_group_size_validation(self):
        cfg = EstimatorConfig(epsilon=1.0, n1=10)
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            two_stage(np.zeros(10), cfg, rng)
        with pytest.raises(ValueError):
            two_stage(np.zeros(5), EstimatorConfig(epsilon=1.0, n1=0), rng)

    def test_translation_equivariance(self):
        # same seed, all data and the guess shifted by c: estimate shifts by c
        cfg0 = EstimatorConfig(epsilon=1.0, theta0=0.0, n1=200)
        shift = 256.0
        cfg1 = EstimatorConfig(epsilon=1.0, theta0=shift, n1=200)
        data = np.random.default_rng(11).standard_normal(4000)
        r0 = two_stage(data, cfg0, np.random.default_rng(12))
        r1 = two_stage(data + shift, cfg1, np.random.default_rng(12))
        assert r1.theta_hat == pytest.approx(r0.theta_hat + shift, abs=1e-12)
        assert r1.stage_estimates[0] == pytest.approx(
            r0.stage_estimates[0] + shift, abs=1e-12)
        assert r1.clamped == r0.clamped

    def test_default_pilot_size(self):
        assert default_n1(10 ** 5) == 3162  # floor(n^0.7)
        assert default_n1(100) == 25

    @pytest.mark.slow
    def test_consistency_across_sample_sizes(self):
        # median |error| shrinks with n and ends below 3 sqrt(7.356 / n)
        cfg = EstimatorConfig(epsilon=1.0, theta0=0.7)
        theta = 0.2
        medians = []
        for n, reps in ((10 ** 4, 101), (10 ** 5, 101), (10 ** 6, 51)):
            errs = np.empty(reps)
            for r in range(reps):
                rng = np.random.default_rng(np.random.SeedSequence(404, spawn_key=(n, r)))
                data = rng.standard_normal(n) + theta
                errs[r] = two_stage(data, cfg, rng).theta_hat - theta
            medians.append(float(np.median(np.abs(errs))))
        assert medians[0] > medians[1] > medians[2]
        assert medians[2] < 3.0 * math.sqrt(7.356 / 10 ** 6)


class TestThreeStage:
    def test_single_bisection_round(self):
        cfg = EstimatorConfig(epsilon=1.0, n0=2000, bits=1, n1=200,
                              range_lo=0.0, range_hi=128.0)
        rng = np.random.default_rng(13)
        data = rng.standard_normal(6000) + 64.0  # true mean at the midpoint
        result = three_stage(data, cfg, rng)
        assert result.stage_estimates[0] in (32.0, 96.0)

    def test_preliminary_hits_exact_binary_mean(self):
        # 84.5 is exactly representable by 7 bisections of [0, 128]
        cfg = EstimatorConfig(epsilon=1.0, n0=7000, bits=7, n1=500,
                              range_lo=0.0, range_hi=128.0)
        rng = np.random.default_rng(14)
        data = rng.standard_normal(30000) + 84.5
        result = three_stage(data, cfg, rng)
        assert result.stage_estimates[0] == 84.5
        assert result.clamped[0] is False
        assert abs(result.theta_hat - 84.5) < 0.2

    def test_preliminary_resolution_small_monte_carlo(self):
        cfg = EstimatorConfig(epsilon=1.0, n0=15000, bits=7, n1=500,
                              range_lo=0.0, range_hi=128.0)
        hits = 0
        reps = 200
        for r in range(reps):
            rng = np.random.default_rng(np.random.SeedSequence(303, spawn_key=(r,)))
            data = rng.standard_normal(16000) + 84.5
            result = three_stage(data, cfg, rng)
            hits += abs(result.stage_estimates[0] - 84.5) <= 1.0
        assert hits == reps

    def test_validation(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            three_stage(np.zeros(100), EstimatorConfig(epsilon=1.0, n0=90, n1=20), rng)
        with pytest.raises(ValueError):
            three_stage(np.zeros(100), EstimatorConfig(epsilon=1.0, n0=50, bits=0), rng)
        with pytest.raises(ValueError):
            three_stage(np.zeros(100), EstimatorConfig(
                epsilon=1.0, n0=50, n1=10, range_lo=2.0, range_hi=1.0), rng)


class TestPrivacyAudit:
    """Each sample is sanitized exactly once, by an epsilon-valid channel."""

    def test_one_stage_draw_count(self):
        rng = CountingRng(1)
        data = np.random.default_rng(2).standard_normal(500)
        one_stage(data, EstimatorConfig(epsilon=1.0), rng)
        assert rng.uniforms == 500

    def test_two_stage_draw_count(self):
        rng = CountingRng(3)
        data = np.random.default_rng(4).standard_normal(700)
        two_stage(data, EstimatorConfig(epsilon=1.0, n1=100), rng)
        assert rng.uniforms == 700

    def test_three_stage_draw_count(self):
        rng = CountingRng(5)
        n, n0, bits, n1 = 5000, 1000, 7, 300
        data = np.random.default_rng(6).standard_normal(n)
        three_stage(data, EstimatorConfig(epsilon=1.0, n0=n0, bits=bits, n1=n1,
                                          range_lo=-4.0, range_hi=4.0), rng)
        # bisection leftovers (n0 mod bits) are never queried
        assert rng.uniforms == bits * (n0 // bits) + (n - n0)

    @pytest.mark.parametrize("eps", [0.5, 1.0])
    def test_channel_is_epsilon_valid(self, eps):
        assert verify_ldp(rr_matrix(privacy_params(eps)), eps)


class TestRescaledEstimate:
    def test_unit_scale_matches_two_stage_exactly(self):
        cfg = EstimatorConfig(epsilon=1.0, theta0=0.3, n1=150)
        data = np.random.default_rng(21).standard_normal(3000) + 0.9
        a = two_stage(data, cfg, np.random.default_rng(22))
        b = rescaled_estimate(data, 1.0, cfg, np.random.default_rng(22))
        assert a == b

    def test_scale_equivariance_exact_for_power_of_two(self):
        cfg1 = EstimatorConfig(epsilon=1.0, theta0=0.5, n1=150)
        cfg2 = EstimatorConfig(epsilon=1.0, theta0=1.0, n1=150)
        data = np.random.default_rng(23).standard_normal(3000) + 0.8
        base = two_stage(data, cfg1, np.random.default_rng(24))
        scaled = rescaled_estimate(2.0 * data, 2.0, cfg2, np.random.default_rng(24))
        assert scaled.theta_hat == 2.0 * base.theta_hat
        assert scaled.stage_estimates == tuple(2.0 * s for s in base.stage_estimates)
        assert scaled.clamped == base.clamped

    def test_consistency_for_scaled_data(self):
        cfg = EstimatorConfig(epsilon=1.0, theta0=0.0, n1=800)
        rng = np.random.default_rng(25)
        data = 3.0 + 2.0 * rng.standard_normal(60000)
        result = rescaled_estimate(data, 2.0, cfg, rng)
        # sd of the estimate is about sqrt(4 * 7.4 / 6e4) = 0.022
        assert abs(result.theta_hat - 3.0) < 0.1

    def test_rejects_bad_sigma(self):
        cfg = EstimatorConfig(epsilon=1.0, n1=10)
        with pytest.raises(ValueError):
            rescaled_estimate(np.zeros(100), 0.0, cfg, np.random.default_rng(0))


class TestOptimalVariance:
    def test_unit_values(self):
        params = privacy_params(1.0)
        assert optimal_asymptotic_variance(params, 1.0) == pytest.approx(
            1.0 / sign_fisher_info(params), rel=1e-15)
        assert optimal_asymptotic_variance(params, 2.0) == pytest.approx(
            4.0 / sign_fisher_info(params), rel=1e-15)

    def test_limits(self):
        assert optimal_asymptotic_variance(privacy_params(0.0), 1.0) == math.inf
        assert optimal_asymptotic_variance(privacy_params(math.inf), 1.0) == pytest.approx(
            math.pi / 2, rel=1e-12)

    def test_rejects_bad_sigma(self):
        with pytest.raises(ValueError):
            optimal_asymptotic_variance(privacy_params(1.0), -2.0)
