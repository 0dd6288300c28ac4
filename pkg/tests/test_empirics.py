import math

import numpy as np
import pytest

from hcn_gauss import (
    campbell_mean,
    campbell_variance,
    convergence_diagnostic,
    dkw_epsilon,
    empirical_cdf,
    envelope_report,
    ks_distance_to_normal,
    preset_figure1,
    preset_single,
)
from hcn_gauss.simulate import Construction, SimConfig

# Frozen with mpmath: 2*pi*int_n^inf t/(1+t^4) dt = pi*(pi/2 - atan(n^2))
TAIL_A4 = {10.0: 0.0314148794011741012182083090,
           50.0: 0.00125663699441528045278382084,
           200.0: 7.85398163233823692302551675e-5}


class TestEmpiricalCdf:
    def test_counting(self):
        samples = np.array([-1.0, 0.0, 1.0])
        assert empirical_cdf(samples, 0.0) == pytest.approx(2.0 / 3.0)
        assert empirical_cdf(samples, -5.0) == 0.0
        assert empirical_cdf(samples, 5.0) == 1.0

    def test_median_of_odd_set(self):
        samples = np.arange(7.0)
        n = samples.size
        assert empirical_cdf(samples, np.median(samples)) == (n + 1) / (2 * n)

    def test_right_continuity_and_limits(self):
        samples = np.array([0.0, 1.0, 1.0, 2.0])
        xs = np.array([-0.1, 0.0, 0.999, 1.0, 1.5, 2.0])
        vals = empirical_cdf(samples, xs)
        assert np.all(np.diff(vals) >= 0.0)
        assert vals[0] == 0.0 and vals[-1] == 1.0
        assert empirical_cdf(samples, 1.0) == 0.75  # jump attained from the right

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            empirical_cdf(np.array([]), 0.0)


class TestKsDistance:
    def test_three_point_example(self):
        assert ks_distance_to_normal([-1.0, 0.0, 1.0]) == pytest.approx(
            0.174678079401876281918565879, rel=1e-12)

    def test_single_point(self):
        assert ks_distance_to_normal([0.0]) == 0.5

    def test_normal_draws_within_dkw(self):
        rng = np.random.default_rng(2024)
        z = rng.standard_normal(100_000)
        assert ks_distance_to_normal(z) < dkw_epsilon(0.01, z.size)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ks_distance_to_normal([])

    def test_order_invariant(self):
        rng = np.random.default_rng(3)
        z = rng.standard_normal(500)
        assert ks_distance_to_normal(z) == ks_distance_to_normal(np.sort(z)[::-1])


class TestDkw:
    def test_frozen_values(self):
        assert dkw_epsilon(0.01, 100_000) == pytest.approx(0.0051469978465839854, rel=1e-12)
        assert dkw_epsilon(0.01, 10_000) == pytest.approx(0.016276236307187293, rel=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            dkw_epsilon(0.0, 100)
        with pytest.raises(ValueError):
            dkw_epsilon(1.5, 100)
        with pytest.raises(ValueError):
            dkw_epsilon(0.01, 0)


class TestEnvelopeReport:
    def test_normal_samples_no_violations(self):
        rng = np.random.default_rng(7)
        z = rng.standard_normal(20_000)
        report = envelope_report(z, preset_figure1(10.0, 4.0), slack_level=0.01)
        assert report.envelope_violations == 0
        assert report.slack == pytest.approx(dkw_epsilon(0.01, z.size))
        assert report.bound_uniform == pytest.approx(report.xi * 0.4785, rel=1e-15)

    def test_shifted_samples_violate(self):
        rng = np.random.default_rng(8)
        z = rng.standard_normal(20_000) + 0.5
        report = envelope_report(z, preset_figure1(100.0, 4.0), slack_level=0.01)
        assert report.envelope_violations > 0

    def test_uniform_branch_check_at_zero(self):
        # at x=0 the allowance reduces to xi*0.4785 + slack
        rng = np.random.default_rng(9)
        z = rng.standard_normal(10_000)
        report = envelope_report(z, preset_figure1(10.0, 4.0))
        dev0 = abs(empirical_cdf(report.sorted_samples, 0.0) - 0.5)
        assert dev0 <= report.bound_uniform + report.slack


class TestConvergenceDiagnostic:
    def test_truncated_mean_closed_form(self):
        s = preset_single(1, 1, 4)
        cfg = SimConfig(truncation_radius=1.0, replications=50, seed=1,
                        construction=Construction.POISSON_FIELD)
        rows = convergence_diagnostic(s, [10.0, 50.0, 200.0], cfg)
        full = math.pi ** 2 / 2.0
        for row in rows:
            expect = full - TAIL_A4[row.radius]
            assert row.truncated_mean == pytest.approx(expect, rel=1e-10)
            assert row.truncated_gap == pytest.approx(TAIL_A4[row.radius], rel=1e-9)

    def test_truncated_mean_converges_to_campbell(self):
        s = preset_figure1(1.0, 4.0)
        cfg = SimConfig(truncation_radius=1.0, replications=50, seed=1)
        rows = convergence_diagnostic(s, [50.0, 2000.0], cfg)
        assert rows[-1].truncated_mean == pytest.approx(campbell_mean(s), rel=1e-6)
        gaps = [r.truncated_gap for r in rows]
        assert gaps[0] > gaps[1]

    def test_fixed_count_bias_shrinks(self):
        s = preset_single(1, 1, 4)
        reps = 20_000
        cfg = SimConfig(truncation_radius=1.0, replications=reps, seed=42,
                        construction=Construction.FIXED_COUNT)
        rows = convergence_diagnostic(s, [5.0, 20.0, 100.0], cfg)
        se = math.sqrt(campbell_variance(s) / reps)
        # gaps shrink monotonically up to Monte-Carlo noise, ending in noise
        for earlier, later in zip(rows, rows[1:]):
            assert later.mean_gap <= earlier.mean_gap + 3.0 * se
        assert rows[0].mean_gap > rows[-1].mean_gap
        assert rows[-1].mean_gap < 4.0 * se
        assert rows[-1].variance_gap < 0.15 * campbell_variance(s)

    def test_poisson_field_unbiased_for_truncated_mean(self):
        s = preset_single(1, 1, 4)
        reps = 20_000
        cfg = SimConfig(truncation_radius=1.0, replications=reps, seed=11,
                        construction=Construction.POISSON_FIELD)
        rows = convergence_diagnostic(s, [5.0, 20.0], cfg)
        se = math.sqrt(campbell_variance(s) / reps)
        for row in rows:
            assert abs(row.sample_mean - row.truncated_mean) < 4.0 * se

    def test_radii_must_ascend(self):
        s = preset_single(1, 1, 4)
        cfg = SimConfig(truncation_radius=1.0, replications=10, seed=0)
        with pytest.raises(ValueError):
            convergence_diagnostic(s, [10.0, 5.0], cfg)
