"""Acceptance suite: every release criterion, one pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the verdict lines.
The Monte-Carlo criteria share fixed-seed sample sets through module-scoped
fixtures; the whole module takes a few minutes on two cores.
"""

import contextlib
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import random_scenario

from hcn_gauss import (
    Deterministic,
    Homogeneous2D,
    PathLossFamily,
    PathLossModel,
    Scenario,
    TierConfig,
    campbell_mean,
    campbell_variance,
    density_scaling_certificate,
    laplace_transform,
    preset_figure1,
    preset_single,
    scaling_coefficient,
    scaling_coefficient_homogeneous,
    scaling_lower_bound,
    tier_integral,
)
from hcn_gauss.empirics import envelope_report, ks_distance_to_normal
from hcn_gauss.simulate import SimConfig, monte_carlo, standardize


@contextlib.contextmanager
def verdict(cid, description):
    try:
        yield
    except BaseException:
        print(f"[criterion {cid:>2}] FAIL  {description}")
        raise
    print(f"[criterion {cid:>2}] PASS  {description}")


@pytest.fixture(scope="module")
def warm_kernel():
    monte_carlo(preset_single(1, 1, 4), SimConfig(5.0, 4, 1))


@pytest.fixture(scope="module")
def timings():
    return {}


@pytest.fixture(scope="module")
def fig1_k1_run(warm_kernel, timings):
    s = preset_figure1(1.0, 4.0)
    t0 = time.perf_counter()
    out = monte_carlo(s, SimConfig(200.0, 10_000, 314159))
    timings["fig1_k1"] = time.perf_counter() - t0
    return s, out


@pytest.fixture(scope="module")
def single_run(warm_kernel, timings):
    s = preset_single(1, 1, 4)
    t0 = time.perf_counter()
    out = monte_carlo(s, SimConfig(200.0, 10_000, 271828))
    timings["single"] = time.perf_counter() - t0
    return s, out


@pytest.fixture(scope="module")
def fig1_k10_run(warm_kernel):
    s = preset_figure1(10.0, 4.0)
    return s, monte_carlo(s, SimConfig(40.0, 10_000, 112358))


@pytest.fixture(scope="module")
def fig1_k100_run(warm_kernel):
    s = preset_figure1(100.0, 4.0)
    return s, monte_carlo(s, SimConfig(40.0, 10_000, 141421))


def test_criterion_1_closed_form_integrals():
    with verdict(1, "tier integrals match pi^2/2, pi^2/4, 3pi^2/16 at 1e-9 in < 1 s"):
        tier = preset_single(1, 1, 4).tiers[0]
        t0 = time.perf_counter()
        values = [tier_integral(tier, m) for m in (1, 2, 3)]
        elapsed = time.perf_counter() - t0
        expected = [math.pi ** 2 / 2, math.pi ** 2 / 4, 3 * math.pi ** 2 / 16]
        for got, want in zip(values, expected):
            assert got == pytest.approx(want, rel=1e-9)
        assert elapsed < 1.0


def test_criterion_2_single_tier_coefficient():
    with verdict(2, "xi*sqrt(K*lam) matches the independent closed-form assembly at 1e-6"):
        # assembled from first principles: radial integrals 3*pi/32 and pi/8,
        # exponential power moments (1, 2, 6), prefactor 1/sqrt(2*pi*K*lam)
        oracle = (1.0 / math.sqrt(2.0 * math.pi)) * (6.0 / 2.0 ** 1.5) \
            * ((3.0 * math.pi / 32.0) / (math.pi / 8.0) ** 1.5)
        for lam, k_tiers in ((1.0, 1), (0.5, 3), (4.0, 2)):
            tier = preset_single(lam, 1.0, 4.0).tiers[0]
            s = Scenario((tier,) * k_tiers)
            xi = scaling_coefficient(s).xi
            assert xi * math.sqrt(k_tiers * lam) == pytest.approx(oracle, rel=1e-6)


def test_criterion_3_homogeneous_specialization():
    with verdict(3, "general and homogeneous-specialized xi agree at 1e-12 "
                    "on 100 randomized scenarios"):
        rng = np.random.default_rng(833)
        for _ in range(100):
            s = random_scenario(rng, homogeneous_only=True)
            assert scaling_coefficient_homogeneous(s) == pytest.approx(
                scaling_coefficient(s).xi, rel=1e-12)


def test_criterion_4_density_scaling():
    with verdict(4, "xi(kappa)*sqrt(kappa) constant at 1e-12 for kappa in {1,4,25,100}"):
        cert = density_scaling_certificate(preset_figure1(1.0, 4.0),
                                           [1.0, 4.0, 25.0, 100.0])
        assert cert.max_relative_spread < 1e-12


def test_criterion_5_lower_bound():
    with verdict(5, "lower bound <= xi on 1000 randomized scenarios; "
                    "equality for single-tier deterministic fading"):
        rng = np.random.default_rng(577)
        for _ in range(1000):
            s = random_scenario(rng)
            xi = scaling_coefficient(s).xi
            assert scaling_lower_bound(s) <= xi * (1.0 + 1e-10)
        det = Scenario((TierConfig(
            1.0, 1.0, Homogeneous2D(),
            PathLossModel(PathLossFamily.INVERSE_ONE_PLUS_POWER, 4.0),
            Deterministic(1.0)),))
        xi = scaling_coefficient(det).xi
        assert xi == pytest.approx(3.0 / (2.0 * math.pi), rel=1e-9)
        assert scaling_lower_bound(det) == pytest.approx(xi, rel=1e-9)


def _moment_check(s, values):
    mean_se = values.std(ddof=1) / math.sqrt(values.size)
    assert abs(values.mean() - campbell_mean(s)) < 3.0 * mean_se
    var = values.var(ddof=1)
    m4 = np.mean((values - values.mean()) ** 4)
    var_se = math.sqrt(max(m4 - var * var, 0.0) / values.size)
    assert abs(var - campbell_variance(s)) < 3.0 * var_se


def test_criterion_6_campbell_agreement(fig1_k1_run, single_run, timings):
    with verdict(6, "10^4-replication mean/variance within 3 standard errors "
                    "at radius 200 in < 60 s"):
        for s, out in (fig1_k1_run, single_run):
            _moment_check(s, out.values)
        assert timings["fig1_k1"] + timings["single"] < 60.0


def test_criterion_7_envelope_soundness(fig1_k1_run, fig1_k10_run, fig1_k100_run):
    with verdict(7, "zero envelope violations at 1% DKW slack for kappa in {1,10,100}"):
        for s, out in (fig1_k1_run, fig1_k10_run, fig1_k100_run):
            report = envelope_report(standardize(out, s), s, slack_level=0.01)
            assert report.envelope_violations == 0


def test_criterion_8_ks_tightens_with_density(fig1_k1_run, fig1_k10_run, fig1_k100_run):
    with verdict(8, "KS distance decreases over kappa in {1,10,100}; "
                    "kappa=100 below the uniform bound and below 0.05"):
        ks = []
        for s, out in (fig1_k1_run, fig1_k10_run, fig1_k100_run):
            ks.append(ks_distance_to_normal(standardize(out, s)))
        assert ks[0] > ks[1] > ks[2]
        uniform_bound = scaling_coefficient(fig1_k100_run[0]).xi * 0.4785
        assert ks[2] < uniform_bound
        assert ks[2] < 0.05


def test_criterion_9_laplace_cross_check(warm_kernel):
    with verdict(9, "Monte-Carlo mean of exp(-s I) within 3 standard errors of "
                    "L(s) at s in {0.1, 1, 10} with 10^5 replications"):
        s = preset_single(1, 1, 4)
        out = monte_carlo(s, SimConfig(60.0, 100_000, 662607))
        svals = [0.1, 1.0, 10.0]
        lvals = laplace_transform(s, svals)
        for sv, lv in zip(svals, lvals):
            transformed = np.exp(-sv * out.values)
            se = transformed.std(ddof=1) / math.sqrt(transformed.size)
            assert abs(transformed.mean() - lv) <= 3.0 * se


def test_criterion_10_worker_determinism(tmp_path):
    with verdict(10, "simulate output byte-identical across 1, 4 and 8 workers"):
        bodies = []
        for workers in (1, 4, 8):
            outdir = tmp_path / f"w{workers}"
            result = subprocess.run(
                [sys.executable, "-m", "hcn_gauss.cli", "simulate",
                 "--preset", "single(1,1,4)", "--radius", "30",
                 "--replications", "1000", "--seed", "77",
                 "--out", str(outdir)],
                env={"PATH": "/usr/bin:/bin", "HCN_GAUSS_THREADS": str(workers)},
                capture_output=True, text=True, timeout=600)
            assert result.returncode == 0, result.stderr
            bodies.append((outdir / "samples.csv").read_bytes())
        assert bodies[0] == bodies[1] == bodies[2]
