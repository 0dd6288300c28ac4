"""Empirical CDFs, Kolmogorov-Smirnov distance and envelope checking.

The envelope check compares the empirical CDF of standardized interference
samples against the band Psi(x) -/+ xi*c(x), widened by a finite-sample
Dvoretzky-Kiefer-Wolfowitz allowance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytics import (
    BERRY_ESSEEN_UNIFORM,
    berry_esseen_factor,
    campbell_mean,
    campbell_variance,
    scaling_coefficient,
    std_normal_cdf,
    tier_integral,
)
from .model import Scenario, fading_moments
from .simulate import SimConfig, monte_carlo, with_radius


def empirical_cdf(samples: np.ndarray, x) -> float | np.ndarray:
    """Right-continuous empirical CDF of ascending ``samples`` at ``x``."""
    samples = np.asarray(samples)
    if samples.size == 0:
        raise ValueError("empirical CDF of an empty sample is undefined")
    out = np.searchsorted(samples, x, side="right") / samples.size
    return float(out) if np.ndim(out) == 0 else out


def ks_distance_to_normal(samples) -> float:
    """sup_x |F_hat(x) - Psi(x)|, evaluated exactly at the jump points."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("KS distance of an empty sample is undefined")
    psi = std_normal_cdf(x)
    i = np.arange(1, n + 1)
    return float(np.max(np.maximum(i / n - psi, psi - (i - 1) / n)))


def dkw_epsilon(slack_level: float, n: int) -> float:
    """DKW bound: sup deviation exceeded with probability <= slack_level."""
    if not 0.0 < slack_level < 1.0:
        raise ValueError("slack level must be in (0, 1)")
    if n < 1:
        raise ValueError("need at least one sample")
    return math.sqrt(math.log(2.0 / slack_level) / (2.0 * n))


@dataclass(frozen=True)
class EmpiricalReport:
    """Envelope verdict for one standardized sample set."""

    sorted_samples: np.ndarray
    ks_distance: float
    xi: float
    bound_uniform: float
    envelope_violations: int
    slack: float
    slack_level: float


def envelope_report(samples, s: Scenario, slack_level: float = 0.01) -> EmpiricalReport:
    """Check |F_hat - Psi| <= xi*c(x) + DKW slack at every sample point.

    ``samples`` must already be standardized in analytic mode.  Violations
    should be zero up to the slack for any correctly standardized sample.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("cannot check an empty sample")
    bound = scaling_coefficient(s)
    slack = dkw_epsilon(slack_level, n)
    psi = std_normal_cdf(x)
    allowance = bound.xi * berry_esseen_factor(x) + slack
    deviation = np.abs(np.arange(1, n + 1) / n - psi)
    return EmpiricalReport(
        sorted_samples=x,
        ks_distance=ks_distance_to_normal(x),
        xi=bound.xi,
        bound_uniform=bound.xi * BERRY_ESSEEN_UNIFORM,
        envelope_violations=int(np.sum(deviation > allowance)),
        slack=slack,
        slack_level=slack_level,
    )


@dataclass(frozen=True)
class ConvergenceRow:
    radius: float
    sample_mean: float
    sample_variance: float
    truncated_mean: float
    truncated_gap: float
    mean_gap: float
    variance_gap: float


def convergence_diagnostic(s: Scenario, radii, cfg: SimConfig) -> list[ConvergenceRow]:
    """Simulate at increasing truncation radii and tabulate the convergence
    of the sample mean/variance toward the exact untruncated values."""
    radii = list(radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly ascending")
    full_mean = campbell_mean(s)
    full_var = campbell_variance(s)
    rows = []
    for radius in radii:
        trunc_mean = 0.0
        for tier in s.tiers:
            if tier.lam == 0.0:
                continue
            m1, _, _ = fading_moments(tier.fading)
            trunc_mean += tier.lam * tier.power * m1 * tier_integral(tier, 1, upper=radius)
        values = monte_carlo(s, with_radius(cfg, radius)).values
        rows.append(ConvergenceRow(
            radius=float(radius),
            sample_mean=float(values.mean()),
            sample_variance=float(values.var(ddof=1)) if values.size > 1 else 0.0,
            truncated_mean=trunc_mean,
            truncated_gap=abs(full_mean - trunc_mean),
            mean_gap=abs(float(values.mean()) - full_mean),
            variance_gap=abs(float(values.var(ddof=1)) - full_var) if values.size > 1 else full_var,
        ))
    return rows
