"""Monte-Carlo generation of interference realizations.

Two sampling constructions are provided: a true truncated Poisson field
(random count per tier) and a fixed-count construction drawing exactly
ceil(measure) i.i.d. distances per tier.  Replications are reproducible by
construction: every (replication, tier) pair gets its own substream derived
from the master seed, so results do not depend on worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Union

import numpy as np

from . import _kernels
from .model import (
    DegenerateScenarioError,
    Scenario,
    TierConfig,
    fading_sample,
    intensity_inverse_cdf,
    path_loss_eval,
    radial_measure,
    require_valid,
)
from .scenario_io import fingerprint


class Construction(Enum):
    POISSON_FIELD = "poisson"
    FIXED_COUNT = "fixed"


@dataclass(frozen=True)
class SimConfig:
    truncation_radius: float
    replications: int
    seed: int
    construction: Construction = Construction.POISSON_FIELD

    def __post_init__(self):
        if not self.truncation_radius > 0.0:
            raise ValueError("truncation radius must be positive")
        if not self.replications >= 1:
            raise ValueError("need at least one replication")


@dataclass(frozen=True)
class SampleSet:
    """Raw interference realizations plus their provenance."""

    values: np.ndarray
    fingerprint: str
    config: SimConfig

    def __post_init__(self):
        object.__setattr__(self, "values",
                           np.asarray(self.values, dtype=float))


def sample_distances(tier: TierConfig, radius: float, rng: np.random.Generator,
                     construction: Construction = Construction.POISSON_FIELD
                     ) -> np.ndarray:
    """Draw the distances of one tier's base stations within ``radius``.

    The count is Poisson(measure) for the Poisson field and exactly
    ceil(measure) for the fixed-count construction; distances are i.i.d.
    with density lam*mu(t)/measure on [0, radius] via exact inverse-CDF.
    """
    if not radius > 0.0:
        raise ValueError("radius must be positive")
    measure = radial_measure(tier.intensity, tier.lam, radius)
    if measure <= 0.0:
        return np.empty(0)
    if construction is Construction.POISSON_FIELD:
        count = int(rng.poisson(measure))
    else:
        count = int(math.ceil(measure))
    if count == 0:
        return np.empty(0)
    return intensity_inverse_cdf(tier.intensity, radius, rng.random(count))


def interference_from_points(power: float, pathloss, distances, gains) -> float:
    """Sum power * gain * G(distance) over explicit points (test hook)."""
    distances = np.asarray(distances, dtype=float)
    gains = np.asarray(gains, dtype=float)
    if distances.size == 0:
        return 0.0
    return float(power * np.sum(gains * path_loss_eval(pathloss, distances)))


def _tier_interference(tier: TierConfig, radius: float,
                       construction: Construction,
                       rng: np.random.Generator) -> float:
    t = sample_distances(tier, radius, rng, construction)
    if t.size == 0:
        return 0.0
    h = fading_sample(tier.fading, rng, size=t.size)
    return interference_from_points(tier.power, tier.pathloss, t, h)


def interference_realization(s: Scenario, cfg: SimConfig,
                             rng: np.random.Generator) -> float:
    """One draw of the aggregate interference under the given construction."""
    require_valid(s)
    return sum(_tier_interference(t, cfg.truncation_radius, cfg.construction, rng)
               for t in s.tiers)


def _substream(seed: int, rep: int, tier: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=(np.uint64(seed), rep, tier))
    return np.random.Generator(np.random.PCG64(ss))


def _monte_carlo_numpy(s: Scenario, cfg: SimConfig) -> np.ndarray:
    values = np.empty(cfg.replications)
    for r in range(cfg.replications):
        acc = 0.0
        for k, tier in enumerate(s.tiers):
            acc += _tier_interference(tier, cfg.truncation_radius,
                                      cfg.construction, _substream(cfg.seed, r, k))
        values[r] = acc
    return values


def monte_carlo(s: Scenario, cfg: SimConfig) -> SampleSet:
    """Generate ``cfg.replications`` i.i.d. interference realizations.

    Identical (scenario, config) input gives bit-identical output on a given
    backend regardless of the worker-thread count.
    """
    require_valid(s)
    construction = (_kernels.CONSTRUCT_POISSON
                    if cfg.construction is Construction.POISSON_FIELD
                    else _kernels.CONSTRUCT_FIXED)
    if _kernels.active_backend() == "numba":
        values = _kernels.run_kernel(s, cfg.truncation_radius, cfg.replications,
                                     cfg.seed, construction)
    else:
        values = _monte_carlo_numpy(s, cfg)
    return SampleSet(values=values, fingerprint=fingerprint(s, cfg.seed), config=cfg)


def standardize(samples: Union[SampleSet, np.ndarray], s: Scenario,
                mode: str = "analytic") -> np.ndarray:
    """Center and normalize realizations.

    "analytic" subtracts the exact mean and divides by the exact standard
    deviation of the untruncated interference; "empirical" uses the sample
    mean and sample (ddof=1) deviation.
    """
    values = samples.values if isinstance(samples, SampleSet) else np.asarray(samples, float)
    if values.size == 0:
        raise ValueError("no samples to standardize")
    if mode == "analytic":
        from .analytics import campbell_mean, campbell_variance

        var = campbell_variance(s)
        if var <= 0.0:
            raise DegenerateScenarioError("zero variance; cannot standardize")
        return (values - campbell_mean(s)) / math.sqrt(var)
    if mode == "empirical":
        mu = values.mean()
        sd = values.std(ddof=1) if values.size > 1 else 0.0
        if sd <= 0.0:
            raise DegenerateScenarioError("constant samples; cannot standardize")
        return (values - mu) / sd
    raise ValueError(f"unknown standardization mode {mode!r}")


def truncation_bias_bound(s: Scenario, radius: float) -> float:
    """Mean interference ignored beyond the truncation radius:
    sum_k lam_k P_k m1_k * integral_radius^inf G_k mu_k dt."""
    from .analytics import tier_integral
    from .model import fading_moments

    total = 0.0
    for tier in s.tiers:
        if tier.lam == 0.0:
            continue
        m1, _, _ = fading_moments(tier.fading)
        tail = tier_integral(tier, 1) - tier_integral(tier, 1, upper=radius)
        total += tier.lam * tier.power * m1 * max(tail, 0.0)
    return total


def with_radius(cfg: SimConfig, radius: float) -> SimConfig:
    return replace(cfg, truncation_radius=radius)
