"""Shared helpers: randomized-but-valid scenario generation."""

from __future__ import annotations

import numpy as np

from hcn_gauss import (
    Deterministic,
    Homogeneous2D,
    NakagamiPower,
    PathLossFamily,
    PathLossModel,
    PiecewiseTable,
    PowerRadial,
    RayleighPower,
    RicianPower,
    Scenario,
    TierConfig,
)

_FAMILIES = list(PathLossFamily)


def _log_uniform(rng, lo, hi):
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def random_fading(rng):
    kind = rng.integers(0, 4)
    if kind == 0:
        return Deterministic(_log_uniform(rng, 0.1, 10.0))
    if kind == 1:
        return RayleighPower(_log_uniform(rng, 0.1, 10.0))
    if kind == 2:
        return NakagamiPower(float(rng.uniform(0.5, 8.0)), _log_uniform(rng, 0.1, 10.0))
    return RicianPower(float(rng.uniform(0.0, 10.0)), _log_uniform(rng, 0.1, 10.0))


def random_intensity(rng, alpha, homogeneous_only=False):
    if homogeneous_only:
        return Homogeneous2D()
    kind = rng.random()
    if kind < 0.5:
        return Homogeneous2D()
    if kind < 0.85:
        return PowerRadial(_log_uniform(rng, 0.1, 10.0),
                           float(alpha * rng.uniform(0.15, 0.9)))
    n_knots = int(rng.integers(2, 6))
    ts = np.sort(rng.uniform(0.0, 20.0, size=n_knots))
    ts[0] = 0.0
    mus = rng.uniform(0.0, 5.0, size=n_knots)
    if rng.random() < 0.5:
        return PiecewiseTable(tuple(zip(ts, mus)),
                              tail_coeff=_log_uniform(rng, 0.1, 5.0),
                              tail_exponent=float(alpha * rng.uniform(0.15, 0.9)))
    return PiecewiseTable(tuple(zip(ts, mus)))


def random_tier(rng, homogeneous_only=False):
    alpha = float(rng.uniform(2.1, 8.0))
    return TierConfig(
        power=_log_uniform(rng, 0.01, 100.0),
        lam=_log_uniform(rng, 0.01, 100.0),
        intensity=random_intensity(rng, alpha, homogeneous_only),
        pathloss=PathLossModel(_FAMILIES[rng.integers(0, 3)], alpha),
        fading=random_fading(rng),
    )


def random_scenario(rng, homogeneous_only=False, max_tiers=5) -> Scenario:
    k = int(rng.integers(1, max_tiers + 1))
    return Scenario(tuple(random_tier(rng, homogeneous_only) for _ in range(k)))
