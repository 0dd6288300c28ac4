"""Domain model for K-tier downlink interference networks.

A network is an ordered list of tiers.  Each tier carries a transmit power,
a base-station intensity parameter ``lam`` scaling a radial intensity
``mu(t)`` (expected BS count per unit distance from the test point), a
bounded path-loss function ``G(t)`` and a fading power-gain distribution.
Everything is expressed in radial coordinates: planar geometry is already
folded into the radial intensity families.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np
from scipy import integrate, stats


class ModelError(ValueError):
    """Base class for model-level errors."""


class FadingParameterError(ModelError):
    """Fading distribution parameters outside the supported range."""


class ScenarioValidationError(ModelError):
    """A scenario violates the model assumptions."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("; ".join(v.message for v in report.violations))


class DivergenceError(ModelError):
    """A semi-infinite integral diverges (growth assumptions violated)."""


class DegenerateScenarioError(ModelError):
    """The interference distribution is degenerate (zero variance)."""


# ---------------------------------------------------------------------------
# Path loss
# ---------------------------------------------------------------------------

class PathLossFamily(Enum):
    INVERSE_ONE_PLUS_POWER = "inverse_one_plus_power"   # 1 / (1 + t^alpha)
    MIN_ONE_INVERSE_POWER = "min_one_inverse_power"     # min(1, t^-alpha)
    SHIFTED_INVERSE_POWER = "shifted_inverse_power"     # (1 + t)^-alpha


@dataclass(frozen=True)
class PathLossModel:
    """Bounded, monotone non-increasing path loss with exponent ``alpha``.

    All three families satisfy G(0) = 1 and G(t) = O(t^-alpha) as t -> inf.
    """

    family: PathLossFamily
    alpha: float


def path_loss_eval(model: PathLossModel, t):
    """Evaluate G(t) for scalar or array ``t >= 0``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("path loss is undefined for negative distance")
    a = model.alpha
    if model.family is PathLossFamily.INVERSE_ONE_PLUS_POWER:
        g = 1.0 / (1.0 + t ** a)
    elif model.family is PathLossFamily.MIN_ONE_INVERSE_POWER:
        g = np.where(t <= 1.0, 1.0, np.where(t > 1.0, t, 2.0) ** -a)
    elif model.family is PathLossFamily.SHIFTED_INVERSE_POWER:
        g = (1.0 + t) ** -a
    else:  # pragma: no cover - exhaustive enum
        raise ValueError(f"unknown path loss family {model.family!r}")
    return float(g) if g.ndim == 0 else g


# ---------------------------------------------------------------------------
# Fading power gains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Deterministic:
    """Constant power gain (no fading)."""

    gain: float


@dataclass(frozen=True)
class RayleighPower:
    """Rayleigh-faded amplitude, i.e. exponential power gain."""

    mean_power: float = 1.0


@dataclass(frozen=True)
class NakagamiPower:
    """Nakagami-m amplitude, i.e. Gamma(shape=m, mean=mean_power) power gain."""

    shape: float
    mean_power: float = 1.0


@dataclass(frozen=True)
class RicianPower:
    """Rician amplitude with Rice factor ``k_factor``; power gain is a scaled
    noncentral chi-square with 2 degrees of freedom."""

    k_factor: float
    mean_power: float = 1.0


FadingModel = Union[Deterministic, RayleighPower, NakagamiPower, RicianPower]


def _check_fading(model: FadingModel) -> None:
    if isinstance(model, Deterministic):
        if not model.gain > 0.0 or not math.isfinite(model.gain):
            raise FadingParameterError("deterministic gain must be positive")
    elif isinstance(model, RayleighPower):
        if not model.mean_power > 0.0 or not math.isfinite(model.mean_power):
            raise FadingParameterError("mean power must be positive")
    elif isinstance(model, NakagamiPower):
        if not model.mean_power > 0.0 or not math.isfinite(model.mean_power):
            raise FadingParameterError("mean power must be positive")
        if not model.shape >= 0.5 or not math.isfinite(model.shape):
            raise FadingParameterError("Nakagami shape must be >= 0.5")
    elif isinstance(model, RicianPower):
        if not model.mean_power > 0.0 or not math.isfinite(model.mean_power):
            raise FadingParameterError("mean power must be positive")
        if not model.k_factor >= 0.0 or not math.isfinite(model.k_factor):
            raise FadingParameterError("Rice factor must be >= 0")
    else:
        raise FadingParameterError(f"unknown fading model {model!r}")


def _rician_ncx2(model: RicianPower):
    """The power gain as a frozen scipy distribution: scale * ncx2(2, 2K)."""
    scale = model.mean_power / (2.0 * (model.k_factor + 1.0))
    return stats.ncx2(df=2, nc=2.0 * model.k_factor, scale=scale)


@functools.lru_cache(maxsize=1024)
def fading_moments(model: FadingModel) -> tuple[float, float, float]:
    """First three moments of the power gain.

    Closed forms for the deterministic, Rayleigh and Nakagami families.  The
    Rician family is integrated numerically against its density (relative
    error well below 1e-10).
    """
    _check_fading(model)
    if isinstance(model, Deterministic):
        h = model.gain
        return h, h * h, h * h * h
    if isinstance(model, RayleighPower):
        b = model.mean_power
        return b, 2.0 * b * b, 6.0 * b ** 3
    if isinstance(model, NakagamiPower):
        m, b = model.shape, model.mean_power
        return b, b * b * (m + 1.0) / m, b ** 3 * (m + 1.0) * (m + 2.0) / (m * m)
    dist = _rician_ncx2(model)
    hi = float(dist.ppf(1.0 - 1e-15))
    out = []
    for k in (1, 2, 3):
        val, _ = integrate.quad(lambda h, k=k: h ** k * dist.pdf(h), 0.0, hi,
                                epsabs=0.0, epsrel=1e-12, limit=200)
        out.append(val)
    return out[0], out[1], out[2]


def fading_sample(model: FadingModel, rng: np.random.Generator, size=None):
    """Draw power gains; scalar when ``size`` is None, else an array."""
    _check_fading(model)
    if isinstance(model, Deterministic):
        if size is None:
            return model.gain
        return np.full(size, model.gain)
    if isinstance(model, RayleighPower):
        out = rng.exponential(model.mean_power, size=size)
    elif isinstance(model, NakagamiPower):
        out = rng.gamma(model.shape, model.mean_power / model.shape, size=size)
    else:
        k = model.k_factor
        scale = model.mean_power / (2.0 * (k + 1.0))
        nu = math.sqrt(2.0 * k)
        z1 = rng.normal(nu, 1.0, size=size)
        z2 = rng.normal(0.0, 1.0, size=size)
        out = scale * (z1 * z1 + z2 * z2)
    return float(out) if size is None else out


# ---------------------------------------------------------------------------
# Radial intensities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Homogeneous2D:
    """Planar homogeneous process seen from the test point: mu(t) = 2*pi*t."""


@dataclass(frozen=True)
class PowerRadial:
    """mu(t) = coeff * t^(exponent - 1), t >= 0."""

    coeff: float
    exponent: float


@dataclass(frozen=True)
class PiecewiseTable:
    """mu given at knots (t_i, mu_i), linear between, optional power tail.

    Outside [first knot, last knot] the density is zero, except that a
    declared tail extends the table as tail_coeff * t^(tail_exponent - 1)
    beyond the last knot.
    """

    knots: tuple[tuple[float, float], ...]
    tail_coeff: float | None = None
    tail_exponent: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "knots",
                           tuple((float(t), float(m)) for t, m in self.knots))


RadialIntensity = Union[Homogeneous2D, PowerRadial, PiecewiseTable]


def radial_density(intensity: RadialIntensity, t):
    """Evaluate mu(t) for scalar or array ``t >= 0`` (unit intensity scale)."""
    t = np.asarray(t, dtype=float)
    if isinstance(intensity, Homogeneous2D):
        out = 2.0 * math.pi * t
    elif isinstance(intensity, PowerRadial):
        p = intensity.exponent
        if p == 1.0:
            out = np.full_like(t, intensity.coeff)
        else:
            out = intensity.coeff * t ** (p - 1.0)
    else:
        ts = np.array([k[0] for k in intensity.knots])
        mus = np.array([k[1] for k in intensity.knots])
        out = np.interp(t, ts, mus, left=0.0, right=0.0)
        if intensity.tail_coeff is not None:
            tail = intensity.tail_coeff * np.maximum(t, ts[-1]) ** (intensity.tail_exponent - 1.0)
            out = np.where(t > ts[-1], tail, out)
    return float(out) if out.ndim == 0 else out


def _table_cumulative(intensity: PiecewiseTable) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Knot abscissae, densities and the exact cumulative measure at knots."""
    ts = np.array([k[0] for k in intensity.knots])
    mus = np.array([k[1] for k in intensity.knots])
    seg = np.diff(ts) * (mus[:-1] + mus[1:]) / 2.0  # trapezoid, exact for linear mu
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    return ts, mus, cum


def radial_measure(intensity: RadialIntensity, lam: float, n: float) -> float:
    """Expected BS count within radius ``n``: lam * integral_0^n mu(t) dt."""
    if n < 0.0:
        raise ValueError("radius must be non-negative")
    if lam == 0.0 or n == 0.0:
        return 0.0
    if isinstance(intensity, Homogeneous2D):
        return lam * math.pi * n * n
    if isinstance(intensity, PowerRadial):
        return lam * intensity.coeff * n ** intensity.exponent / intensity.exponent
    ts, mus, cum = _table_cumulative(intensity)
    if n <= ts[0]:
        return 0.0
    if n >= ts[-1]:
        total = cum[-1]
        if intensity.tail_coeff is not None and n > ts[-1]:
            p = intensity.tail_exponent
            total += intensity.tail_coeff * (n ** p - ts[-1] ** p) / p
        return lam * float(total)
    i = int(np.searchsorted(ts, n, side="right")) - 1
    d = n - ts[i]
    mu_n = mus[i] + (mus[i + 1] - mus[i]) / (ts[i + 1] - ts[i]) * d
    return lam * float(cum[i] + d * (mus[i] + mu_n) / 2.0)


def intensity_inverse_cdf(intensity: RadialIntensity, radius: float,
                          u: np.ndarray) -> np.ndarray:
    """Map uniforms on [0, 1) to distances with density mu(t)/M on [0, radius].

    Exact inversion: closed form for the power families, per-segment
    quadratic solve for tables.
    """
    u = np.asarray(u, dtype=float)
    if isinstance(intensity, Homogeneous2D):
        return radius * np.sqrt(u)
    if isinstance(intensity, PowerRadial):
        return radius * u ** (1.0 / intensity.exponent)
    ts, mus, cum = _table_cumulative(intensity)
    # Clip the table to [0, radius] and append the declared tail if reached.
    total = radial_measure(intensity, 1.0, radius)
    if total <= 0.0:
        raise ValueError("intensity has zero mass within the radius")
    target = u * total
    out = np.empty_like(target)
    in_tail = np.zeros(target.shape, dtype=bool)
    if radius > ts[-1] and intensity.tail_coeff is not None:
        in_tail = target > cum[-1]
        p = intensity.tail_exponent
        out[in_tail] = (ts[-1] ** p
                        + p * (target[in_tail] - cum[-1]) / intensity.tail_coeff) ** (1.0 / p)
    body = ~in_tail
    tb = np.minimum(target[body], cum[-1])
    idx = np.clip(np.searchsorted(cum, tb, side="right") - 1, 0, len(ts) - 2)
    t0 = ts[idx]
    mu0 = mus[idx]
    slope = (mus[idx + 1] - mus[idx]) / (ts[idx + 1] - ts[idx])
    y = tb - cum[idx]
    disc = np.sqrt(np.maximum(mu0 * mu0 + 2.0 * slope * y, 0.0))
    denom = mu0 + disc
    d = np.where(denom > 0.0, 2.0 * y / np.where(denom > 0.0, denom, 1.0), 0.0)
    out[body] = t0 + d
    return np.minimum(out, radius)


# ---------------------------------------------------------------------------
# Tiers and scenarios
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TierConfig:
    power: float
    lam: float
    intensity: RadialIntensity
    pathloss: PathLossModel
    fading: FadingModel


@dataclass(frozen=True)
class Scenario:
    tiers: tuple[TierConfig, ...]

    def __post_init__(self):
        object.__setattr__(self, "tiers", tuple(self.tiers))


def intensity_growth_exponent(intensity: RadialIntensity) -> float:
    """p such that mu(t) = O(t^(p-1)) at infinity; 0 for finite support."""
    if isinstance(intensity, Homogeneous2D):
        return 2.0
    if isinstance(intensity, PowerRadial):
        return intensity.exponent
    if intensity.tail_coeff is not None and intensity.tail_coeff > 0.0:
        return float(intensity.tail_exponent)
    return 0.0


@dataclass(frozen=True)
class Violation:
    tier: int | None
    assumption: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def _validate_tier(k: int, tier: TierConfig) -> list[Violation]:
    out = []

    def bad(assumption, msg):
        out.append(Violation(k, assumption, f"tier {k}: {msg}"))

    if not (math.isfinite(tier.power) and tier.power > 0.0):
        bad("power > 0", f"transmit power must be positive, got {tier.power}")
    if not (math.isfinite(tier.lam) and tier.lam >= 0.0):
        bad("lambda >= 0", f"intensity parameter must be >= 0, got {tier.lam}")

    a = tier.pathloss.alpha
    if not (math.isfinite(a) and a > 2.0):
        bad("alpha > 2 required", f"path-loss exponent must exceed 2, got {a}")

    intensity = tier.intensity
    if isinstance(intensity, PowerRadial):
        if not (math.isfinite(intensity.coeff) and intensity.coeff >= 0.0):
            bad("mu >= 0", f"radial coefficient must be >= 0, got {intensity.coeff}")
        if not (math.isfinite(intensity.exponent) and intensity.exponent > 0.0):
            bad("mu locally integrable",
                f"radial exponent must be positive, got {intensity.exponent}")
    elif isinstance(intensity, PiecewiseTable):
        ts = [kn[0] for kn in intensity.knots]
        mus = [kn[1] for kn in intensity.knots]
        if len(ts) < 2:
            bad("mu locally integrable", "table needs at least two knots")
        elif any(t1 <= t0 for t0, t1 in zip(ts, ts[1:])):
            bad("mu locally integrable", "table knots must be strictly increasing")
        if any(m < 0.0 or not math.isfinite(m) for m in mus) or ts and ts[0] < 0.0:
            bad("mu >= 0", "table densities must be finite and >= 0")
        if (intensity.tail_coeff is None) != (intensity.tail_exponent is None):
            bad("mu locally integrable",
                "tail coefficient and exponent must be declared together")
        if intensity.tail_coeff is not None and intensity.tail_coeff < 0.0:
            bad("mu >= 0", "tail coefficient must be >= 0")

    p = intensity_growth_exponent(intensity)
    if math.isfinite(a) and not p < a:
        bad("growth constraint",
            f"radial growth exponent {p} must satisfy p - 1 < alpha - 1 = {a - 1}")

    try:
        m1, m2, m3 = fading_moments(tier.fading)
    except FadingParameterError as e:
        bad("fading moments finite and positive", str(e))
    else:
        if not (m1 > 0.0 and m2 > 0.0 and m3 > 0.0):
            bad("fading moments finite and positive",
                f"moments must be strictly positive, got {(m1, m2, m3)}")
        elif m2 < m1 * m1 * (1.0 - 1e-9) or m3 < m2 ** 1.5 * (1.0 - 1e-9):
            bad("fading moment ordering",
                f"moment ordering m3 >= m2^(3/2) >= m1^3 violated: {(m1, m2, m3)}")
    return out


def validate_scenario(s: Scenario) -> ValidationReport:
    """Check every model assumption; report violations instead of raising."""
    violations: list[Violation] = []
    if not s.tiers:
        violations.append(Violation(None, "K >= 1", "scenario has no tiers"))
        return ValidationReport(tuple(violations))
    for k, tier in enumerate(s.tiers):
        violations.extend(_validate_tier(k, tier))
    if all(t.lam == 0.0 for t in s.tiers):
        violations.append(Violation(
            None, "some lambda > 0",
            "at least one tier needs a positive intensity parameter"))
    return ValidationReport(tuple(violations))


def require_valid(s: Scenario) -> None:
    """Raise ScenarioValidationError on any per-tier assumption violation.

    An all-zero intensity vector is tolerated here: moments and Laplace
    transforms of the empty network are well defined (0 and 1); operations
    that standardize by the variance raise DegenerateScenarioError instead.
    """
    report = validate_scenario(s)
    violations = tuple(v for v in report.violations
                       if v.assumption != "some lambda > 0")
    if violations:
        raise ScenarioValidationError(ValidationReport(violations))
