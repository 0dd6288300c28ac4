"""Canonical scenario serialization, fingerprints and built-in presets.

Scenario files are a single JSON document:

    {"tiers": [{"power": P, "lambda": L,
                "intensity": {"family": ..., ...},
                "pathloss":  {"family": ..., "alpha": A},
                "fading":    {"family": ..., ...}}, ...]}

The canonical rendering (sorted keys, no whitespace, shortest round-trip
floats) is what gets hashed into output fingerprints.
"""

from __future__ import annotations

import hashlib
import json
import os
import re

from .model import (
    Deterministic,
    FadingModel,
    Homogeneous2D,
    NakagamiPower,
    PathLossFamily,
    PathLossModel,
    PiecewiseTable,
    PowerRadial,
    RadialIntensity,
    RayleighPower,
    RicianPower,
    Scenario,
    ScenarioValidationError,
    TierConfig,
    validate_scenario,
)


class ScenarioParseError(ValueError):
    """Scenario file or preset string could not be interpreted."""


def _intensity_to_dict(v: RadialIntensity) -> dict:
    if isinstance(v, Homogeneous2D):
        return {"family": "homogeneous2d"}
    if isinstance(v, PowerRadial):
        return {"family": "power_radial", "coeff": v.coeff, "exponent": v.exponent}
    out = {"family": "piecewise_table", "knots": [[t, m] for t, m in v.knots]}
    if v.tail_coeff is not None:
        out["tail_coeff"] = v.tail_coeff
        out["tail_exponent"] = v.tail_exponent
    return out


def _fading_to_dict(v: FadingModel) -> dict:
    if isinstance(v, Deterministic):
        return {"family": "deterministic", "gain": v.gain}
    if isinstance(v, RayleighPower):
        return {"family": "rayleigh", "mean_power": v.mean_power}
    if isinstance(v, NakagamiPower):
        return {"family": "nakagami", "shape": v.shape, "mean_power": v.mean_power}
    return {"family": "rician", "k_factor": v.k_factor, "mean_power": v.mean_power}


def scenario_to_dict(s: Scenario) -> dict:
    return {"tiers": [{
        "power": t.power,
        "lambda": t.lam,
        "intensity": _intensity_to_dict(t.intensity),
        "pathloss": {"family": t.pathloss.family.value, "alpha": t.pathloss.alpha},
        "fading": _fading_to_dict(t.fading),
    } for t in s.tiers]}


def _require(d: dict, key: str, ctx: str):
    if key not in d:
        raise ScenarioParseError(f"{ctx}: missing field {key!r}")
    return d[key]


def _intensity_from_dict(d: dict, ctx: str) -> RadialIntensity:
    fam = _require(d, "family", ctx)
    if fam == "homogeneous2d":
        return Homogeneous2D()
    if fam == "power_radial":
        return PowerRadial(coeff=float(_require(d, "coeff", ctx)),
                           exponent=float(_require(d, "exponent", ctx)))
    if fam == "piecewise_table":
        knots = tuple((float(t), float(m)) for t, m in _require(d, "knots", ctx))
        tc = d.get("tail_coeff")
        te = d.get("tail_exponent")
        return PiecewiseTable(knots=knots,
                              tail_coeff=None if tc is None else float(tc),
                              tail_exponent=None if te is None else float(te))
    raise ScenarioParseError(f"{ctx}: unknown intensity family {fam!r}")


def _fading_from_dict(d: dict, ctx: str) -> FadingModel:
    fam = _require(d, "family", ctx)
    if fam == "deterministic":
        return Deterministic(gain=float(_require(d, "gain", ctx)))
    if fam == "rayleigh":
        return RayleighPower(mean_power=float(_require(d, "mean_power", ctx)))
    if fam == "nakagami":
        return NakagamiPower(shape=float(_require(d, "shape", ctx)),
                             mean_power=float(_require(d, "mean_power", ctx)))
    if fam == "rician":
        return RicianPower(k_factor=float(_require(d, "k_factor", ctx)),
                           mean_power=float(_require(d, "mean_power", ctx)))
    raise ScenarioParseError(f"{ctx}: unknown fading family {fam!r}")


def scenario_from_dict(d: dict) -> Scenario:
    tiers = []
    for i, td in enumerate(_require(d, "tiers", "scenario")):
        ctx = f"tier {i}"
        pl = _require(td, "pathloss", ctx)
        fam_name = _require(pl, "family", ctx + " pathloss")
        try:
            fam = PathLossFamily(fam_name)
        except ValueError:
            raise ScenarioParseError(f"{ctx}: unknown path loss family {fam_name!r}")
        tiers.append(TierConfig(
            power=float(_require(td, "power", ctx)),
            lam=float(_require(td, "lambda", ctx)),
            intensity=_intensity_from_dict(_require(td, "intensity", ctx), ctx),
            pathloss=PathLossModel(family=fam, alpha=float(_require(pl, "alpha", ctx))),
            fading=_fading_from_dict(_require(td, "fading", ctx), ctx),
        ))
    return Scenario(tuple(tiers))


def canonical_json(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), sort_keys=True, separators=(",", ":"))


def fingerprint(s: Scenario, seed: int | None = None) -> str:
    """Hash of the canonical scenario serialization plus the seed."""
    payload = canonical_json(s) + f"|seed={seed}"
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def preset_figure1(kappa: float = 1.0, alpha: float = 4.0) -> Scenario:
    """Built-in three-tier example: intensity parameters (0.1, 1, 5) * kappa,
    powers (4, 1, 0.25), shared 1/(1+t^alpha) path loss, unit-mean Rayleigh
    fading, planar homogeneous layout."""
    pl = PathLossModel(PathLossFamily.INVERSE_ONE_PLUS_POWER, alpha)
    fading = RayleighPower(1.0)
    return Scenario(tuple(
        TierConfig(power=p, lam=kappa * l, intensity=Homogeneous2D(),
                   pathloss=pl, fading=fading)
        for l, p in ((0.1, 4.0), (1.0, 1.0), (5.0, 0.25))))


def preset_single(lam: float = 1.0, power: float = 1.0, alpha: float = 4.0) -> Scenario:
    """Single-tier planar homogeneous network with unit-mean Rayleigh fading."""
    return Scenario((TierConfig(
        power=power, lam=lam, intensity=Homogeneous2D(),
        pathloss=PathLossModel(PathLossFamily.INVERSE_ONE_PLUS_POWER, alpha),
        fading=RayleighPower(1.0)),))


_PRESETS = {"figure1": preset_figure1, "single": preset_single}
_PRESET_RE = re.compile(r"^(?P<name>[a-zA-Z_][a-zA-Z0-9_]*)"
                        r"(?:\((?P<args>[^)]*)\))?$")


def build_preset(spec: str) -> Scenario:
    m = _PRESET_RE.match(spec.strip())
    if not m or m.group("name") not in _PRESETS:
        raise ScenarioParseError(f"unknown preset {spec!r}; "
                                 f"known: {sorted(_PRESETS)}")
    args = []
    if m.group("args"):
        try:
            args = [float(a) for a in m.group("args").split(",") if a.strip()]
        except ValueError:
            raise ScenarioParseError(f"preset arguments must be numeric: {spec!r}")
    try:
        return _PRESETS[m.group("name")](*args)
    except TypeError:
        raise ScenarioParseError(f"wrong number of arguments for preset {spec!r}")


def load_scenario(source: str) -> Scenario:
    """Load a scenario from a preset spec like "figure1(1,4)" or a JSON file.

    The result is validated; violations raise ScenarioValidationError with
    the validation report attached.
    """
    if os.path.exists(source):
        with open(source, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as e:
                raise ScenarioParseError(f"{source}: invalid JSON ({e})")
        s = scenario_from_dict(data)
    else:
        s = build_preset(source)
    report = validate_scenario(s)
    if not report.ok:
        raise ScenarioValidationError(report)
    return s


def save_scenario(s: Scenario, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(s), fh, indent=2, sort_keys=True)
        fh.write("\n")
