"""Command-line interface: scenario loading, runs, CSV/JSON emission.

Subcommands
    bound      scaling coefficient, moments, lower bound, envelope curve
    simulate   Monte-Carlo sample set as CSV (one value per line)
    compare    empirical CDF vs envelope: report JSON + curve CSV
    laplace    Laplace transform table with Monte-Carlo cross-check
    scaling    density-scaling certificate table
    converge   truncation-radius convergence diagnostic

Every emitted file embeds the run fingerprint (hash of the canonical
scenario serialization and the seed).  Data files contain no timestamps, so
reruns of an identical manifest are byte-identical.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analytics import (
    berry_esseen_crossover,
    density_scaling_certificate,
    laplace_transform,
    scaling_coefficient,
    scaling_lower_bound,
    std_normal_cdf,
)
from .empirics import convergence_diagnostic, empirical_cdf, envelope_report
from .model import (
    DegenerateScenarioError,
    DivergenceError,
    ScenarioValidationError,
)
from .scenario_io import ScenarioParseError, canonical_json, fingerprint, load_scenario
from .simulate import Construction, SimConfig, monte_carlo, standardize, truncation_bias_bound

_EXIT_CODES = (
    (ScenarioParseError, 5, "parse"),
    (ScenarioValidationError, 2, "validation"),
    (DivergenceError, 3, "divergence"),
    (DegenerateScenarioError, 4, "degenerate"),
    (ValueError, 6, "domain"),
)


def _fmt(v: float) -> str:
    return f"{v:.17g}"


@dataclass(frozen=True)
class RunManifest:
    subcommand: str
    scenario_source: str
    fingerprint: str
    seed: int
    replications: int
    radius: float
    construction: str
    slack: float
    grid: str
    truncation_bias_bound: float
    outputs: tuple[str, ...]
    version: str
    timestamp: str


def _parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise ValueError(f"grid must be MIN:MAX:POINTS, got {spec!r}")
    if n < 2 or not hi > lo:
        raise ValueError(f"grid must have MAX > MIN and POINTS >= 2, got {spec!r}")
    return np.linspace(lo, hi, n)


def _parse_floats(spec: str, what: str) -> list[float]:
    try:
        vals = [float(v) for v in spec.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"{what} must be a comma-separated number list, got {spec!r}")
    if not vals:
        raise ValueError(f"{what} list is empty")
    return vals


def _resolve_scenario(args) -> tuple:
    if args.scenario and args.preset:
        raise ScenarioParseError("give either --scenario or --preset, not both")
    if args.scenario:
        return load_scenario(args.scenario), args.scenario
    spec = args.preset or "figure1"
    if "(" not in spec:
        if spec == "figure1":
            spec = f"figure1({args.kappa},{args.alpha})"
        elif spec == "single":
            spec = f"single(1,1,{args.alpha})"
    return load_scenario(spec), spec


def _write_csv(path: str, fp: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# fingerprint={fp}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _envelope_rows(s, grid, empirical=None):
    bound = scaling_coefficient(s)
    psi = std_normal_cdf(grid)
    lo_raw, hi_raw = bound.envelope(grid, clamp=False)
    lo, hi = bound.envelope(grid, clamp=True)
    for i, x in enumerate(grid):
        emp = _fmt(empirical[i]) if empirical is not None else ""
        yield [_fmt(x), _fmt(psi[i]), _fmt(lo_raw[i]), _fmt(hi_raw[i]),
               _fmt(lo[i]), _fmt(hi[i]), emp]


_CURVE_HEADER = ["x", "psi", "lower_unclamped", "upper_unclamped",
                 "lower", "upper", "empirical"]


def _cmd_bound(args, s, fp, outdir):
    bound = scaling_coefficient(s)
    payload = {
        "fingerprint": fp,
        "xi": bound.xi,
        "mean": bound.mean,
        "variance": bound.variance,
        "uniform_bound": bound.uniform_bound,
        "lower_bound": scaling_lower_bound(s),
        "envelope_crossover": berry_esseen_crossover(),
    }
    jpath = os.path.join(outdir, "bound.json")
    cpath = os.path.join(outdir, "envelope.csv")
    _write_json(jpath, payload)
    _write_csv(cpath, fp, _CURVE_HEADER, _envelope_rows(s, _parse_grid(args.grid)))
    return [jpath, cpath]


def _cmd_simulate(args, s, fp, outdir, cfg):
    samples = monte_carlo(s, cfg)
    path = os.path.join(outdir, "samples.csv")
    _write_csv(path, fp, ["value"], ([_fmt(v)] for v in samples.values))
    return [path]


def _cmd_compare(args, s, fp, outdir, cfg):
    samples = monte_carlo(s, cfg)
    std = standardize(samples, s, mode="analytic")
    report = envelope_report(std, s, slack_level=args.slack)
    grid = _parse_grid(args.grid)
    emp = empirical_cdf(report.sorted_samples, grid)
    bias = truncation_bias_bound(s, cfg.truncation_radius)
    payload = {
        "fingerprint": fp,
        "replications": cfg.replications,
        "ks_distance": report.ks_distance,
        "xi": report.xi,
        "bound_uniform": report.bound_uniform,
        "envelope_violations": report.envelope_violations,
        "slack": report.slack,
        "slack_level": report.slack_level,
        "truncation_bias_bound": bias,
    }
    jpath = os.path.join(outdir, "report.json")
    cpath = os.path.join(outdir, "curve.csv")
    _write_json(jpath, payload)
    _write_csv(cpath, fp, _CURVE_HEADER, _envelope_rows(s, grid, emp))
    return [jpath, cpath]


def _cmd_laplace(args, s, fp, outdir, cfg):
    svals = _parse_floats(args.svals, "--svals")
    lvals = laplace_transform(s, svals)
    samples = monte_carlo(s, cfg)
    rows = []
    for sv, lv in zip(svals, lvals):
        trans = np.exp(-sv * samples.values)
        mc = float(trans.mean())
        se = float(trans.std(ddof=1) / math.sqrt(trans.size)) if trans.size > 1 else 0.0
        rows.append([_fmt(sv), _fmt(lv), _fmt(mc), _fmt(se), _fmt(abs(mc - lv))])
    path = os.path.join(outdir, "laplace.csv")
    _write_csv(path, fp, ["s", "laplace", "mc_mean", "mc_stderr", "abs_gap"], rows)
    return [path]


def _cmd_scaling(args, s, fp, outdir):
    factors = _parse_floats(args.factors, "--factors")
    cert = density_scaling_certificate(s, factors)
    rows = [[_fmt(r.factor), _fmt(r.xi), _fmt(r.xi_sqrt_factor)] for r in cert.rows]
    path = os.path.join(outdir, "scaling.csv")
    _write_csv(path, fp, ["factor", "xi", "xi_sqrt_factor"], rows)
    jpath = os.path.join(outdir, "scaling.json")
    _write_json(jpath, {"fingerprint": fp,
                        "max_relative_spread": cert.max_relative_spread})
    return [path, jpath]


def _cmd_converge(args, s, fp, outdir, cfg):
    radii = _parse_floats(args.radii, "--radii")
    rows = convergence_diagnostic(s, radii, cfg)
    path = os.path.join(outdir, "converge.csv")
    _write_csv(path, fp,
               ["radius", "sample_mean", "sample_variance", "truncated_mean",
                "truncated_gap", "mean_gap", "variance_gap"],
               ([_fmt(r.radius), _fmt(r.sample_mean), _fmt(r.sample_variance),
                 _fmt(r.truncated_mean), _fmt(r.truncated_gap), _fmt(r.mean_gap),
                 _fmt(r.variance_gap)] for r in rows))
    return [path]


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hcn-gauss",
        description="Gaussian-approximation bounds for downlink aggregate "
                    "interference in K-tier Poisson networks")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name, help_text in (
            ("bound", "emit the scaling coefficient, moments and envelope curve"),
            ("simulate", "emit a Monte-Carlo sample set as CSV"),
            ("compare", "empirical CDF vs the analytic envelope"),
            ("laplace", "Laplace-transform table with Monte-Carlo cross-check"),
            ("scaling", "density-scaling certificate"),
            ("converge", "truncation-radius convergence diagnostic")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", help="path to a scenario JSON file")
        p.add_argument("--preset", help="preset spec, e.g. figure1(1,4) or single(1,1,4)")
        p.add_argument("--kappa", type=float, default=1.0,
                       help="density factor for the figure1 preset (default 1)")
        p.add_argument("--alpha", type=float, default=4.0,
                       help="path-loss exponent for presets (default 4)")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--replications", type=int, default=10_000)
        p.add_argument("--radius", type=float, default=200.0,
                       help="truncation radius (default 200)")
        p.add_argument("--construction", choices=["poisson", "fixed"],
                       default="poisson")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--slack", type=float, default=0.01,
                       help="DKW slack level for envelope checks")
        p.add_argument("--grid", default="-8:8:801",
                       help="envelope grid MIN:MAX:POINTS (default -8:8:801)")
        if name == "laplace":
            p.add_argument("--svals", default="0.1,1,10",
                           help="comma-separated Laplace arguments")
        if name == "scaling":
            p.add_argument("--factors", default="1,4,25,100",
                           help="comma-separated density scaling factors")
        if name == "converge":
            p.add_argument("--radii", default="10,50,200",
                           help="comma-separated ascending truncation radii")
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        s, source = _resolve_scenario(args)
        fp = fingerprint(s, args.seed)
        cfg = SimConfig(
            truncation_radius=args.radius,
            replications=args.replications,
            seed=args.seed,
            construction=(Construction.POISSON_FIELD if args.construction == "poisson"
                          else Construction.FIXED_COUNT))
        outdir = args.out
        os.makedirs(outdir, exist_ok=True)
        if args.subcommand == "bound":
            outputs = _cmd_bound(args, s, fp, outdir)
        elif args.subcommand == "simulate":
            outputs = _cmd_simulate(args, s, fp, outdir, cfg)
        elif args.subcommand == "compare":
            outputs = _cmd_compare(args, s, fp, outdir, cfg)
        elif args.subcommand == "laplace":
            outputs = _cmd_laplace(args, s, fp, outdir, cfg)
        elif args.subcommand == "scaling":
            outputs = _cmd_scaling(args, s, fp, outdir)
        else:
            outputs = _cmd_converge(args, s, fp, outdir, cfg)
        manifest = RunManifest(
            subcommand=args.subcommand, scenario_source=source, fingerprint=fp,
            seed=args.seed, replications=args.replications, radius=args.radius,
            construction=args.construction, slack=args.slack, grid=args.grid,
            truncation_bias_bound=truncation_bias_bound(s, args.radius),
            outputs=tuple(os.path.basename(o) for o in outputs),
            version=__version__,
            timestamp=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()))
        _write_json(os.path.join(outdir, "manifest.json"),
                    dataclasses.asdict(manifest) | {"scenario": json.loads(canonical_json(s))})
        for path in outputs:
            print(path)
        return 0
    except Exception as e:  # noqa: BLE001 - single CLI error boundary
        for klass, code, category in _EXIT_CODES:
            if isinstance(e, klass):
                print(f"error: category={category} message={e}", file=sys.stderr)
                return code
        print(f"error: category=internal message={e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
