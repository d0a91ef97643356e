"""Scenario runner: one reproducible experiment per claim, reported as JSON.

Usage::

    symket no-cloning --a 0.6 --b 0.8
    symket photon-pair --seed 7 --output photon.json
    symket disjoint-wells --format csv --output wells.csv
    symket --config run.cfg --statistics fermion

Exit codes: 0 all checks passed, 1 a check failed, 2 invalid configuration.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from . import cloning, density, entanglement
from .hilbert import BasisLabel, State, Statistics, distance, ket, same_ray, symmetrize

SCENARIOS = ("no-cloning", "wrong-clone", "photon-pair", "densities", "disjoint-wells")
DENSITY_SCENARIOS = ("densities", "disjoint-wells")
SEED_ENV = "SYMKET_SEED"
# a, b given on the command line are rounded decimals; accept them this close to the unit circle
AMPLITUDE_INPUT_TOL = 1e-6

DEFAULT_GRIDS = {
    "densities": (0.0, 1.0, 1001),
    "disjoint-wells": (-0.5, 3.5, 4001),
}
DEFAULT_WELLS = {
    "densities": [(0.0, 1.0, 1), (0.0, 1.0, 2)],
    "disjoint-wells": [(0.0, 1.0, 1), (2.0, 3.0, 1)],
}


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    scenario: str
    statistics: Statistics = Statistics.BOSON
    a: float = 1 / math.sqrt(2)
    b: float = 1 / math.sqrt(2)
    grid_min: Optional[float] = None
    grid_max: Optional[float] = None
    grid_points: Optional[int] = None
    wells: list[tuple[float, float, int]] = field(default_factory=list)
    seed: int = 0
    output: Optional[str] = None
    format: str = "json"

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.format!r}")
        if self.format == "csv" and self.scenario not in DENSITY_SCENARIOS:
            raise ConfigError(f"csv output is only available for {' and '.join(DENSITY_SCENARIOS)}")
        if self.scenario == "no-cloning":
            for name in ("a", "b"):
                if not math.isfinite(getattr(self, name)):
                    raise ConfigError(f"{name} must be finite")
            if abs(self.a ** 2 + self.b ** 2 - 1) > AMPLITUDE_INPUT_TOL:
                raise ConfigError(f"a^2 + b^2 must equal 1, got {self.a ** 2 + self.b ** 2:.12g}")
        if self.scenario == "photon-pair" and self.statistics is not Statistics.BOSON:
            raise ConfigError("photons are bosons; photon-pair only accepts --statistics boson")
        if self.scenario in DENSITY_SCENARIOS:
            lo, hi, pts = self.grid()
            if not hi > lo:
                raise ConfigError("grid-max must exceed grid-min")
            if pts < 3:
                raise ConfigError("grid-points must be at least 3")
            wells = self.wells or DEFAULT_WELLS[self.scenario]
            if len(wells) != 2:
                raise ConfigError(f"{self.scenario} needs exactly two --well entries, got {len(wells)}")
            for left, right, n in wells:
                if not right > left or n < 1:
                    raise ConfigError(f"bad well {left},{right},{n}: need left < right and n >= 1")
                if left < lo or right > hi:
                    raise ConfigError(f"well [{left}, {right}] lies outside the grid [{lo}, {hi}]")

    def grid(self) -> tuple[float, float, int]:
        lo, hi, pts = DEFAULT_GRIDS.get(self.scenario, (0.0, 1.0, 1001))
        return (
            lo if self.grid_min is None else self.grid_min,
            hi if self.grid_max is None else self.grid_max,
            pts if self.grid_points is None else self.grid_points,
        )


# ---------------------------------------------------------------------------
# config parsing


def parse_well(text: str) -> tuple[float, float, int]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"--well expects left,right,n; got {text!r}")
    try:
        left, right, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"--well expects numbers left,right,n; got {text!r}") from None
    return left, right, n


def read_config_file(path: str) -> dict[str, Any]:
    """Flat ``key = value`` file; ``#`` starts a comment; ``well`` may repeat."""
    values: dict[str, Any] = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, _, value = line.partition(" ")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        if key == "well":
            values.setdefault("well", []).append(value)
        else:
            values[key] = value
    return values


_CONVERTERS: dict[str, Callable[[str], Any]] = {
    "scenario": str,
    "statistics": Statistics.parse,
    "a": float,
    "b": float,
    "grid_min": float,
    "grid_max": float,
    "grid_points": int,
    "seed": int,
    "output": str,
    "format": str,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symket", description="Run a symmetrized-state scenario and report checks as JSON.")
    p.add_argument("scenario_pos", nargs="?", metavar="SCENARIO", help=f"one of {', '.join(SCENARIOS)}")
    p.add_argument("--scenario", help="scenario name (overrides the positional argument)")
    p.add_argument("--config", help="flat key = value config file; flags override it")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--statistics", choices=("boson", "fermion"))
    p.add_argument("--seed", type=int, help=f"sampler seed (fallback: ${SEED_ENV}, then 0)")
    p.add_argument("--grid-min", type=float)
    p.add_argument("--grid-max", type=float)
    p.add_argument("--grid-points", type=int)
    p.add_argument("--well", action="append", metavar="LEFT,RIGHT,N", help="repeatable")
    p.add_argument("--output", help="report path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"))
    return p


def resolve_config(args: argparse.Namespace, environ: Optional[dict] = None) -> ScenarioConfig:
    environ = os.environ if environ is None else environ
    merged: dict[str, Any] = {}
    if args.config:
        merged.update(read_config_file(args.config))
    flags = {
        "scenario": args.scenario or args.scenario_pos,
        "statistics": args.statistics,
        "a": args.a,
        "b": args.b,
        "grid_min": args.grid_min,
        "grid_max": args.grid_max,
        "grid_points": args.grid_points,
        "seed": args.seed,
        "output": args.output,
        "format": args.format,
        "well": args.well,
    }
    merged.update({k: v for k, v in flags.items() if v is not None})
    if "seed" not in merged and environ.get(SEED_ENV):
        merged["seed"] = environ[SEED_ENV]
    if "scenario" not in merged:
        raise ConfigError("no scenario given")

    kwargs: dict[str, Any] = {}
    for key, value in merged.items():
        if key == "well":
            kwargs["wells"] = [parse_well(w) for w in value]
            continue
        if key not in _CONVERTERS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            kwargs[key] = _CONVERTERS[key](value) if isinstance(value, str) else value
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from None
    config = ScenarioConfig(**kwargs)
    config.validate()
    return config


# ---------------------------------------------------------------------------
# report helpers


def _num(x: float) -> float:
    x = float(format(float(x), ".15g"))
    return 0.0 if x == 0 else x


def serialize(obj: Any) -> Any:
    """Plain JSON types with every float cut to 15 significant digits."""
    if isinstance(obj, State):
        return [
            {"labels": [str(label) for label in key], "amplitude": [_num(a.real), _num(a.imag)]}
            for key, a in obj.items()
        ]
    if isinstance(obj, Statistics):
        return obj.name.lower()
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_num(obj.real), _num(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [serialize(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): serialize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [serialize(v) for v in obj]
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


class Checks:
    def __init__(self):
        self.items: list[dict] = []

    def within(self, name: str, error: float, tolerance: float) -> None:
        error = float(error)
        self.items.append({"name": name, "passed": bool(error <= tolerance), "error": error, "tolerance": tolerance})

    def holds(self, name: str, condition: bool) -> None:
        self.within(name, 0.0 if condition else 1.0, 0.0)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.items)


# ---------------------------------------------------------------------------
# scenarios


def _no_cloning(cfg: ScenarioConfig, checks: Checks) -> dict:
    scale = math.hypot(cfg.a, cfg.b)
    a, b = cfg.a / scale, cfg.b / scale
    stats = cfg.statistics
    verdict = cloning.no_cloning_gap(a, b, "psi", "phi", stats)
    oracle = abs(a ** 3 + b ** 3)
    checks.within("fidelity-matches-cubic-oracle", abs(verdict.fidelity - oracle), 1e-10)
    checks.within("ideal-clone-normalized", abs(verdict.ideal_state.norm() - 1), 1e-12)

    clone_map = cloning.CloneMap.for_labels(["psi", "phi"], stats)
    u, v = clone_map.inputs
    lhs = cloning.apply_clone_map(clone_map, a * u + b * v)
    rhs = a * cloning.apply_clone_map(clone_map, u) + b * cloning.apply_clone_map(clone_map, v)
    checks.within("clone-map-linear", distance(lhs, rhs), 1e-12)

    if min(abs(a), abs(b)) < 1e-9:
        checks.holds("basis-state-cloned", verdict.is_clone)
    else:
        checks.holds("superposition-not-cloned", not verdict.is_clone)

    sweep = []
    worst = 0.0
    dichotomy_ok = True
    for ga, gb in cloning.grid_amplitudes(101):
        v = cloning.no_cloning_gap(ga, gb, "psi", "phi", stats)
        worst = max(worst, abs(v.fidelity - (ga ** 3 + gb ** 3)))
        dichotomy_ok &= v.is_clone == (min(abs(ga), abs(gb)) < 1e-9)
        sweep.append([ga, gb, v.fidelity])
    checks.holds("dichotomy-over-grid", dichotomy_ok)
    checks.within("grid-fidelity-matches-cubic-oracle", worst, 1e-10)

    return {
        "inputs": {"a": cfg.a, "b": cfg.b, "a_normalized": a, "b_normalized": b, "statistics": stats},
        "results": {
            "ideal_state": verdict.ideal_state,
            "linear_state": verdict.linear_state,
            "fidelity": verdict.fidelity,
            "expected_fidelity": oracle,
            "is_clone": verdict.is_clone,
            "grid_sweep": sweep,
        },
    }


def _wrong_clone(cfg: ScenarioConfig, checks: Checks) -> dict:
    stats = cfg.statistics
    wrong, ideal, fidelity = cloning.wrong_clone_demo("phi", stats)
    blank_term = wrong.amplitude(BasisLabel(cloning.BLANK, cloning.THERE), BasisLabel(cloning.BLANK, cloning.HERE))
    checks.within("wrong-clone-fidelity-half", abs(fidelity - 0.5), 1e-12)
    checks.within("blank-blank-term-amplitude", abs(abs(blank_term) - 1 / math.sqrt(2)), 1e-12)
    checks.holds("wrong-differs-from-ideal", not same_ray(wrong, ideal))
    return {
        "inputs": {"phi": "phi", "statistics": stats},
        "results": {
            "input_state": cloning.clone_input("phi", stats),
            "wrong_state": wrong,
            "ideal_state": ideal,
            "fidelity": fidelity,
        },
    }


def _photon_pair(cfg: ScenarioConfig, checks: Checks) -> dict:
    naive = entanglement.photon_pair_naive()
    sym = entanglement.photon_pair_symmetrized()
    rng = np.random.default_rng(cfg.seed)
    hv = ["H", "V"]

    checks.holds("symmetrized-exchange-eigenvalue-plus-one", entanglement.exchange_eigenvalue(sym) == 1)
    checks.holds("naive-not-exchange-eigenstate", entanglement.exchange_eigenvalue(naive) is None)

    p_naive, _ = entanglement.outcome_probabilities(naive, "1", hv)
    p_sym, _ = entanglement.outcome_probabilities(sym, "1", hv)
    checks.within("marginals-agree", max(abs(p_naive[x] - p_sym[x]) for x in hv), 1e-12)
    checks.within("first-measurement-balanced", max(abs(p_sym[x] - 0.5) for x in hv), 1e-12)

    first = entanglement.measure(sym, "1", hv, rng)
    expected_post = symmetrize(ket(f"{first.outcome}_1"), ket(f"{first.outcome}_2"), Statistics.BOSON)
    checks.within("collapse-to-symmetrized-pair", distance(first.post_state, expected_post.canonical()), 1e-12)
    second = entanglement.measure(first.post_state, "2", hv, rng)
    checks.holds("momentum-2-matches-momentum-1", second.outcome == first.outcome)
    checks.within("momentum-2-certain", abs(second.probability - 1), 1e-12)
    repeat = entanglement.measure(first.post_state, "1", hv, rng)
    checks.holds("repeat-momentum-1-matches", repeat.outcome == first.outcome)
    checks.within("repeat-momentum-1-certain", abs(repeat.probability - 1), 1e-12)

    trace = [
        {"location": r.location, "outcome": r.outcome, "probability": r.probability,
         "probabilities": r.probabilities, "deficit": r.deficit, "post_state": r.post_state}
        for r in (first, second, repeat)
    ]
    s_naive = entanglement.schmidt(naive)
    s_sym = entanglement.schmidt(sym)
    return {
        "inputs": {"seed": cfg.seed, "statistics": Statistics.BOSON},
        "results": {
            "naive_state": naive,
            "symmetrized_state": sym,
            "naive_schmidt_coefficients": s_naive.coefficients,
            "symmetrized_schmidt_coefficients": s_sym.coefficients,
            "marginals_naive": p_naive,
            "marginals_symmetrized": p_sym,
            "collapse_trace": trace,
        },
    }


def _wells(cfg: ScenarioConfig):
    lo, hi, pts = cfg.grid()
    grid = density.Grid.from_range(lo, hi, pts)
    wells = cfg.wells or DEFAULT_WELLS[cfg.scenario]
    phi, psi = (density.make_box_eigenstate(n, left, right, grid) for left, right, n in wells)
    return grid, wells, phi, psi


def _densities(cfg: ScenarioConfig, checks: Checks) -> tuple[dict, density.DensityProfile]:
    grid, wells, phi, psi = _wells(cfg)
    stats = cfg.statistics
    other = Statistics.FERMION if stats is Statistics.BOSON else Statistics.BOSON
    rho1 = density.density_symmetrized(phi, psi, stats, which=1)
    rho2 = density.density_symmetrized(phi, psi, stats, which=2)
    rho_other = density.density_symmetrized(phi, psi, other, which=1)
    prod1 = density.density_product(phi, psi, which=1)
    prod2 = density.density_product(phi, psi, which=2)
    by_hand = 0.5 * (np.abs(phi.samples) ** 2 + np.abs(psi.samples) ** 2)

    checks.within("inputs-orthogonal", abs(density.overlap(phi, psi)), density.ORTHO_TOL)
    checks.within("symmetrized-is-average", float(np.max(np.abs(rho1.values - by_hand))), 1e-12)
    checks.within("symmetrized-integrates-to-one", abs(rho1.integral() - 1), 1e-8)
    checks.within("particles-1-and-2-identical", rho1.max_abs_diff(rho2), 0.0)
    checks.within("boson-fermion-identical", rho1.max_abs_diff(rho_other), 0.0)
    checks.within("product-particle-1-integrates-to-one", abs(prod1.integral() - 1), 1e-8)
    checks.within("product-particle-2-integrates-to-one", abs(prod2.integral() - 1), 1e-8)
    report = {
        "inputs": {"statistics": stats, "grid": grid.to_dict(), "wells": wells},
        "results": {
            "overlap": density.overlap(phi, psi),
            "product_densities_differ": prod1.max_abs_diff(prod2),
            "symmetrized_density": rho1.values,
            "product_density_1": prod1.values,
            "product_density_2": prod2.values,
            "x": grid.x,
        },
    }
    return report, rho1


def _disjoint_wells(cfg: ScenarioConfig, checks: Checks) -> tuple[dict, Optional[density.DensityProfile]]:
    grid, wells, phi, psi = _wells(cfg)
    stats = cfg.statistics
    (l1, r1, _), (l2, r2, _) = wells
    left_region, right_region = grid.indices(l1, r1), grid.indices(l2, r2)
    disjoint = density.disjoint_support(phi, psi)
    checks.holds("supports-disjoint", disjoint)
    results: dict[str, Any] = {"disjoint": disjoint}
    left = None
    if disjoint:
        left = density.restricted_density(phi, psi, stats, left_region)
        right = density.restricted_density(phi, psi, stats, right_region)
        err_left = left.max_abs_diff(density.density_product(phi, psi, 1).restrict(left_region))
        err_right = right.max_abs_diff(density.density_product(phi, psi, 2).restrict(right_region))
        checks.within("left-well-matches-phi-squared", err_left, 1e-8)
        checks.within("right-well-matches-psi-squared", err_right, 1e-8)
        checks.within("left-restricted-normalized", abs(left.integral() - 1), 1e-8)
        results.update({
            "left_region": [left_region.start, left_region.stop],
            "right_region": [right_region.start, right_region.stop],
            "left_restricted_density": left.values,
            "right_restricted_density": right.values,
            "left_x": left.x,
            "right_x": right.x,
        })

    # a single particle spread over both wells brings the overlap back
    spanning = density.superpose([1, 1], [phi, psi])
    span_disjoint = density.disjoint_support(spanning, psi)
    checks.holds("spanning-state-not-disjoint", not span_disjoint)
    try:
        density.restricted_density(spanning, psi, stats, left_region)
        refused = False
    except density.OverlappingSupport:
        refused = True
    checks.holds("spanning-state-reduction-refused", refused)
    results["spanning_state_disjoint"] = span_disjoint

    report = {"inputs": {"statistics": stats, "grid": grid.to_dict(), "wells": wells}, "results": results}
    return report, left


def run_scenario(cfg: ScenarioConfig) -> tuple[dict, Optional[str]]:
    """Run one scenario. Returns (JSON-ready report, CSV text or None)."""
    checks = Checks()
    csv_text = None
    if cfg.scenario == "no-cloning":
        body = _no_cloning(cfg, checks)
    elif cfg.scenario == "wrong-clone":
        body = _wrong_clone(cfg, checks)
    elif cfg.scenario == "photon-pair":
        body = _photon_pair(cfg, checks)
    elif cfg.scenario == "densities":
        body, profile = _densities(cfg, checks)
        csv_text = profile.to_csv()
    elif cfg.scenario == "disjoint-wells":
        body, profile = _disjoint_wells(cfg, checks)
        # no restricted density exists when the wells overlap
        csv_text = profile.to_csv() if profile is not None else None
    else:
        raise ConfigError(f"unknown scenario {cfg.scenario!r}")
    report = {"scenario": cfg.scenario, **body, "checks": checks.items, "passed": checks.passed}
    return serialize(report), csv_text


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False, allow_nan=False) + "\n"


def write_atomic(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"symket: invalid config: {exc}", file=sys.stderr)
        return 2

    report, csv_text = run_scenario(cfg)
    payload = csv_text if cfg.format == "csv" else render_json(report)
    if payload is None:
        print("symket: no density to write as CSV", file=sys.stderr)
    elif cfg.output:
        write_atomic(cfg.output, payload)
    else:
        sys.stdout.write(payload)
    if cfg.format == "csv":
        # the checks still need to surface somewhere when stdout carries CSV
        print(json.dumps({"scenario": cfg.scenario, "passed": report["passed"]}), file=sys.stderr)

    for check in report["checks"]:
        if not check["passed"]:
            print(f"symket: check failed: {check['name']} (error {check['error']}, "
                  f"tolerance {check['tolerance']})", file=sys.stderr)
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
