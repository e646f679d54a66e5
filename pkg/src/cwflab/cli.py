"""``cwf-lab`` command-line scenario runner.

Exit codes: 0 success, 1 internal error or a tolerance check that failed,
2 bad input (config, parameters, flags).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import ensemble
from .core_model import OrbitParams, System
from .errors import ConfigError, CwfError
from .grid import PolarGrid
from .hamilton_jacobi import PrincipalFunction, build_radial_profile, hj_residual
from .levi_civita import LeviCivitaConfig, check_pair, map_parameters, map_wavefunction, unmap_parameters
from .operator_lab import sle_residual
from .wavefunction import bin_masses, continuity_residual, field_grid, normalize, write_field_csv

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_TOLERANCES = {
    "hj_tol": 1e-5,
    "continuity_tol": 1e-6,
    "sle_tol": 1e-4,
    "phase_tol": 1e-6,
    "modulus_tol": 1e-6,
    "K_tol": 1e-6,
    "l1_tol": 0.05,
}
ORBIT_KEYS = {"system", "m", "E", "l", "coupling"}
PARTNER_KEYS = {"partner_" + k for k in ("m", "E", "l", "coupling")}
OTHER_KEYS = {"name", "grid", "margin", "c", "seed", "n_samples", "n_bins", "steps_per_period", "n_nodes"}
KNOWN_KEYS = ORBIT_KEYS | PARTNER_KEYS | OTHER_KEYS | set(DEFAULT_TOLERANCES)


@dataclass
class Scenario:
    params: OrbitParams
    name: str = "scenario"
    partner: OrbitParams | None = None
    lc: LeviCivitaConfig = field(default_factory=LeviCivitaConfig)
    n_r: int = 256
    n_phi: int = 64
    margin: float = 0.05
    seed: int = 0
    n_samples: int = 1_000_000
    n_bins: int = 100
    steps_per_period: int = ensemble.DEFAULT_STEPS_PER_PERIOD
    n_nodes: int = 2048
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    out: Path = Path(".")

    def grid(self, p=None):
        return PolarGrid.for_params(p or self.params, n_r=self.n_r, n_phi=self.n_phi, margin=self.margin)


def parse_grid(text):
    try:
        a, b = str(text).lower().split("x")
        n_r, n_phi = int(a), int(b)
    except ValueError as exc:
        raise ConfigError(f"grid must look like RxP, got {text!r}") from exc
    if n_r < 8 or n_phi < 8:
        raise ConfigError("grid needs at least 8 points per axis")
    return n_r, n_phi


def load_scenario(path, overrides: argparse.Namespace | None = None) -> Scenario:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            cfg = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    unknown = sorted(set(cfg) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    def num(key, kind=float):
        try:
            return kind(cfg[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key} must be a number") from exc

    params = OrbitParams.from_record(cfg)
    partner = None
    if PARTNER_KEYS & set(cfg):
        rec = {k[len("partner_"):]: cfg[k] for k in PARTNER_KEYS if k in cfg}
        other = System.KEPLER if params.system is System.OSCILLATOR else System.OSCILLATOR
        partner = OrbitParams.from_record({"system": other.value, **rec})

    sc = Scenario(params=params, name=str(cfg.get("name", path.stem)), partner=partner)
    if "grid" in cfg:
        sc.n_r, sc.n_phi = parse_grid(cfg["grid"])
    for key, kind in (("margin", float), ("seed", int), ("n_samples", int), ("n_bins", int),
                      ("steps_per_period", int), ("n_nodes", int)):
        if key in cfg:
            setattr(sc, key, num(key, kind))
    if "c" in cfg:
        sc.lc = LeviCivitaConfig(c=num("c"))
    for key in DEFAULT_TOLERANCES:
        if key in cfg:
            sc.tolerances[key] = num(key)

    if overrides is not None:
        if overrides.grid is not None:
            sc.n_r, sc.n_phi = parse_grid(overrides.grid)
        if overrides.margin is not None:
            sc.margin = overrides.margin
        if overrides.seed is not None:
            sc.seed = overrides.seed
        if overrides.c is not None:
            sc.lc = LeviCivitaConfig(c=overrides.c)
        if overrides.out is not None:
            sc.out = Path(overrides.out)
    return sc


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_json(path, obj):
    text = json.dumps(_clean(obj), indent=2, sort_keys=True, ensure_ascii=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def _scenario_header(sc: Scenario):
    return {"name": sc.name, "params": sc.params.to_record(), "seed": sc.seed}


# --- commands ------------------------------------------------------------------


def cmd_wavefunction(sc: Scenario):
    p = sc.params
    grid = sc.grid()
    profile = build_radial_profile(p, sc.n_nodes)
    C = normalize(p)
    T_r = 2.0 * float(profile.time(profile.turning.r_max))
    write_field_csv(sc.out / "field.csv", grid, field_grid(PrincipalFunction(profile), C, grid))
    write_json(sc.out / "normalization.json", {
        **_scenario_header(sc),
        "C": C,
        "C_closed_form": float(np.sqrt(p.m * abs(p.l) / (np.pi * T_r))),
        "T_r": T_r,
        "grid": grid.descriptor(),
    })
    return True


def residual_reports(sc: Scenario, p=None):
    p = p or sc.params
    pf = PrincipalFunction(build_radial_profile(p, sc.n_nodes))
    grid = sc.grid(p)
    C = normalize(p)
    return [hj_residual(pf, grid), continuity_residual(p, pf, C, grid), sle_residual(p, pf, C, grid)]


def cmd_residuals(sc: Scenario):
    tol = {"HJ": sc.tolerances["hj_tol"], "Continuity": sc.tolerances["continuity_tol"],
           "SLE": sc.tolerances["sle_tol"]}
    systems = [sc.params]
    if sc.partner is not None:
        systems.append(sc.partner)
    entries, ok = [], True
    for p in systems:
        for rep in residual_reports(sc, p):
            passed = rep.max_residual < tol[rep.kind]
            ok &= passed
            entries.append({"system": p.system.value, "tolerance": tol[rep.kind], "passed": passed, **rep.to_dict()})
    write_json(sc.out / "residuals.json", {**_scenario_header(sc), "passed": ok, "reports": entries})
    return ok


def _pair(sc: Scenario):
    p, lc = sc.params, sc.lc
    if p.system is System.OSCILLATOR:
        osc = p
        kep = sc.partner if sc.partner is not None else map_parameters(lc, osc)
    else:
        kep = p
        osc = sc.partner if sc.partner is not None else unmap_parameters(lc, kep)
    check_pair(lc, osc, kep)
    return osc, kep


def cmd_equivalence(sc: Scenario):
    osc, kep = _pair(sc)
    rep = map_wavefunction(sc.lc, osc, kep, n_r=sc.n_r, n_theta=sc.n_phi, margin=sc.margin)
    t = sc.tolerances
    checks = {
        "phase": rep.max_phase_deviation < t["phase_tol"],
        "modulus": rep.max_modulus_deviation < t["modulus_tol"],
        "K": rep.K_rel_deviation < t["K_tol"],
    }
    if "mapped_sle" in rep.residuals:
        checks["mapped_sle"] = rep.residuals["mapped_sle"]["max_residual"] < t["sle_tol"]
    ok = all(checks.values())
    write_json(sc.out / "equivalence.json", {**_scenario_header(sc), "checks": checks, "passed": ok,
                                             "report": rep.to_dict()})
    rep.write_matched_csv(sc.out / "matched.csv")
    return ok


def cmd_ensemble(sc: Scenario):
    p = sc.params
    hist = ensemble.sample_density(p, sc.n_samples, sc.n_bins, seed=sc.seed, steps_per_period=sc.steps_per_period)
    mass = bin_masses(p, normalize(p), hist.edges)
    l1 = hist.l1_distance(mass)
    hist.to_csv(sc.out / "histogram.csv", mass)
    ok = l1 < sc.tolerances["l1_tol"]
    write_json(sc.out / "ensemble.json", {
        **_scenario_header(sc),
        "n_samples": sc.n_samples,
        "n_bins": sc.n_bins,
        "l1": l1,
        "l1_tol": sc.tolerances["l1_tol"],
        "passed": ok,
    })
    return ok


COMMANDS = {
    "wavefunction": cmd_wavefunction,
    "residuals": cmd_residuals,
    "equivalence": cmd_equivalence,
    "ensemble": cmd_ensemble,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="cwf-lab", description="Classical wave-function scenario runner.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="flat TOML scenario file")
    ap.add_argument("--grid", help="radial x angular grid, e.g. 256x64")
    ap.add_argument("--margin", type=float, help="fraction of the annulus trimmed at each turning point")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", help="output directory (created if missing)")
    ap.add_argument("--c", type=float, help="Levi-Civita map constant")
    return ap


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage; keep its code (2)
        return int(exc.code or 0)
    try:
        sc = load_scenario(args.config, args)
        sc.out.mkdir(parents=True, exist_ok=True)
        ok = COMMANDS[args.command](sc)
    except CwfError as exc:
        print(f"cwf-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"cwf-lab: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if not ok:
        print(f"cwf-lab: {args.command}: tolerance check failed", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
