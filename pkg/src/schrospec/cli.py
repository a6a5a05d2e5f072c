"""Command-line entry point: ``schrospec <subcommand> [flags]``.

Every run writes ``report.json`` (floats rounded to 12 significant digits)
plus CSV tables and binary ``.cgrid`` grids into ``--out``.  A JSON config
file supplies defaults that explicit flags override.  Exit status is 0 on
success, 1 when a checked contract fails and 2 on a malformed
configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from enum import Enum
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import acceptance
from .asymptotics import classify_blowup, classify_global, decay_snapshots, fit_decay_exponent, profile_distances
from .evolution import expansion_coeffs, initial_data, propagate, rescale_forward
from .grids import CGrid
from .kernel import compute_kernel, fit_phase_law, kernel_exact_m1, wkbj_params
from .nonlin import explicit_pair_minus, explicit_pair_plus, nlep_residual
from .polyalg import SpectralParams, hermite_star, multi_indices_upto, verify_eigenpair
from .regularity import Family, PhiSpec, integrate_vertex_ode, petrovskii_integral
from .seqspace import admissible_growth, mode_norm_estimate

SUBCOMMANDS = ("kernel", "eigen", "evolve", "classify", "blowup", "regularity", "nlep", "seqspace", "acceptance")

# config key -> accepted types
SCHEMA = {
    "m": int,
    "N": int,
    "grid_size": int,
    "extent": (int, float),
    "max_order": int,
    "out": str,
    "seed": int,
    "data": str,
    "k": int,
    "times": list,
    "T": (int, float),
    "family": str,
    "params": list,
    "table": str,
    "tau_max": (int, float),
    "vertex_tau": (int, float),
    "check": str,
    "n": (int, float),
    "criteria": list,
    "frame": str,
}

DEFAULTS = {
    "m": 1,
    "N": 1,
    "grid_size": 1024,
    "extent": 16.0,
    "max_order": 8,
    "out": "out",
    "seed": 0,
    "data": "gaussian",
    "k": 1,
    "times": [1.0, 2.0, 4.0, 8.0, 16.0],
    "T": 1.0,
    "family": "petrovskii_sqrtlog",
    "params": [],
    "table": None,
    "tau_max": 1e6,
    "vertex_tau": 100.0,
    "check": "qq9",
    "n": 1.0,
    "criteria": None,
    "frame": "shifted",
}


class ConfigError(ValueError):
    """The configuration does not match the schema."""


def rounded(obj):
    """JSON-ready copy with floats rounded to 12 significant digits."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if not math.isfinite(x) or x == 0 else float(f"{x:.12g}")
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": rounded(obj.real), "im": rounded(obj.imag)}
    if isinstance(obj, dict):
        return {(k if isinstance(k, str) else str(k)): rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [rounded(v) for v in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _write_json(path: Path, obj) -> None:
    # non-finite floats become strings so the file stays valid JSON
    def clean(o):
        if isinstance(o, float) and not math.isfinite(o):
            return str(o)
        if isinstance(o, dict):
            return {k: clean(v) for k, v in o.items()}
        if isinstance(o, list):
            return [clean(v) for v in o]
        return o

    path.write_text(json.dumps(clean(rounded(obj)), indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def validate(cfg: dict) -> dict:
    for key, val in cfg.items():
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        if val is None:
            continue
        types = SCHEMA[key]
        if isinstance(val, bool) or not isinstance(val, types):
            raise ConfigError(f"config key {key!r} has wrong type {type(val).__name__}")
    if cfg["m"] < 1 or cfg["N"] < 1:
        raise ConfigError("m and N must be positive")
    if cfg["grid_size"] < 2 or cfg["extent"] <= 0:
        raise ConfigError("grid_size must be >= 2 and extent positive")
    if cfg["max_order"] < 0:
        raise ConfigError("max_order must be non-negative")
    if cfg["family"] not in {f.value for f in Family}:
        raise ConfigError(f"unknown phi family {cfg['family']!r}")
    if cfg["check"] not in ("qq9", "qq10"):
        raise ConfigError("check must be qq9 (explicit global pair) or qq10 (constant pair)")
    if cfg["frame"] not in ("shifted", "plain"):
        raise ConfigError("frame must be shifted or plain")
    return cfg


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=int)
    common.add_argument("--N", type=int)
    common.add_argument("--grid-size", type=int, dest="grid_size")
    common.add_argument("--extent", type=float)
    common.add_argument("--max-order", type=int, dest="max_order")
    common.add_argument("--out")
    common.add_argument("--config")
    common.add_argument("--seed", type=int)
    p = argparse.ArgumentParser(prog="schrospec", description="Spectral toolkit for higher-order Schroedinger operators.")
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name, parents=[common])
        if name in ("evolve", "classify", "blowup"):
            s.add_argument("--data", help="gaussian, hermite_gaussian or bump")
            s.add_argument("--k", type=int, help="power of y for hermite_gaussian")
        if name in ("evolve", "classify"):
            s.add_argument("--times", type=float, nargs="+")
        if name == "blowup":
            s.add_argument("--T", type=float)
        if name == "regularity":
            s.add_argument("--family")
            s.add_argument("--params", type=float, nargs="*")
            s.add_argument("--table", help="two-column CSV (tau, phi) for custom_table")
            s.add_argument("--tau-max", type=float, dest="tau_max")
            s.add_argument("--vertex-tau", type=float, dest="vertex_tau")
        if name == "nlep":
            s.add_argument("--check", help="qq9: explicit global pair (m = 1); qq10: constant pair")
            s.add_argument("--n", type=float)
        if name == "acceptance":
            s.add_argument("--criteria", type=int, nargs="+")
            s.add_argument("--frame", help="rescaling frame for criterion 5")
    return p


def build_config(argv) -> dict:
    ns = _parser().parse_args(argv)
    cfg = dict(DEFAULTS)
    if ns.config:
        try:
            loaded = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config must be a JSON object")
        for key in loaded:
            if key not in SCHEMA:
                raise ConfigError(f"unknown config key {key!r}")
        cfg.update(loaded)
    for key, val in vars(ns).items():
        if key in ("config", "subcommand") or val is None:
            continue
        cfg[key] = val
    cfg["subcommand"] = ns.subcommand
    sub = cfg.pop("subcommand")
    validate(cfg)
    cfg["subcommand"] = sub
    return cfg


# -- subcommands -------------------------------------------------------------


def _data_grid(cfg) -> CGrid:
    g = CGrid.centered((cfg["grid_size"],) * cfg["N"], cfg["extent"])
    return initial_data(cfg["data"], g, k=cfg["k"])


def run_kernel(cfg, sp, out):
    F = compute_kernel(sp, (cfg["grid_size"],) * sp.N, cfg["extent"], method="auto")
    F.save(out / "kernel.cgrid")
    F.to_csv(out / "kernel.csv")
    report = {"shape": F.shape, "extent": cfg["extent"]}
    ok = True
    if sp.m == 1:
        err = float(np.abs(F.data - kernel_exact_m1(F.points() if sp.N > 1 else F.axes()[0], N=sp.N)).max())
        report["sup_error_vs_closed_form"] = err
        ok = err <= 1e-6
    elif sp.N == 1 and cfg["extent"] >= 15:
        z, rms = fit_phase_law(F, (5.0, 15.0), sp.alpha)
        report.update(fitted_z=z, predicted_z=wkbj_params(sp.m).z_m, fit_rms=rms)
    return report, ok


def run_eigen(cfg, sp, out):
    rows, ok = [], True
    for beta in multi_indices_upto(cfg["max_order"], sp.N):
        zero = verify_eigenpair(beta, sp).is_zero()
        ok &= zero
        rows.append({"beta": list(beta), "eigenvalue": sp.eigenvalue(beta), "exact_zero": zero, "psi_star": hermite_star(beta, sp).to_json_dict()})
    return {"eigenpairs": rows, "all_exact_zero": ok}, ok


def run_evolve(cfg, sp, out):
    u0 = _data_grid(cfg)
    coeffs = expansion_coeffs(u0, cfg["max_order"], sp)
    tgt = CGrid.centered((256,) * sp.N, 3.0)
    norms = []
    for t in cfg["times"]:
        u = propagate(u0, t, sp)
        st = rescale_forward(u, t, sp, tgt)
        st.grid.save(out / f"rescaled_t{t:g}.cgrid")
        st.grid.to_csv(out / f"rescaled_t{t:g}.csv")
        norms.append((t, st.time, u.l2_norm()))
    _write_csv(out / "norms.csv", ["t", "tau", "l2_norm"], norms)
    return {"coefficients": coeffs.to_json_dict(), "times": cfg["times"], "l2_norms": [r[2] for r in norms]}, True


def run_classify(cfg, sp, out):
    u0 = _data_grid(cfg)
    cls = classify_global(u0, sp)
    snaps = decay_snapshots(u0, sp, cfg["times"], window=1.0)
    _write_csv(out / "decay.csv", ["t", "sup_rescaled"], snaps)
    report = {"l": cls.l, "predicted_exponent": -cls.predicted_exponent, "phi_l": cls.phi_l.to_json_dict()}
    if len(snaps) >= 5:
        report["exponent"] = fit_decay_exponent(snaps)
    if sp.N == 1:
        report["residuals"] = profile_distances(u0, sp, cls.l, cfg["times"])
    return report, True


def run_blowup(cfg, sp, out):
    u0 = _data_grid(cfg)
    bc = classify_blowup(u0, cfg["T"], sp, L=cfg["max_order"])
    return {"l": bc.l, "profile": bc.poly_combo.to_json_dict(), "moments": bc.coeffs.to_json_dict(), "residuals": bc.residuals}, True


def run_regularity(cfg, sp, out):
    fam = Family(cfg["family"])
    if fam is Family.TABLE:
        if not cfg["table"]:
            raise ConfigError("custom_table needs --table")
        phi = PhiSpec.from_csv(cfg["table"])
    else:
        phi = PhiSpec(fam, tuple(cfg["params"]))
    test = petrovskii_integral(phi, cfg["tau_max"])
    traj = integrate_vertex_ode(phi, (math.e, cfg["vertex_tau"]), 1.0)
    _write_csv(out / "vertex.csv", ["tau", "b0", "d0", "abs_a0"], zip(traj.taus, traj.b0, traj.d0, traj.modulus))
    report = {
        "family": fam.value,
        "params": list(phi.params),
        "integral": test.value,
        "partials": test.partials,
        "ratio": test.ratio,
        "assessment": test.assessment,
        "heat_verdict": test.verdict,
        "vertex_verdict": traj.verdict,
        "slow_growth": phi.slow_growth(),
    }
    return report, True


def run_nlep(cfg, sp, out):
    if cfg["check"] == "qq9":
        pair = explicit_pair_plus(cfg["n"], sp.N, sp.m)
    else:
        pair = explicit_pair_minus(sp.m, sp.N, cfg["n"])
    grid = CGrid.centered((cfg["grid_size"],) * sp.N, cfg["extent"])
    res, sup = nlep_residual(pair, grid)
    res.to_csv(out / "residual.csv")
    report = {"alpha": pair.alpha, "beta_exp": pair.beta_exp, "sign": pair.sign, "sup_residual": sup, "grid": {"shape": grid.shape, "extent": cfg["extent"]}}
    return report, True


def run_seqspace(cfg, sp, out):
    r = acceptance.sequence_space(cfg["seed"])
    thresh = 2 * (sp.m - 1) / sp.m
    est = [(l, mode_norm_estimate(l, sp)) for l in range(2, cfg["max_order"] + 1)] if cfg["max_order"] >= 2 else []
    _write_csv(out / "mode_norms.csv", ["l", "estimate"], est)
    report = dict(r.metrics)
    report.update(growth_threshold=thresh, zero_rate_admissible=admissible_growth(0.0, sp))
    return report, r.passed


def run_acceptance(cfg, sp, out):
    nums = cfg["criteria"] or sorted(acceptance.RECIPES)
    results = []
    for k in nums:
        if k not in acceptance.RECIPES:
            raise ConfigError(f"no criterion {k}")
        if k == 5:
            r = acceptance.semigroup_expansion(frame=cfg["frame"])
        else:
            r = acceptance.RECIPES[k]()
        print(r.line())
        results.append(r)
    _write_csv(out / "acceptance.csv", ["criterion", "name", "passed", "seconds"], [(r.number, r.name, r.passed, r.seconds) for r in results])
    report = {str(r.number): {"name": r.name, "passed": r.passed, "metrics": r.metrics} for r in results}
    return report, all(r.passed for r in results)


RUNNERS = {
    "kernel": run_kernel,
    "eigen": run_eigen,
    "evolve": run_evolve,
    "classify": run_classify,
    "blowup": run_blowup,
    "regularity": run_regularity,
    "nlep": run_nlep,
    "seqspace": run_seqspace,
    "acceptance": run_acceptance,
}


def run(cfg: dict) -> int:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    sp = SpectralParams(cfg["m"], cfg["N"])
    report, ok = RUNNERS[cfg["subcommand"]](cfg, sp, out)
    report = {"subcommand": cfg["subcommand"], "m": sp.m, "N": sp.N, "seed": cfg["seed"], "ok": ok, "result": report}
    _write_json(out / "report.json", report)
    return 0 if ok else 1


def main(argv=None) -> int:
    try:
        cfg = build_config(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"schrospec: config error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(cfg)
    except ConfigError as exc:
        print(f"schrospec: config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, NotImplementedError) as exc:
        print(f"schrospec {cfg['subcommand']}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
