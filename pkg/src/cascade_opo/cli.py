"""Command-line harness producing figure data.

Usage::

    python -m cascade_opo <command> --config run.ini --out DIR [--seed N] [--format csv|json]

Commands: steady, stability-map, spectrum, criteria-scan, simulate, check.
Exit status is 0 on success, 2 for configuration/validation errors and 3 for
numerical failures (marginal points, singular spectra, too many divergent
trajectories).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .artifacts import ArtifactError, check_directory, spectrum_columns, write_manifest, write_table
from .config import ConfigError, RunConfig, load_config, parse_config
from .criteria import CRITERIA, criteria_spectrum, scan_minimum
from .model import classify_regime, mean_field_residual, steady_state
from .sde import run_ensemble, vijk_timeseries
from .spectra import AboveThresholdError, SingularSpectrumError, compute_spectra, default_omega_grid
from .stability import EigenSolverError, stability_map

__all__ = ["main", "run_command", "NumericalFailure", "COMMANDS"]

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


class NumericalFailure(RuntimeError):
    """The computation finished but its result cannot be trusted."""


def _out_dir(cfg: RunConfig) -> Path:
    if not cfg.out:
        raise ConfigError("an output directory is required (--out or [run] out)")
    path = Path(cfg.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_steady(cfg: RunConfig, quiet: bool = False) -> dict:
    p = cfg.params
    report = classify_regime(p)
    state = steady_state(p)
    result = {
        "regime": report.regime.value,
        "eps_c": report.eps_c,
        "eps_c_opo": report.eps_c_opo,
        "chi2_crit": report.chi2_crit,
        "epsilon": p.epsilon,
        "above_threshold": state.above_threshold,
        "beta_re": state.beta.real, "beta_im": state.beta.imag,
        "alpha1_re": state.alpha1.real, "alpha1_im": state.alpha1.imag,
        "alpha2_re": state.alpha2.real, "alpha2_im": state.alpha2.imag,
        "alpha3_re": state.alpha3.real, "alpha3_im": state.alpha3.imag,
        "intensity_beta": float(abs(state.beta) ** 2),
        "intensity_alpha1": float(abs(state.alpha1) ** 2),
        "intensity_alpha2": float(abs(state.alpha2) ** 2),
        "intensity_alpha3": float(abs(state.alpha3) ** 2),
        "residual": mean_field_residual(p, state),
    }
    if not quiet:
        if cfg.format == "json":
            print(json.dumps(result, indent=2))
        else:
            for k, v in result.items():
                print(f"{k:>18s}  {v:.10g}" if isinstance(v, float) else f"{k:>18s}  {v}")
    tables = {}
    if cfg.out:
        out = _out_dir(cfg)
        keys = [k for k in result if k != "regime"]
        vals = [float(result[k]) for k in keys]
        tables["steady"] = write_table(out / "steady", "steady",
                                       {"quantity": ["regime_code"] + keys,
                                        "value": [list(type(report.regime)).index(report.regime)] + vals},
                                       cfg.format)
    return {"result": result, "tables": tables}


def cmd_stability_map(cfg: RunConfig, quiet: bool = False) -> dict:
    s = cfg.stability_map
    cu = cfg.chi2_unit()
    chi2 = np.linspace(s.get("chi2_min", 0.0), s.get("chi2_max", 3.0), s.get("n_chi2", 61)) * cu
    pu = cfg.pump_unit()
    eps = np.linspace(s.get("eps_min", 0.0), s.get("eps_max", 300.0), s.get("n_eps", 61)) * pu
    classes, min_real = stability_map(cfg.params, chi2, eps, s.get("tolerance", 1e-9))
    C, E = np.meshgrid(chi2, eps, indexing="ij")
    out = _out_dir(cfg)
    table = write_table(out / "stability_map", "stability_map", {
        "chi2": C.ravel(), "epsilon": E.ravel(),
        "class": [c.value for c in classes.ravel()], "min_real_part": min_real.ravel(),
    }, cfg.format)
    return {"tables": {"stability_map": table}}


def cmd_spectrum(cfg: RunConfig, quiet: bool = False) -> dict:
    s = cfg.spectrum
    omega = default_omega_grid(cfg.params.gamma0, s.get("n_omega", 1001), s.get("omega_max", 10.0))
    spec = compute_spectra(cfg.params, omega)
    crit = criteria_spectrum(cfg.params, omega)
    out = _out_dir(cfg)
    cols = {"omega": omega}
    iu = np.triu_indices(6)
    for name, i, j in zip(spectrum_columns(), *iu):
        cols[name] = spec.quad_out[:, i, j]
    t1 = write_table(out / "spectrum", "spectrum", cols, cfg.format)
    g = np.array([x.as_array() for x in crit.gains])
    cols = {"omega": omega, **{k: getattr(crit, k) for k in CRITERIA},
            "g1": g[:, 0], "g2": g[:, 1], "g3": g[:, 2]}
    t2 = write_table(out / "criteria_spectrum", "criteria_spectrum", cols, cfg.format)
    return {"tables": {"spectrum": t1, "criteria_spectrum": t2}}


def cmd_criteria_scan(cfg: RunConfig, quiet: bool = False) -> dict:
    s = cfg.criteria_scan
    sweep = s.get("sweep", "pump")
    unit = cfg.pump_unit() if sweep == "pump" else cfg.chi2_unit()
    values = np.linspace(s.get("start", 0.0), s.get("stop", 1.0), s.get("n", 21))
    res = scan_minimum(cfg.params, sweep, values * unit,
                       (s.get("omega_min", 0.0), s.get("omega_max", 10.0)), s.get("n_omega", 1001))
    out = _out_dir(cfg)
    cols = {"sweep_value": values, "skipped": res.skipped.astype(int)}
    cols.update({f"min_{k}": res.minima[k] for k in CRITERIA})
    cols.update({f"argmin_omega_{k}": res.argmin_omega[k] for k in CRITERIA})
    cols["g3_at_s12"] = res.gains_at_min["s12"][:, 2]
    cols["g2_at_s13"] = res.gains_at_min["s13"][:, 1]
    cols["g1_at_s23"] = res.gains_at_min["s23"][:, 0]
    table = write_table(out / "criteria_scan", "criteria_scan", cols, cfg.format)
    return {"tables": {"criteria_scan": table}}


def cmd_simulate(cfg: RunConfig, quiet: bool = False) -> dict:
    sde_cfg = cfg.sde_config()
    m = run_ensemble(cfg.params, sde_cfg)
    out = _out_dir(cfg)
    cols = {"time": m.times}
    for k, name in enumerate(("a1", "a2", "a3", "b")):
        cols[f"mean_{name}_re"] = m.mean_amplitude[:, k].real
        cols[f"mean_{name}_im"] = m.mean_amplitude[:, k].imag
    for k, name in enumerate(("a1", "a2", "a3", "b")):
        cols[f"n_{name}"] = m.intensity[:, k]
    for k, name in enumerate(("a1", "a2", "a3", "b")):
        cols[f"n_{name}_se"] = m.intensity_se[:, k]
    iu = np.triu_indices(6)
    for name, i, j in zip(spectrum_columns(), *iu):
        cols[name] = m.quad_cov[:, i, j]
    v = vijk_timeseries(m)
    cols["v123"], cols["v312"], cols["v231"] = v[:, 0], v[:, 1], v[:, 2]
    cols["n_divergent"] = np.full(m.times.size, m.n_divergent)
    table = write_table(out / "moments", "moments", cols, cfg.format)
    result = {"tables": {"moments": table},
              "extra": {"n_divergent": m.n_divergent, "unreliable": m.unreliable}}
    if m.unreliable:
        result["failure"] = (f"{m.n_divergent} of {m.n_traj} trajectories diverged; "
                             "result marked unreliable")
    return result


COMMANDS = {
    "steady": cmd_steady,
    "stability-map": cmd_stability_map,
    "spectrum": cmd_spectrum,
    "criteria-scan": cmd_criteria_scan,
    "simulate": cmd_simulate,
}


def run_command(name: str, cfg: RunConfig, quiet: bool = False) -> dict:
    """Run one data-producing command and write its manifest."""
    t0 = time.perf_counter()
    result = COMMANDS[name](cfg, quiet=quiet)
    wall = time.perf_counter() - t0
    if result.get("tables"):
        write_manifest(_out_dir(cfg), name, cfg, result["tables"], wall, result.get("extra"))
    return result


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cascade-opo", description=__doc__.split("\n")[0])
    parser.add_argument("command", choices=list(COMMANDS) + ["check"])
    parser.add_argument("--config", type=Path, help="configuration file (INI sections)")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--seed", type=int, help="master RNG seed")
    parser.add_argument("--format", choices=("csv", "json"), help="table format")
    parser.add_argument("--reproduce", action="store_true",
                        help="check: re-run the manifest and compare hashes")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            if args.out is None:
                raise ConfigError("check needs --out DIR")
            for line in check_directory(args.out, reproduce=args.reproduce):
                print(line)
            return EXIT_OK
        cfg = load_config(args.config) if args.config else parse_config("")
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out = str(args.out)
        if args.format is not None:
            cfg.format = args.format
        result = run_command(args.command, cfg)
    except (ConfigError, ArtifactError, AboveThresholdError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SingularSpectrumError, EigenSolverError, NumericalFailure) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if "failure" in result:
        print(f"numerical failure: {result['failure']}", file=sys.stderr)
        return EXIT_NUMERICAL
    for kind, path in result.get("tables", {}).items():
        print(f"wrote {path}")
    return EXIT_OK
