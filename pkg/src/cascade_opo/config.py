"""Run configuration files.

Configurations are INI-style text: ``[section]`` headers followed by
``key = value`` lines; ``#`` and ``;`` start comments.  Every key is
optional unless noted, and unknown sections or keys are rejected.

Sections and keys
-----------------
``[params]``
    ``gamma0 gamma1 gamma2 gamma3 chi1 chi2 epsilon`` (floats, defaults are
    the standard point g0=g1=g3=1, g2=3, chi1=0.01, chi2=0.004, epsilon=0);
    ``pump_scale`` in {absolute, eps_c, eps_c_opo}: unit of ``epsilon``;
    ``chi2_scale`` in {absolute, chi1, chi2_crit}: unit of ``chi2``.
``[run]``
    ``seed`` (int), ``out`` (directory), ``format`` in {csv, json}.
``[stability_map]``
    ``chi2_min chi2_max n_chi2 eps_min eps_max n_eps tolerance``; ``chi2_*``
    use ``chi2_scale`` and ``eps_*`` use ``pump_scale``.
``[spectrum]``
    ``omega_max`` (units of gamma0), ``n_omega``.
``[criteria_scan]``
    ``sweep`` in {pump, chi2}, ``start stop n`` (same units as the swept
    parameter), ``omega_min omega_max`` (units of gamma0), ``n_omega``.
``[simulate]``
    ``representation`` in {PositiveP, TruncatedWigner}, ``dt t_final n_traj
    divergence_bound sample_interval chunk_size workers``.

All rates are in units of gamma1.
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field

from .model import SystemParams, classify_regime
from .sde import Representation, SdeConfig

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config", "SCHEMA"]


class ConfigError(ValueError):
    """Invalid configuration text or values."""


SCHEMA = {
    "params": {
        "gamma0": float, "gamma1": float, "gamma2": float, "gamma3": float,
        "chi1": float, "chi2": float, "epsilon": float,
        "pump_scale": str, "chi2_scale": str,
    },
    "run": {"seed": int, "out": str, "format": str},
    "stability_map": {
        "chi2_min": float, "chi2_max": float, "n_chi2": int,
        "eps_min": float, "eps_max": float, "n_eps": int, "tolerance": float,
    },
    "spectrum": {"omega_max": float, "n_omega": int},
    "criteria_scan": {
        "sweep": str, "start": float, "stop": float, "n": int,
        "omega_min": float, "omega_max": float, "n_omega": int,
    },
    "simulate": {
        "representation": str, "dt": float, "t_final": float, "n_traj": int,
        "divergence_bound": float, "sample_interval": float, "chunk_size": int,
        "workers": int,
    },
}

PUMP_SCALES = ("absolute", "eps_c", "eps_c_opo")
CHI2_SCALES = ("absolute", "chi1", "chi2_crit")


@dataclass
class RunConfig:
    """Validated, fully-resolved configuration."""

    params: SystemParams
    raw_params: dict
    pump_scale: str = "absolute"
    chi2_scale: str = "absolute"
    seed: int = 0
    out: str | None = None
    format: str = "csv"
    stability_map: dict = field(default_factory=dict)
    spectrum: dict = field(default_factory=dict)
    criteria_scan: dict = field(default_factory=dict)
    simulate: dict = field(default_factory=dict)

    def pump_unit(self, params: SystemParams | None = None) -> float:
        p = params or self.params
        if self.pump_scale == "absolute":
            return 1.0
        report = classify_regime(p)
        if self.pump_scale == "eps_c_opo":
            return report.eps_c_opo
        if not report.has_threshold:
            raise ConfigError("pump_scale = eps_c requires a regime with a threshold")
        return report.eps_c

    def chi2_unit(self) -> float:
        if self.chi2_scale == "absolute":
            return 1.0
        if self.chi2_scale == "chi1":
            return self.params.chi1
        return classify_regime(self.params).chi2_crit

    def sde_config(self) -> SdeConfig:
        s = dict(self.simulate)
        s.setdefault("representation", Representation.TRUNCATED_WIGNER.value)
        try:
            return SdeConfig(seed=self.seed, **s)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[simulate]: {exc}") from exc

    def to_ini(self) -> str:
        """Canonical text form, enough to reproduce a run."""
        cp = configparser.ConfigParser()
        cp["params"] = {k: repr(v) if isinstance(v, float) else str(v)
                        for k, v in self.raw_params.items()}
        cp["run"] = {"seed": str(self.seed), "format": self.format}
        for sec in ("stability_map", "spectrum", "criteria_scan", "simulate"):
            block = getattr(self, sec)
            if block:
                cp[sec] = {k: repr(v) if isinstance(v, float) else str(v) for k, v in block.items()}
        from io import StringIO
        buf = StringIO()
        cp.write(buf)
        return buf.getvalue()

    def as_dict(self) -> dict:
        return {
            "params": asdict(self.params),
            "pump_scale": self.pump_scale,
            "chi2_scale": self.chi2_scale,
            "seed": self.seed,
            "format": self.format,
            "stability_map": self.stability_map,
            "spectrum": self.spectrum,
            "criteria_scan": self.criteria_scan,
            "simulate": self.simulate,
        }


def _convert(section, key, text, typ):
    try:
        if typ is int:
            value = float(text)
            if not value.is_integer():
                raise ValueError
            return int(value)
        return typ(text)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {text!r} as {typ.__name__}") from None


def parse_config(text: str) -> RunConfig:
    """Parse and validate configuration text."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc

    blocks = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        block = {}
        for key, value in cp[section].items():
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            block[key] = _convert(section, key, value, SCHEMA[section][key])
        blocks[section] = block

    raw = dict(blocks.get("params", {}))
    pump_scale = raw.pop("pump_scale", "absolute")
    chi2_scale = raw.pop("chi2_scale", "absolute")
    if pump_scale not in PUMP_SCALES:
        raise ConfigError(f"pump_scale must be one of {PUMP_SCALES}")
    if chi2_scale not in CHI2_SCALES:
        raise ConfigError(f"chi2_scale must be one of {CHI2_SCALES}")

    base = {"gamma0": 1.0, "gamma1": 1.0, "gamma2": 3.0, "gamma3": 1.0,
            "chi1": 0.01, "chi2": 0.004, "epsilon": 0.0}
    base.update(raw)
    try:
        # resolve chi2 first: the pump unit may depend on it
        p = SystemParams(**{**base, "epsilon": 0.0, "chi2": 0.0})
        chi2_unit = {"absolute": 1.0, "chi1": p.chi1,
                     "chi2_crit": classify_regime(p).chi2_crit}[chi2_scale]
        p = p.with_(chi2=base["chi2"] * chi2_unit)
        cfg = RunConfig(params=p, raw_params={**raw, "pump_scale": pump_scale,
                                               "chi2_scale": chi2_scale},
                        pump_scale=pump_scale, chi2_scale=chi2_scale)
        cfg.params = p.with_(epsilon=base["epsilon"] * cfg.pump_unit(p))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[params]: {exc}") from exc

    run = blocks.get("run", {})
    cfg.seed = run.get("seed", 0)
    cfg.out = run.get("out")
    cfg.format = run.get("format", "csv")
    if cfg.format not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    for sec in ("stability_map", "spectrum", "criteria_scan", "simulate"):
        setattr(cfg, sec, blocks.get(sec, {}))

    if cfg.criteria_scan.get("sweep", "pump") not in ("pump", "chi2"):
        raise ConfigError("[criteria_scan] sweep must be pump or chi2")
    for sec, key in (("stability_map", "n_chi2"), ("stability_map", "n_eps"),
                     ("spectrum", "n_omega"), ("criteria_scan", "n"),
                     ("criteria_scan", "n_omega")):
        if key in getattr(cfg, sec) and getattr(cfg, sec)[key] < 1:
            raise ConfigError(f"[{sec}] {key} must be at least 1")
    if "representation" in cfg.simulate:
        try:
            Representation(cfg.simulate["representation"])
        except ValueError:
            raise ConfigError("[simulate] representation must be PositiveP or TruncatedWigner") from None
    if cfg.simulate:
        cfg.sde_config()
    return cfg


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
