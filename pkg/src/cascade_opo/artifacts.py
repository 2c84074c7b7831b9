"""Table/manifest writing and the artifact checker.

Each command writes one or more tables (CSV with a header row, or JSON
``{"columns": [...], "data": [[...], ...]}``) plus ``manifest.json``.  The
manifest records the command, the canonical configuration text, seed,
library versions, wall time and the SHA-256 of every table, so an artifact
directory can be re-validated or regenerated from the manifest alone.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from .criteria import CRITERIA
from .spectra import SIGNAL_QUADRATURES

__all__ = [
    "TABLE_SCHEMAS",
    "ArtifactError",
    "spectrum_columns",
    "write_table",
    "read_table",
    "write_manifest",
    "check_directory",
    "versions",
]

MANIFEST = "manifest.json"


class ArtifactError(ValueError):
    """An artifact failed validation."""


def spectrum_columns():
    """The 21 unique (co)variance column names of the signal quadratures."""
    q = SIGNAL_QUADRATURES
    return [f"V_{q[i]}_{q[j]}" for i in range(6) for j in range(i, 6)]


def _moment_columns():
    cols = ["time"]
    for name in ("a1", "a2", "a3", "b"):
        cols += [f"mean_{name}_re", f"mean_{name}_im"]
    cols += [f"n_{name}" for name in ("a1", "a2", "a3", "b")]
    cols += [f"n_{name}_se" for name in ("a1", "a2", "a3", "b")]
    cols += spectrum_columns()
    cols += ["v123", "v312", "v231", "n_divergent"]
    return cols


TABLE_SCHEMAS = {
    "stability_map": ["chi2", "epsilon", "class", "min_real_part"],
    "spectrum": ["omega"] + spectrum_columns(),
    "criteria_spectrum": ["omega"] + list(CRITERIA) + ["g1", "g2", "g3"],
    "criteria_scan": (["sweep_value", "skipped"] + [f"min_{k}" for k in CRITERIA]
                      + [f"argmin_omega_{k}" for k in CRITERIA]
                      + ["g3_at_s12", "g2_at_s13", "g1_at_s23"]),
    "moments": _moment_columns(),
    "steady": ["quantity", "value"],
}

_TEXT_COLUMNS = {"class", "quantity"}


def versions() -> dict:
    from . import __version__
    return {
        "cascade_opo": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": sys.version.split()[0],
        "platform": platform.platform(),
    }


def _fmt(value):
    if isinstance(value, (str, bool, np.bool_)):
        return str(value) if not isinstance(value, (bool, np.bool_)) else str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_table(path: Path, name: str, columns: dict, fmt: str = "csv") -> Path:
    """Write a table whose columns must match ``TABLE_SCHEMAS[name]``."""
    header = TABLE_SCHEMAS[name]
    if list(columns) != header:
        raise ArtifactError(f"columns for {name!r} do not match its schema")
    n = len(next(iter(columns.values())))
    rows = [[columns[c][i] for c in header] for i in range(n)]
    path = Path(path).with_suffix("." + fmt)
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    elif fmt == "json":
        data = [[v if isinstance(v, str) else float(v) for v in row] for row in rows]
        text = json.dumps({"table": name, "columns": header, "data": data},
                          allow_nan=True, indent=None)
        path.write_text(text + "\n", encoding="utf-8")
    else:
        raise ArtifactError(f"unknown format {fmt!r}")
    return path


def read_table(path: Path):
    """Read a table written by :func:`write_table`.

    Returns ``(header, rows)`` with numeric cells converted to float.
    """
    path = Path(path)
    if path.suffix == ".json":
        obj = json.loads(path.read_text(encoding="utf-8"))
        header = obj["columns"]
        rows = obj["data"]
    else:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
    out = []
    for row in rows:
        if len(row) != len(header):
            raise ArtifactError(f"{path.name}: ragged row")
        out.append([v if h in _TEXT_COLUMNS else float(v) for h, v in zip(header, row)])
    return header, out


def _sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir: Path, command: str, config, tables: dict, wall_time: float,
                   extra: dict | None = None) -> Path:
    """Record how an artifact directory was produced.

    ``tables`` maps table kind to the written path.
    """
    out_dir = Path(out_dir)
    manifest = {
        "command": command,
        "config_text": config.to_ini(),
        "config": config.as_dict(),
        "seed": config.seed,
        "format": config.format,
        "versions": versions(),
        "wall_time_s": wall_time,
        "outputs": [
            {"file": Path(p).name, "table": kind, "sha256": _sha256(p)}
            for kind, p in tables.items()
        ],
    }
    if extra:
        manifest.update(extra)
    path = out_dir / MANIFEST
    path.write_text(json.dumps(manifest, indent=2, default=str) + "\n", encoding="utf-8")
    return path


def _validate_rows(kind: str, header, rows):
    if header != TABLE_SCHEMAS[kind]:
        raise ArtifactError(f"{kind}: header does not match schema")
    if kind == "stability_map":
        allowed = {"BelowThresholdStable", "AboveThresholdUnstable", "NoThresholdStable", "Marginal"}
        for row in rows:
            if row[2] not in allowed:
                raise ArtifactError(f"stability_map: unknown class {row[2]!r}")
    if kind == "criteria_scan":
        for row in rows:
            skipped = bool(row[1])
            if not skipped and not all(math.isfinite(v) for v in row[2:]):
                raise ArtifactError("criteria_scan: non-finite values in a computed row")
            if not skipped and min(row[2:8]) < 0:
                raise ArtifactError("criteria_scan: negative criterion")
        return
    # an infinite threshold is a legitimate steady-state entry
    ok = (lambda v: not math.isnan(v)) if kind == "steady" else math.isfinite
    for row in rows:
        for h, v in zip(header, row):
            if h in _TEXT_COLUMNS:
                continue
            if not ok(v):
                raise ArtifactError(f"{kind}: non-finite value in column {h}")
    if kind == "spectrum":
        diag = [i for i, h in enumerate(header) if h.startswith("V_") and h[2:4] == h[5:7]]
        for row in rows:
            if any(row[i] < 0 for i in diag):
                raise ArtifactError("spectrum: negative variance")


def check_directory(out_dir, reproduce: bool = False) -> list:
    """Re-read and validate every artifact listed in a directory's manifest.

    With ``reproduce`` the command is re-run from the manifest's configuration
    into a temporary directory and the table hashes are compared.

    Returns a list of human-readable report lines; raises ArtifactError on
    the first failure.
    """
    out_dir = Path(out_dir)
    mpath = out_dir / MANIFEST
    if not mpath.exists():
        raise ArtifactError(f"no {MANIFEST} in {out_dir}")
    manifest = json.loads(mpath.read_text(encoding="utf-8"))
    for key in ("command", "config_text", "seed", "versions", "outputs", "wall_time_s"):
        if key not in manifest:
            raise ArtifactError(f"manifest lacks {key!r}")

    from .config import parse_config
    parse_config(manifest["config_text"])

    report = []
    for entry in manifest["outputs"]:
        path = out_dir / entry["file"]
        if not path.exists():
            raise ArtifactError(f"missing output {entry['file']}")
        if _sha256(path) != entry["sha256"]:
            raise ArtifactError(f"hash mismatch for {entry['file']}")
        header, rows = read_table(path)
        _validate_rows(entry["table"], header, rows)
        report.append(f"ok {entry['file']} ({len(rows)} rows)")

    if reproduce:
        import tempfile
        from .cli import run_command
        from .config import parse_config as _parse
        with tempfile.TemporaryDirectory() as tmp:
            cfg = _parse(manifest["config_text"])
            cfg.out = tmp
            run_command(manifest["command"], cfg, quiet=True)
            for entry in manifest["outputs"]:
                if _sha256(Path(tmp) / entry["file"]) != entry["sha256"]:
                    raise ArtifactError(f"{entry['file']} not reproduced from manifest")
                report.append(f"reproduced {entry['file']}")
    return report
