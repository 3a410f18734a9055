"""CSV/JSON output of sweep results.

Everything written here is a pure function of the sweep result: no
timestamps or wall-clock timings, so identical runs give identical bytes.
"""
from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path

import numpy as np

from ..observables import SUMMARY_ZERO
from .sweep import PointResult, SweepResult

__all__ = ["emit", "format_number", "summary_columns", "summary_row"]

_POINT_FIELDS = ["anisotropy", "gamma", "delta", "B1", "B2", "nbar", "initial_state"]


def format_number(x) -> str:
    """12 significant digits in scientific notation."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.11e}"


def summary_columns(pairs, tau2_sites, n_sites) -> list[str]:
    return (_POINT_FIELDS + ["reference_range"]
            + [f"C_{i}_{j}" for i, j in pairs] + [f"tau2_{s}" for s in tau2_sites]
            + [f"Sz_{s}" for s in range(1, n_sites + 1)]
            + ["converged", "t_converged", "trace_distance_final", "cptp_passed",
               "max_trace_error", "max_hermiticity", "min_eigenvalue", "error"])


def summary_row(r: PointResult, pairs, tau2_sites, n_sites) -> list:
    p = r.point
    row = [p.anisotropy, p.gamma, p.delta, p.B1, p.B2, p.nbar, p.initial_state, p.reference_range]
    s = r.steady
    if "concurrences" in s:
        # solver noise below SUMMARY_ZERO is reported as an exact zero
        row += [0.0 if s["concurrences"][q] < SUMMARY_ZERO else s["concurrences"][q] for q in pairs]
        row += [s["tau2"][t] for t in tau2_sites]
        row += list(s["spin_z"])
    else:
        row += [None] * (len(pairs) + len(tau2_sites) + n_sites)
    row += [s.get("converged"), s.get("t_converged"), s.get("trace_distance_final"),
            r.cptp.get("passed"), r.cptp.get("trace_error"), r.cptp.get("hermiticity"),
            r.cptp.get("min_eigenvalue"), r.error or ""]
    return row


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    return format_number(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, float, np.floating, np.integer)):
        return float(format_number(v))
    return v


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def emit(result: SweepResult, out_dir, fmt: str = "csv") -> list[Path]:
    """Write one trajectory file per point, a steady-state summary and metadata.

    Parameters
    ----------
    result : SweepResult
        Possibly partially failed sweep; failed points appear in the summary
        with their error message and no trajectory file.
    out_dir : path-like
        Created if missing.
    fmt : {"csv", "json"}

    Returns
    -------
    list of Path
        Files written, in a deterministic order.

    Raises
    ------
    OSError
        If ``out_dir`` cannot be created or written.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown output format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"output directory {out} is not writable")

    cfg = result.config
    pairs = cfg.reported_pairs
    tau2_sites = cfg.tau2_sites
    n = cfg.lattice.n_sites
    written = []
    ordered = sorted(result.points.values(), key=lambda r: r.point.label)

    for r in ordered:
        if r.series is None:
            continue
        if fmt == "csv":
            path = out / f"{r.point.label}.csv"
            _write_csv(path, r.series.columns, r.series.values)
        else:
            path = out / f"{r.point.label}.json"
            doc = {"point": r.point.label, "columns": r.series.columns,
                   "rows": [[_json_value(v) for v in row] for row in r.series.values]}
            path.write_text(json.dumps(doc) + "\n")
        written.append(path)

    header = summary_columns(pairs, tau2_sites, n)
    rows = [summary_row(r, pairs, tau2_sites, n) for r in ordered]
    if fmt == "csv":
        path = out / "steady_summary.csv"
        _write_csv(path, header, rows)
    else:
        path = out / "steady_summary.json"
        recs = [{k: _json_value(v) for k, v in zip(header, row)} for row in rows]
        path.write_text(json.dumps(recs, indent=1) + "\n")
    written.append(path)

    meta = dict(result.metadata)
    meta["name"] = cfg.name
    meta["points"] = [r.point.label for r in ordered]
    path = out / "metadata.json"
    path.write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")
    written.append(path)
    return written
