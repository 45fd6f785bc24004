"""File formats: trace CSV, surface and grid exports, JSON reports.

All floats are written with 17 significant digits so every file
round-trips bit-exactly; integer counts stay integers.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .campaign import CampaignResult
from .directmle import Grid3
from .errors import TraceParseError
from .measurement import DataTrace
from .spectral import LikelihoodSurface

__all__ = [
    "save_trace",
    "load_trace",
    "save_surface",
    "load_surface",
    "save_grid3",
    "save_periodogram",
    "save_campaign_cells",
    "save_campaign_runs",
    "save_error_histogram",
    "save_json",
    "load_json",
    "emit_plot_data",
]

TRACE_HEADER = "t,successes,shots"
SURFACE_HEADER = "omega,delta_omega,loglik"
GRID3_HEADER = "omega_cap,alpha,epsilon,loglik"
PERIODOGRAM_HEADER = "omega,power"


def _fmt(x: float) -> str:
    return "%.17g" % float(x)


def save_trace(trace: DataTrace, path) -> Path:
    """Write a trace as CSV with header ``t,successes,shots``."""
    path = Path(path)
    lines = [TRACE_HEADER]
    for t, s, n in zip(trace.times, trace.successes, trace.shots):
        lines.append("%s,%d,%d" % (_fmt(t), s, n))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_trace(path) -> DataTrace:
    """Parse a trace CSV; raises TraceParseError with line context."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise TraceParseError("cannot read trace file %s: %s" % (path, err)) from err
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise TraceParseError("%s: empty file (expected header %r)" % (path, TRACE_HEADER))
    if lines[0].strip() != TRACE_HEADER:
        raise TraceParseError(
            "%s, line 1: bad header %r (expected %r)" % (path, lines[0].strip(), TRACE_HEADER)
        )
    times, successes, shots = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 3:
            raise TraceParseError("%s, line %d: expected 3 fields, got %d" % (path, lineno, len(parts)))
        try:
            times.append(float(parts[0]))
            successes.append(int(parts[1]))
            shots.append(int(parts[2]))
        except ValueError as err:
            raise TraceParseError("%s, line %d: %s" % (path, lineno, err)) from err
    if not times:
        raise TraceParseError("%s: no data rows" % path)
    return DataTrace(
        times=np.array(times), successes=np.array(successes), shots=np.array(shots)
    )


def save_surface(surface: LikelihoodSurface, path) -> Path:
    """Flat CSV of the likelihood surface (NaN for degenerate cells)."""
    path = Path(path)
    lines = [SURFACE_HEADER]
    for i, omega in enumerate(surface.omegas):
        for j, delta_omega in enumerate(surface.delta_omegas):
            lines.append(
                "%s,%s,%s" % (_fmt(omega), _fmt(delta_omega), _fmt(surface.values[i, j]))
            )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_surface(path) -> dict:
    """Re-parse a surface CSV into its three flat columns."""
    path = Path(path)
    lines = [line for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines or lines[0].strip() != SURFACE_HEADER:
        raise TraceParseError("%s: bad surface header (expected %r)" % (path, SURFACE_HEADER))
    data = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
    return {"omega": data[:, 0], "delta_omega": data[:, 1], "loglik": data[:, 2]}


def save_grid3(grid: Grid3, path) -> Path:
    """Flat CSV of the direct-likelihood scan."""
    path = Path(path)
    lines = [GRID3_HEADER]
    for io, om in enumerate(grid.omega_cap_axis):
        for ia, al in enumerate(grid.alpha_axis):
            for ie, ep in enumerate(grid.epsilon_axis):
                lines.append(
                    "%s,%s,%s,%s" % (_fmt(om), _fmt(al), _fmt(ep), _fmt(grid.values[io, ia, ie]))
                )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def save_periodogram(freqs, power, path) -> Path:
    path = Path(path)
    lines = [PERIODOGRAM_HEADER]
    for f, p in zip(np.asarray(freqs), np.asarray(power)):
        lines.append("%s,%s" % (_fmt(f), _fmt(p)))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


_CELL_COLUMNS = (
    "nt,ne,runs,failed,sd_omega,sd_delta_omega,sd_a0,sd_a1,sd_a2,sd_a3,"
    "median_rel_error,unphysical"
)


def save_campaign_cells(result: CampaignResult, path) -> Path:
    """One CSV row of aggregates per (Nt, Ne) cell."""
    path = Path(path)
    lines = [_CELL_COLUMNS]
    for cell in result.cells:
        lines.append(
            ",".join(
                [
                    "%d" % cell.nt,
                    "%d" % cell.ne,
                    "%d" % cell.runs,
                    "%d" % cell.failed,
                    _fmt(cell.sd_omega),
                    _fmt(cell.sd_delta_omega),
                    *(_fmt(a) for a in cell.sd_amplitudes),
                    _fmt(cell.median_rel_error),
                    "%d" % cell.unphysical,
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def save_campaign_runs(result: CampaignResult, path) -> Path:
    """Raw per-run records; extra per-pipeline columns appended sorted."""
    path = Path(path)
    extra_keys = sorted({key for r in result.runs for key in r.extra})
    header = (
        "nt,ne,repeat,seed,failed,error,omega_est,delta_omega_est,a0,a1,a2,a3,"
        "valid,reason,rel_error"
    )
    if extra_keys:
        header += "," + ",".join(extra_keys)
    lines = [header]
    for r in result.runs:
        row = [
            "%d" % r.nt,
            "%d" % r.ne,
            "%d" % r.repeat,
            "%d" % r.seed,
            "1" if r.failed else "0",
            "" if r.error is None else r.error.replace(",", ";"),
            _fmt(r.omega_est),
            _fmt(r.delta_omega_est),
            *(_fmt(a) for a in r.amplitudes),
            "1" if r.valid else "0",
            "" if r.reason is None else r.reason,
            _fmt(r.rel_error),
        ]
        row.extend(_fmt(r.extra.get(key, float("nan"))) for key in extra_keys)
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def save_error_histogram(result: CampaignResult, path) -> Path:
    """Relative errors with physical-validity flags, one row per run."""
    path = Path(path)
    lines = ["rel_error,valid"]
    for r in result.runs:
        if r.failed:
            continue
        lines.append("%s,%s" % (_fmt(r.rel_error), "1" if r.valid else "0"))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _jsonable(value):
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return None if math.isnan(value) else value
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def save_json(data: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def emit_plot_data(obj, path) -> Path:
    """Route an exportable object to its CSV writer by type."""
    if isinstance(obj, LikelihoodSurface):
        return save_surface(obj, path)
    if isinstance(obj, Grid3):
        return save_grid3(obj, path)
    if isinstance(obj, CampaignResult):
        return save_campaign_cells(obj, path)
    if isinstance(obj, DataTrace):
        return save_trace(obj, path)
    raise TypeError("no plot-data exporter for %r" % type(obj).__name__)
