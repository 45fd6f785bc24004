"""Command-line front end.

Subcommands mirror the library pipelines: ``simulate``, ``periodogram``,
``estimate-spectral``, ``reconstruct``, ``estimate-direct``, ``adaptive``
and ``campaign``.  Every flag can also come from a JSON config file
(``--config``); explicit flags win.  ``CHARACTERIZER_LOG`` sets the log
level.  Outputs are CSV/JSON only; plotting is left to external tools.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .adaptive import AdaptiveConfig, SimulatedSource, adaptive_characterize
from .campaign import CampaignConfig, run_campaign
from .directmle import default_grid_axes, estimate_direct
from .errors import CharacterizerError, InvalidParameterError
from .measurement import SamplingSchedule, schedule_times, simulate_trace
from .quantum import CouplingParams, PolarParams, build_hamiltonian, polar_to_couplings
from .reconstruct import reconstruct_hamiltonian, relative_error
from .signal import SignalParams
from .spectral import SpectralConfig, estimate_spectral, periodogram
from . import storage
from .kernels import BACKEND

logger = logging.getLogger("qutritchar")


def _configure_logging():
    level_name = os.environ.get("CHARACTERIZER_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _parse_range(text: str) -> tuple:
    try:
        lo, hi = text.split(":")
        return (float(lo), float(hi))
    except ValueError as err:
        raise InvalidParameterError("bad range %r (expected 'lo:hi')" % text) from err


def _parse_int_list(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as err:
        raise InvalidParameterError("bad integer list %r" % text) from err


def _merged(args: argparse.Namespace) -> dict:
    """JSON config (if any) overridden by explicitly given CLI flags."""
    merged = {}
    config_path = getattr(args, "config", None)
    if config_path:
        merged.update(storage.load_json(config_path))
    for key, value in vars(args).items():
        if key in ("func", "config") or value is None:
            continue
        merged[key] = value
    return merged


def _truth_from(cfg: dict) -> CouplingParams:
    if cfg.get("omega_cap") is not None:
        polar = PolarParams(
            omega_cap=float(cfg["omega_cap"]),
            alpha=float(cfg.get("alpha", 0.0)),
            epsilon=float(cfg.get("epsilon", 0.0)),
        )
        return polar_to_couplings(polar)
    if cfg.get("d1") is None:
        raise InvalidParameterError(
            "true model required: give --d1/--d2[/--d3/--delta] or --omega-cap/--alpha/--epsilon"
        )
    return CouplingParams(
        d1=float(cfg["d1"]),
        d2=float(cfg.get("d2", 0.0)),
        d3=float(cfg.get("d3", 0.0)),
        delta=float(cfg.get("delta", 0.0)),
    )


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _spectral_config(cfg: dict) -> SpectralConfig:
    kwargs = {}
    if cfg.get("omega_cells") is not None:
        kwargs["omega_cells"] = int(cfg["omega_cells"])
    if cfg.get("delta_omega_cells") is not None:
        kwargs["delta_omega_cells"] = int(cfg["delta_omega_cells"])
    if cfg.get("omega_center") is not None:
        kwargs["omega_center"] = float(cfg["omega_center"])
    return SpectralConfig(**kwargs)


def _estimate_dict(est, omega_center: float | None = None) -> dict:
    out = {
        "omega": est.omega,
        "delta_omega": est.delta_omega,
        "amplitudes": None if est.amplitudes is None else list(est.amplitudes),
        "loglik": est.loglik,
        "margin": est.margin,
        "saturated": est.saturated,
        "curvature": None if est.curvature is None else est.curvature.tolist(),
    }
    if omega_center is not None:
        out["omega_center"] = omega_center
    return out


def _cmd_simulate(args) -> int:
    cfg = _merged(args)
    truth = _truth_from(cfg)
    time_range = _parse_range(cfg.get("range", "0:20"))
    schedule = SamplingSchedule(
        kind=cfg.get("schedule", "low-discrepancy"),
        time_range=time_range,
        count=int(cfg.get("nt", 100)),
    )
    times = schedule_times(schedule)
    trace = simulate_trace(build_hamiltonian(truth), times, int(cfg.get("ne", 100)), int(cfg.get("seed", 0)))
    out = _out_dir(cfg)
    trace_path = storage.save_trace(trace, out / "trace.csv")
    storage.save_json(
        {
            "schedule": schedule.kind,
            "generator": "van-der-corput-base2" if schedule.kind == "low-discrepancy" else schedule.kind,
            "time_range": list(time_range),
            "nt": trace.n_points,
            "ne": int(cfg.get("ne", 100)),
            "seed": int(cfg.get("seed", 0)),
            "truth": {"d1": truth.d1, "d2": truth.d2, "d3": truth.d3, "delta": truth.delta},
        },
        out / "simulate_meta.json",
    )
    print(trace_path)
    return 0


def _cmd_periodogram(args) -> int:
    cfg = _merged(args)
    trace = storage.load_trace(cfg["trace"])
    lo, hi = _parse_range(cfg.get("freq_range", "0.1:10"))
    freqs = np.linspace(lo, hi, int(cfg.get("freq_count", 991)))
    power = periodogram(trace, freqs)
    out = _out_dir(cfg)
    print(storage.save_periodogram(freqs, power, out / "periodogram.csv"))
    return 0


def _cmd_estimate_spectral(args) -> int:
    cfg = _merged(args)
    trace = storage.load_trace(cfg["trace"])
    result = estimate_spectral(trace, _spectral_config(cfg))
    out = _out_dir(cfg)
    storage.save_surface(result.surface, out / "surface.csv")
    path = storage.save_json(
        _estimate_dict(result.estimate, result.omega_center), out / "estimate.json"
    )
    print(path)
    return 0


def _cmd_reconstruct(args) -> int:
    cfg = _merged(args)
    est = storage.load_json(cfg["estimate"])
    amplitudes = est["amplitudes"]
    sp = SignalParams(*(float(a) for a in amplitudes), float(est["omega"]), float(est["delta_omega"]))
    result = reconstruct_hamiltonian(sp)
    rel = None
    if cfg.get("d1") is not None or cfg.get("omega_cap") is not None:
        truth = _truth_from(cfg)
        if result.params is not None:
            rel = relative_error(result.params, truth)
    out = _out_dir(cfg)
    path = storage.save_json(result.as_dict(rel_error=rel), out / "reconstruction.json")
    print(path)
    return 0


def _cmd_estimate_direct(args) -> int:
    cfg = _merged(args)
    trace = storage.load_trace(cfg["trace"])
    result = estimate_direct(trace)
    estimate = result.estimate
    couplings = polar_to_couplings(estimate.polar)
    report = {
        "omega_cap": estimate.polar.omega_cap,
        "alpha": estimate.polar.alpha,
        "epsilon": estimate.polar.epsilon,
        "loglik": estimate.loglik,
        "n_evaluations": estimate.n_evaluations,
        "converged": estimate.converged,
        "d1": couplings.d1,
        "d2": couplings.d2,
        "delta": couplings.delta,
        "grid": {
            "omega_cap": [float(result.grid.omega_cap_axis[0]), float(result.grid.omega_cap_axis[-1]), int(result.grid.omega_cap_axis.size)],
            "alpha": [float(result.grid.alpha_axis[0]), float(result.grid.alpha_axis[-1]), int(result.grid.alpha_axis.size)],
            "epsilon": [float(result.grid.epsilon_axis[0]), float(result.grid.epsilon_axis[-1]), int(result.grid.epsilon_axis.size)],
        },
    }
    if cfg.get("d1") is not None or cfg.get("omega_cap") is not None:
        report["relative_error"] = relative_error(couplings, _truth_from(cfg))
    out = _out_dir(cfg)
    if cfg.get("export_grid"):
        storage.save_grid3(result.grid, out / "grid3.csv")
    path = storage.save_json(report, out / "direct_estimate.json")
    print(path)
    return 0


def _round_dict(record) -> dict:
    out = {
        "index": record.index,
        "chosen_times": list(record.chosen_times),
        "added_shots": record.added_shots,
        "cumulative_shots": record.cumulative_shots,
        "error": record.error,
    }
    if record.estimate is not None:
        out["estimate"] = _estimate_dict(record.estimate)
    if record.metrics is not None:
        out["uncertainty"] = {
            "curvature_eigenvalues": list(record.metrics.curvature_eigenvalues),
            "anisotropy": None if np.isinf(record.metrics.anisotropy) else record.metrics.anisotropy,
            "margin": record.metrics.margin,
            "flat": record.metrics.flat,
        }
    return out


def _cmd_adaptive(args) -> int:
    cfg = _merged(args)
    truth = _truth_from(cfg)
    time_range = _parse_range(cfg.get("range", "0:20"))
    adaptive_cfg = AdaptiveConfig(
        time_range=time_range,
        preliminary_count=int(cfg.get("nt", 100)),
        preliminary_shots=int(cfg.get("ne", 100)),
        rounds=int(cfg.get("rounds", 1)),
        strategy=cfg.get("strategy", "half-period"),
        refine_count=None if cfg.get("refine_count") is None else int(cfg["refine_count"]),
        refine_shots=int(cfg.get("refine_ne", 1000)),
        final=cfg.get("final", "both"),
        spectral=_spectral_config(cfg),
    )
    source = SimulatedSource(build_hamiltonian(truth), seed=int(cfg.get("seed", 0)))
    report = adaptive_characterize(source, adaptive_cfg, truth=truth)
    out = _out_dir(cfg)
    storage.save_trace(report.trace, out / "trace.csv")
    doc = {
        "rounds": [_round_dict(r) for r in report.rounds],
        "preliminary": {
            "estimate": None
            if report.preliminary_estimate is None
            else _estimate_dict(report.preliminary_estimate),
            "reconstruction": None
            if report.preliminary_reconstruction is None
            else report.preliminary_reconstruction.as_dict(),
            "rel_error": report.preliminary_rel_error,
        },
        "two_step": {
            "estimate": None
            if report.two_step_estimate is None
            else _estimate_dict(report.two_step_estimate),
            "reconstruction": None
            if report.two_step_reconstruction is None
            else report.two_step_reconstruction.as_dict(),
            "rel_error": report.two_step_rel_error,
        },
        "direct": None
        if report.direct_estimate is None
        else {
            "omega_cap": report.direct_estimate.polar.omega_cap,
            "alpha": report.direct_estimate.polar.alpha,
            "epsilon": report.direct_estimate.polar.epsilon,
            "loglik": report.direct_estimate.loglik,
            "converged": report.direct_estimate.converged,
            "rel_error": report.direct_rel_error,
        },
        "preliminary_shots": report.preliminary_shots,
        "total_shots": report.total_shots,
    }
    path = storage.save_json(doc, out / "adaptive_report.json")
    print(path)
    return 0


def _cmd_campaign(args) -> int:
    cfg = _merged(args)
    truth = _truth_from(cfg)
    campaign_cfg = CampaignConfig(
        truth=truth,
        nt_values=_parse_int_list(cfg.get("nt", "25,50,100")) if isinstance(cfg.get("nt", "25,50,100"), str) else tuple(cfg["nt"]),
        ne_values=_parse_int_list(cfg.get("ne", "25,100,400")) if isinstance(cfg.get("ne", "25,100,400"), str) else tuple(cfg["ne"]),
        repeats=int(cfg.get("repeats", 256)),
        seed=int(cfg.get("seed", 0)),
        pipeline=cfg.get("pipeline", "two-step"),
        time_range=_parse_range(cfg.get("range", "0:20")),
        workers=int(cfg.get("workers", 1)),
        spectral=_spectral_config(cfg),
    )
    result = run_campaign(campaign_cfg)
    out = _out_dir(cfg)
    storage.save_campaign_cells(result, out / "campaign.csv")
    storage.save_campaign_runs(result, out / "runs.csv")
    storage.save_error_histogram(result, out / "rel_errors.csv")
    print(out / "campaign.csv")
    return 0


def _add_truth_flags(p: argparse.ArgumentParser):
    p.add_argument("--d1", type=float, help="qubit coupling")
    p.add_argument("--d2", type=float, help="nuisance-level coupling")
    p.add_argument("--d3", type=float, help="direct 1-3 coupling (simulator only)")
    p.add_argument("--delta", type=float, help="nuisance-level detuning")
    p.add_argument("--omega-cap", dest="omega_cap", type=float, help="total coupling magnitude")
    p.add_argument("--alpha", type=float, help="coupling mixing angle")
    p.add_argument("--epsilon", type=float, help="detuning / 4")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file; explicit flags override it")
    p.add_argument("--out", help="output directory (default: current)")
    p.add_argument("--seed", type=int, help="master seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qutritchar",
        description="Characterize an embedded-qubit Hamiltonian from ground-state population traces"
        " (kernel backend: %s)" % BACKEND,
    )
    sub = parser.add_subparsers(required=True, metavar="command")

    p = sub.add_parser("simulate", help="generate a shot-noise-limited trace")
    _add_common(p)
    _add_truth_flags(p)
    p.add_argument("--nt", type=int, help="number of sampling times")
    p.add_argument("--ne", type=int, help="shots per time")
    p.add_argument("--range", help="time range lo:hi")
    p.add_argument("--schedule", choices=["low-discrepancy", "uniform"], help="sampling schedule")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("periodogram", help="non-uniform DFT power spectrum of a trace")
    _add_common(p)
    p.add_argument("--trace", required=True, help="trace CSV")
    p.add_argument("--freq-range", dest="freq_range", help="angular frequency range lo:hi")
    p.add_argument("--freq-count", dest="freq_count", type=int, help="grid points")
    p.set_defaults(func=_cmd_periodogram)

    p = sub.add_parser("estimate-spectral", help="likelihood surface and polished peak")
    _add_common(p)
    p.add_argument("--trace", required=True, help="trace CSV")
    p.add_argument("--omega-cells", dest="omega_cells", type=int)
    p.add_argument("--delta-omega-cells", dest="delta_omega_cells", type=int)
    p.add_argument("--omega-center", dest="omega_center", type=float, help="skip the periodogram seed")
    p.set_defaults(func=_cmd_estimate_spectral)

    p = sub.add_parser("reconstruct", help="invert a spectral estimate into couplings")
    _add_common(p)
    _add_truth_flags(p)
    p.add_argument("--estimate", required=True, help="estimate.json from estimate-spectral")
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("estimate-direct", help="3-parameter grid scan plus local refinement")
    _add_common(p)
    _add_truth_flags(p)
    p.add_argument("--trace", required=True, help="trace CSV")
    p.add_argument("--export-grid", dest="export_grid", action="store_true", help="also write grid3.csv")
    p.set_defaults(func=_cmd_estimate_direct)

    p = sub.add_parser("adaptive", help="preliminary scan plus adaptive refinement rounds")
    _add_common(p)
    _add_truth_flags(p)
    p.add_argument("--nt", type=int, help="preliminary sampling times")
    p.add_argument("--ne", type=int, help="preliminary shots per time")
    p.add_argument("--range", help="time range lo:hi")
    p.add_argument("--rounds", type=int, help="refinement rounds")
    p.add_argument("--strategy", choices=["half-period", "ensemble-variance"])
    p.add_argument("--refine-count", dest="refine_count", type=int, help="points per round")
    p.add_argument("--refine-ne", dest="refine_ne", type=int, help="shots per refinement point")
    p.add_argument("--final", choices=["two-step", "direct", "both"])
    p.set_defaults(func=_cmd_adaptive)

    p = sub.add_parser("campaign", help="statistical sweep over (Nt, Ne) cells")
    _add_common(p)
    _add_truth_flags(p)
    p.add_argument("--nt", help="comma-separated Nt values")
    p.add_argument("--ne", help="comma-separated Ne values")
    p.add_argument("--repeats", type=int, help="simulated experiments per cell")
    p.add_argument("--pipeline", choices=["two-step", "direct", "adaptive"])
    p.add_argument("--range", help="time range lo:hi")
    p.add_argument("--workers", type=int, help="concurrent runs")
    p.set_defaults(func=_cmd_campaign)

    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CharacterizerError as err:
        print("error: %s" % err, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
