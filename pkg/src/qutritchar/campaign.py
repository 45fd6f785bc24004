"""Statistical sweep harness over (Nt, Ne) cells.

Every run gets its own seed derived from the master seed and the cell /
repeat indices with a documented 64-bit mix, so a campaign is a pure
function of its configuration no matter how many workers execute it.
Per-run failures are recorded and never abort the sweep.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .adaptive import AdaptiveConfig, SimulatedSource, adaptive_characterize
from .errors import CharacterizerError, InvalidParameterError
from .measurement import SamplingSchedule, mix64, schedule_times, simulate_trace
from .quantum import CouplingParams, bohr_frequencies, build_hamiltonian, spectral_decompose
from .reconstruct import reconstruct_hamiltonian, relative_error
from .spectral import SpectralConfig, estimate_spectral
from .directmle import estimate_direct
from .quantum import polar_to_couplings

logger = logging.getLogger("qutritchar")

__all__ = ["CampaignConfig", "RunRecord", "CellStats", "CampaignResult", "run_campaign"]

PIPELINES = ("two-step", "direct", "adaptive")


@dataclass(frozen=True)
class CampaignConfig:
    """Sweep definition: true model, cells, repeats, pipeline, seed."""

    truth: CouplingParams
    nt_values: tuple = (25, 50, 100)
    ne_values: tuple = (25, 100, 400)
    repeats: int = 256
    seed: int = 0
    pipeline: str | Callable = "two-step"
    schedule_kind: str = "low-discrepancy"
    time_range: tuple = (0.0, 20.0)
    spectral: SpectralConfig = field(default_factory=SpectralConfig)
    direct_axes: tuple | None = None
    adaptive: AdaptiveConfig = field(default_factory=AdaptiveConfig)
    workers: int = 1

    def __post_init__(self):
        if len(self.nt_values) == 0 or len(self.ne_values) == 0:
            raise InvalidParameterError("nt_values and ne_values must be non-empty")
        if self.repeats < 1:
            raise InvalidParameterError("repeats must be >= 1")
        if isinstance(self.pipeline, str) and self.pipeline not in PIPELINES:
            raise InvalidParameterError(
                "unknown pipeline %r (expected one of %s)" % (self.pipeline, ", ".join(PIPELINES))
            )


@dataclass(frozen=True)
class RunRecord:
    """One simulated experiment and its estimate."""

    nt: int
    ne: int
    repeat: int
    seed: int
    failed: bool = False
    error: str | None = None
    omega_est: float = float("nan")
    delta_omega_est: float = float("nan")
    amplitudes: tuple = (float("nan"),) * 4
    valid: bool = False
    reason: str | None = None
    rel_error: float = float("nan")
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CellStats:
    """Aggregates over the repeats of one (Nt, Ne) cell."""

    nt: int
    ne: int
    runs: int
    failed: int
    sd_omega: float
    sd_delta_omega: float
    sd_amplitudes: tuple
    median_rel_error: float
    unphysical: int


@dataclass(frozen=True)
class CampaignResult:
    config: CampaignConfig
    cells: tuple
    runs: tuple


def _two_step_record(trace, cfg: CampaignConfig, base: dict) -> RunRecord:
    result = estimate_spectral(trace, cfg.spectral)
    est = result.estimate
    reconstruction = reconstruct_hamiltonian(est)
    rel = float("nan")
    if reconstruction.params is not None:
        rel = relative_error(reconstruction.params, cfg.truth)
    return RunRecord(
        omega_est=est.omega,
        delta_omega_est=est.delta_omega,
        amplitudes=tuple(float(a) for a in est.amplitudes),
        valid=reconstruction.valid,
        reason=reconstruction.reason,
        rel_error=rel,
        **base,
    )


def _direct_record(trace, cfg: CampaignConfig, base: dict) -> RunRecord:
    estimate = estimate_direct(trace, cfg.direct_axes).estimate
    couplings = polar_to_couplings(estimate.polar)
    omega, delta_omega = bohr_frequencies(spectral_decompose(build_hamiltonian(couplings)))
    return RunRecord(
        omega_est=omega,
        delta_omega_est=abs(delta_omega),
        valid=True,
        rel_error=relative_error(couplings, cfg.truth),
        extra={"converged": float(estimate.converged)},
        **base,
    )


def _adaptive_record(cfg: CampaignConfig, nt: int, ne: int, run_seed: int, base: dict) -> RunRecord:
    adaptive_cfg = replace(
        cfg.adaptive,
        time_range=cfg.time_range,
        preliminary_count=nt,
        preliminary_shots=ne,
    )
    source = SimulatedSource(build_hamiltonian(cfg.truth), seed=run_seed)
    report = adaptive_characterize(source, adaptive_cfg, truth=cfg.truth)
    est = report.two_step_estimate
    reconstruction = report.two_step_reconstruction
    rel = report.direct_rel_error
    if math.isnan(rel):
        rel = report.two_step_rel_error
    return RunRecord(
        omega_est=float("nan") if est is None else est.omega,
        delta_omega_est=float("nan") if est is None else est.delta_omega,
        amplitudes=(float("nan"),) * 4
        if est is None or est.amplitudes is None
        else tuple(float(a) for a in est.amplitudes),
        valid=False if reconstruction is None else reconstruction.valid,
        reason=None if reconstruction is None else reconstruction.reason,
        rel_error=rel,
        extra={
            "rel_error_preliminary": report.preliminary_rel_error,
            "rel_error_two_step": report.two_step_rel_error,
            "rel_error_direct": report.direct_rel_error,
            "total_shots": float(report.total_shots),
        },
        **base,
    )


def _run_one(cfg: CampaignConfig, nt_index: int, ne_index: int, repeat: int) -> RunRecord:
    nt = int(cfg.nt_values[nt_index])
    ne = int(cfg.ne_values[ne_index])
    run_seed = mix64(cfg.seed, nt_index, ne_index, repeat)
    base = {"nt": nt, "ne": ne, "repeat": repeat, "seed": run_seed}
    try:
        if cfg.pipeline == "adaptive":
            return _adaptive_record(cfg, nt, ne, run_seed, base)
        schedule = SamplingSchedule(kind=cfg.schedule_kind, time_range=cfg.time_range, count=nt)
        trace = simulate_trace(build_hamiltonian(cfg.truth), schedule_times(schedule), ne, run_seed)
        if callable(cfg.pipeline):
            return cfg.pipeline(trace, cfg, base)
        if cfg.pipeline == "two-step":
            return _two_step_record(trace, cfg, base)
        return _direct_record(trace, cfg, base)
    except CharacterizerError as err:
        logger.warning("run (nt=%d, ne=%d, repeat=%d) failed: %s", nt, ne, repeat, err)
        return RunRecord(failed=True, error=str(err), **base)


def _nanstd(values) -> float:
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    if values.size < 2:
        return float("nan")
    return float(np.std(values, ddof=1))


def _aggregate_cell(nt: int, ne: int, records) -> CellStats:
    ok = [r for r in records if not r.failed]
    amplitudes = np.array([r.amplitudes for r in ok]) if ok else np.empty((0, 4))
    rel_errors = np.array([r.rel_error for r in ok]) if ok else np.empty(0)
    finite_rel = rel_errors[np.isfinite(rel_errors)]
    return CellStats(
        nt=nt,
        ne=ne,
        runs=len(records),
        failed=len(records) - len(ok),
        sd_omega=_nanstd([r.omega_est for r in ok]),
        sd_delta_omega=_nanstd([r.delta_omega_est for r in ok]),
        sd_amplitudes=tuple(_nanstd(amplitudes[:, m]) for m in range(4)) if ok else (float("nan"),) * 4,
        median_rel_error=float(np.median(finite_rel)) if finite_rel.size else float("nan"),
        unphysical=sum(1 for r in ok if not r.valid),
    )


def run_campaign(cfg: CampaignConfig) -> CampaignResult:
    """Execute the sweep; deterministic for a given config, any worker count."""
    jobs = [
        (i, j, r)
        for i in range(len(cfg.nt_values))
        for j in range(len(cfg.ne_values))
        for r in range(cfg.repeats)
    ]
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(lambda job: _run_one(cfg, *job), jobs))
    else:
        records = [_run_one(cfg, *job) for job in jobs]

    cells = []
    per_cell = len(cfg.ne_values) * cfg.repeats
    for i, nt in enumerate(cfg.nt_values):
        for j, ne in enumerate(cfg.ne_values):
            start = i * per_cell + j * cfg.repeats
            cells.append(_aggregate_cell(int(nt), int(ne), records[start : start + cfg.repeats]))
    return CampaignResult(config=cfg, cells=tuple(cells), runs=tuple(records))
