"""Adaptive resampling: preliminary scan, uncertainty ranking, refinement.

One round of the loop is: estimate the spectrum from the data so far,
judge the sharpness of the likelihood peak, pick new sampling times
(half-period multiples of the current frequency estimate, or the times
where an ensemble of probable models disagrees the most), acquire them
at higher shot count, and merge.  All data is kept; nothing is replaced.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from .directmle import DirectEstimate, estimate_direct
from .errors import CharacterizerError, InvalidParameterError
from .measurement import DataTrace, low_discrepancy_times, merge_traces, mix64, simulate_trace
from .quantum import CouplingParams, polar_to_couplings
from .reconstruct import ReconstructionResult, reconstruct_hamiltonian, relative_error
from .signal import SignalParams, eval_signal
from .spectral import (
    Estimate,
    LikelihoodSurface,
    SpectralConfig,
    SpectralEstimate,
    estimate_spectral,
    find_peak,
    orthonormal_projection,
)
from .signal import design_matrix

logger = logging.getLogger("qutritchar")

__all__ = [
    "UncertaintyMetrics",
    "ModelEnsemble",
    "MeasurementSource",
    "SimulatedSource",
    "AdaptiveConfig",
    "RoundRecord",
    "AdaptiveReport",
    "uncertainty_from_surface",
    "build_ensemble",
    "ensemble_variance_times",
    "halfperiod_times",
    "adaptive_characterize",
]


@dataclass(frozen=True)
class UncertaintyMetrics:
    """Sharpness diagnostics of a likelihood peak.

    ``curvature_eigenvalues`` are the (ascending) eigenvalues of the
    negated peak curvature; ``anisotropy`` their max/min ratio; ``margin``
    the peak height over the surface median.  ``flat`` marks a surface
    with no usable curvature (infinite uncertainty).
    """

    curvature_eigenvalues: np.ndarray
    anisotropy: float
    margin: float
    flat: bool


def uncertainty_from_surface(surface: LikelihoodSurface) -> UncertaintyMetrics:
    """Peak curvature spectrum, anisotropy ratio and height margin."""
    est = find_peak(surface)
    if est.curvature is None:
        return UncertaintyMetrics(
            curvature_eigenvalues=np.array([0.0, 0.0]),
            anisotropy=float("inf"),
            margin=est.margin,
            flat=True,
        )
    eigs = np.sort(np.linalg.eigvalsh(-est.curvature))
    if eigs[0] <= 0.0:
        return UncertaintyMetrics(
            curvature_eigenvalues=eigs, anisotropy=float("inf"), margin=est.margin, flat=True
        )
    return UncertaintyMetrics(
        curvature_eigenvalues=eigs,
        anisotropy=float(eigs[1] / eigs[0]),
        margin=est.margin,
        flat=False,
    )


@dataclass(frozen=True)
class ModelEnsemble:
    """Probable signal models with likelihood-proportional weights.

    Members are sorted by weight descending; weights are normalized.
    """

    members: tuple
    weights: np.ndarray


def build_ensemble(
    surface: LikelihoodSurface,
    trace: DataTrace,
    span_decades: float = 2.0,
    cap: int = 256,
) -> ModelEnsemble:
    """All grid cells within ``span_decades`` of the peak, as signal models.

    Each member carries the amplitudes fitted at its own cell; weights are
    proportional to ``10**(L - L_max)``.  The likelihood is generally far
    from Gaussian, so no Gaussian approximation is attempted.
    """
    values = surface.values
    finite = np.isfinite(values)
    if not np.any(finite):
        raise InvalidParameterError("cannot build an ensemble from an all-degenerate surface")
    vmax = float(np.nanmax(values))
    ii, jj = np.nonzero(finite & (values >= vmax - span_decades))
    cell_values = values[ii, jj]
    order = np.lexsort((jj, ii, -cell_values))[:cap]
    members = []
    logw = []
    for k in order:
        i, j = int(ii[k]), int(jj[k])
        omega = float(surface.omegas[i])
        delta_omega = float(surface.delta_omegas[j])
        G = design_matrix(omega, delta_omega, trace.times)
        proj = orthonormal_projection(G, trace.frequencies)
        a0, a1, a2, a3 = (float(x) for x in proj.a)
        members.append(SignalParams(a0, a1, a2, a3, omega, delta_omega))
        logw.append(float(values[i, j]) - vmax)
    weights = 10.0 ** np.asarray(logw)
    weights /= weights.sum()
    return ModelEnsemble(members=tuple(members), weights=weights)


def ensemble_variance_times(ensemble: ModelEnsemble, candidates, k: int) -> np.ndarray:
    """The k candidate times where the ensemble's predictions vary the most.

    Returned in descending predicted-variance order, ties broken by the
    earlier time.  Requests beyond the candidate count return everything
    (with a warning), and a single-member ensemble is flagged as a
    degenerate choice.
    """
    candidates = np.asarray(candidates, dtype=float)
    if len(ensemble.members) == 0 or candidates.size == 0:
        raise InvalidParameterError("ensemble and candidate times must be non-empty")
    preds = np.stack([eval_signal(m, candidates) for m in ensemble.members])
    w = ensemble.weights
    mean = w @ preds
    variance = w @ (preds * preds) - mean * mean
    if len(ensemble.members) == 1 or float(variance.max()) <= 0.0:
        logger.warning("ensemble predicts zero variance everywhere; time choice is degenerate")
    if k > candidates.size:
        logger.warning(
            "requested %d refinement times but only %d candidates; returning all", k, candidates.size
        )
        k = candidates.size
    order = np.lexsort((candidates, -variance))
    return candidates[order[:k]]


def halfperiod_times(omega_est: float, count: int, t_start: float = 0.0) -> np.ndarray:
    """Integer multiples of the estimated half period, from t_start on.

    The population signal is most sensitive to the slow splitting
    modulation at these times.
    """
    if omega_est <= 0.0:
        raise InvalidParameterError("half-period times need omega_est > 0, got %r" % (omega_est,))
    if count < 0:
        raise InvalidParameterError("count must be >= 0")
    step = math.pi / omega_est
    j0 = math.ceil(t_start / step)
    return (j0 + np.arange(count)) * step


class MeasurementSource(Protocol):
    """Anything that can acquire counts at requested times."""

    def acquire(self, times, shots: int) -> DataTrace: ...


@dataclass
class SimulatedSource:
    """Measurement source backed by the exact simulator.

    Each acquisition uses a fresh stream derived from (seed, call index),
    so repeated acquisitions are independent but the whole campaign is a
    pure function of the seed.
    """

    hamiltonian: np.ndarray
    seed: int
    _calls: int = 0

    def acquire(self, times, shots: int) -> DataTrace:
        call_seed = mix64(self.seed, self._calls)
        self._calls += 1
        return simulate_trace(self.hamiltonian, times, shots, seed=call_seed)


@dataclass(frozen=True)
class AdaptiveConfig:
    """Knobs of the adaptive loop.

    ``refine_count=None`` fills the time range with half-period points;
    the 'ensemble-variance' strategy instead ranks ``candidate_count``
    uniformly spaced candidates.  ``final`` selects which full-data
    estimators to run at the end.
    """

    time_range: tuple = (0.0, 20.0)
    preliminary_count: int = 100
    preliminary_shots: int = 100
    rounds: int = 1
    strategy: str = "half-period"
    refine_count: int | None = None
    refine_shots: int = 1000
    candidate_count: int = 512
    ensemble_span: float = 2.0
    ensemble_cap: int = 256
    spectral: SpectralConfig = field(default_factory=SpectralConfig)
    direct_axes: tuple | None = None
    final: str = "both"  # "two-step" | "direct" | "both"

    def __post_init__(self):
        if self.strategy not in ("half-period", "ensemble-variance"):
            raise InvalidParameterError("unknown strategy %r" % (self.strategy,))
        if self.final not in ("two-step", "direct", "both"):
            raise InvalidParameterError("final must be two-step, direct or both")
        if self.rounds < 0:
            raise InvalidParameterError("rounds must be >= 0")


@dataclass(frozen=True)
class RoundRecord:
    index: int
    estimate: Estimate | None
    metrics: UncertaintyMetrics | None
    chosen_times: np.ndarray
    added_shots: int
    cumulative_shots: int
    error: str | None = None


@dataclass(frozen=True)
class AdaptiveReport:
    rounds: tuple
    trace: DataTrace
    preliminary_estimate: Estimate | None
    preliminary_reconstruction: ReconstructionResult | None
    preliminary_rel_error: float
    two_step_estimate: Estimate | None
    two_step_reconstruction: ReconstructionResult | None
    two_step_rel_error: float
    direct_estimate: DirectEstimate | None
    direct_rel_error: float
    preliminary_shots: int
    total_shots: int


def _two_step(trace: DataTrace, cfg: AdaptiveConfig, truth: CouplingParams | None):
    """Spectral estimate + reconstruction + error vs truth (NaNs on failure)."""
    estimate = None
    reconstruction = None
    rel = float("nan")
    try:
        estimate = estimate_spectral(trace, cfg.spectral).estimate
        reconstruction = reconstruct_hamiltonian(estimate)
        if truth is not None and reconstruction.params is not None:
            rel = relative_error(reconstruction.params, truth)
    except CharacterizerError as err:
        logger.warning("two-step estimate failed: %s", err)
    return estimate, reconstruction, rel


def adaptive_characterize(
    source: MeasurementSource,
    config: AdaptiveConfig | None = None,
    truth: CouplingParams | None = None,
) -> AdaptiveReport:
    """Run the full adaptive strategy against a measurement source.

    A failed round is recorded and the loop continues with the data it
    has.  With ``rounds=0`` this reduces to the one-shot pipeline.
    """
    cfg = config or AdaptiveConfig()
    t_min, t_max = cfg.time_range
    times = low_discrepancy_times(cfg.preliminary_count, cfg.time_range)
    trace = source.acquire(times, cfg.preliminary_shots)
    preliminary_shots = trace.total_shots

    preliminary_estimate, preliminary_reconstruction, preliminary_rel = _two_step(
        trace, cfg, truth
    )

    rounds = []
    for r in range(cfg.rounds):
        try:
            spectral_result = estimate_spectral(trace, cfg.spectral)
            metrics = uncertainty_from_surface(spectral_result.surface)
            omega_est = spectral_result.estimate.omega
            if cfg.strategy == "half-period":
                step = math.pi / omega_est
                capacity = int(math.floor(t_max / step)) - int(math.ceil(t_min / step)) + 1
                count = capacity if cfg.refine_count is None else cfg.refine_count
                chosen = halfperiod_times(omega_est, count, t_start=t_min)
            else:
                ensemble = build_ensemble(
                    spectral_result.surface, trace, cfg.ensemble_span, cfg.ensemble_cap
                )
                candidates = np.linspace(t_min, t_max, cfg.candidate_count)
                count = cfg.refine_count or max(4, cfg.candidate_count // 32)
                chosen = ensemble_variance_times(ensemble, candidates, count)
            new_data = source.acquire(chosen, cfg.refine_shots)
            trace = merge_traces(trace, new_data)
            rounds.append(
                RoundRecord(
                    index=r,
                    estimate=spectral_result.estimate,
                    metrics=metrics,
                    chosen_times=chosen,
                    added_shots=new_data.total_shots,
                    cumulative_shots=trace.total_shots,
                )
            )
        except CharacterizerError as err:
            logger.warning("adaptive round %d failed: %s", r, err)
            rounds.append(
                RoundRecord(
                    index=r,
                    estimate=None,
                    metrics=None,
                    chosen_times=np.empty(0),
                    added_shots=0,
                    cumulative_shots=trace.total_shots,
                    error=str(err),
                )
            )

    two_step_estimate = preliminary_estimate
    two_step_reconstruction = preliminary_reconstruction
    two_step_rel = preliminary_rel
    if cfg.rounds > 0 and cfg.final in ("two-step", "both"):
        two_step_estimate, two_step_reconstruction, two_step_rel = _two_step(trace, cfg, truth)

    direct_estimate = None
    direct_rel = float("nan")
    if cfg.final in ("direct", "both"):
        try:
            direct_estimate = estimate_direct(trace, cfg.direct_axes).estimate
            if truth is not None:
                direct_rel = relative_error(polar_to_couplings(direct_estimate.polar), truth)
        except CharacterizerError as err:
            logger.warning("direct estimate failed: %s", err)

    return AdaptiveReport(
        rounds=tuple(rounds),
        trace=trace,
        preliminary_estimate=preliminary_estimate,
        preliminary_reconstruction=preliminary_reconstruction,
        preliminary_rel_error=preliminary_rel,
        two_step_estimate=two_step_estimate,
        two_step_reconstruction=two_step_reconstruction,
        two_step_rel_error=two_step_rel,
        direct_estimate=direct_estimate,
        direct_rel_error=direct_rel,
        preliminary_shots=preliminary_shots,
        total_shots=trace.total_shots,
    )
