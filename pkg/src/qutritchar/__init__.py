"""Hamiltonian characterization of a qubit embedded in a three-level manifold.

Simulates ground-state population traces p11(t) under shot noise and
recovers the couplings (d1, d2) and detuning delta by Bayesian spectral
estimation, algebraic reconstruction, direct maximum likelihood and
adaptive resampling.
"""

from .adaptive import (
    AdaptiveConfig,
    AdaptiveReport,
    ModelEnsemble,
    SimulatedSource,
    UncertaintyMetrics,
    adaptive_characterize,
    build_ensemble,
    ensemble_variance_times,
    halfperiod_times,
    uncertainty_from_surface,
)
from .campaign import CampaignConfig, CampaignResult, CellStats, RunRecord, run_campaign
from .directmle import (
    DirectEstimate,
    Grid3,
    default_grid_axes,
    direct_log_likelihood,
    estimate_direct,
    grid_scan3,
    refine_local,
)
from .errors import (
    CharacterizerError,
    DegenerateBasisError,
    InvalidParameterError,
    TraceParseError,
    UnphysicalModelError,
    UnsupportedModelError,
)
from .kernels import BACKEND
from .measurement import (
    DataTrace,
    SamplingSchedule,
    low_discrepancy_times,
    merge_traces,
    mix64,
    schedule_times,
    simulate_trace,
)
from .quantum import (
    CouplingParams,
    PolarParams,
    SpectralDecomposition,
    bohr_frequencies,
    build_hamiltonian,
    canonical_polar,
    couplings_to_polar,
    ground_population,
    polar_to_couplings,
    spectral_decompose,
    transition_probability,
)
from .reconstruct import (
    ReconstructionResult,
    amplitudes_to_overlaps,
    reconstruct_hamiltonian,
    relative_error,
)
from .signal import (
    DesignMatrix,
    SignalParams,
    canonicalize,
    design_matrix,
    eval_signal,
    signal_from_hamiltonian,
)
from .spectral import (
    Estimate,
    LikelihoodSurface,
    OrthoProjection,
    SpectralConfig,
    count_halfmax_peaks,
    estimate_spectral,
    find_peak,
    likelihood_surface,
    log_likelihood,
    model_compare,
    orthonormal_projection,
    periodogram,
)
from .storage import emit_plot_data, load_trace, save_trace

__version__ = "0.1.0"
