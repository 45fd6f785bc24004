"""Bayesian spectral estimation of the split-frequency cosine model.

For a candidate frequency pair the four basis functions are evaluated at
the sample times, orthonormalized through the eigensystem of their Gram
matrix, and the data is projected onto them (Bretthorst's construction).
The resulting marginal log10-likelihood ::

    L(omega, delta_omega | d) = (m_b - Nt)/2 * log10(1 - m_b <h^2> / (Nt <d^2>))

is scanned on a grid, the peak polished locally, and the splitting
hypothesis compared against a single-frequency model.  A direct
non-uniform periodogram is included as the baseline that the likelihood
scan is meant to beat.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateBasisError, InvalidParameterError
from .measurement import DataTrace
from .signal import DesignMatrix, SignalParams, design_matrix

logger = logging.getLogger("qutritchar")

__all__ = [
    "OrthoProjection",
    "LikelihoodSurface",
    "Estimate",
    "SpectralConfig",
    "SpectralEstimate",
    "orthonormal_projection",
    "log_likelihood",
    "likelihood_surface",
    "find_peak",
    "periodogram",
    "count_halfmax_peaks",
    "model_compare",
    "estimate_spectral",
]

# Basis is degenerate when min/max eigenvalue of G G^T falls below this
# (g1 = g2 exactly at delta_omega = 0; fall back to the reduced model).
DEG_RATIO = 1e-10
# Residual fraction below this counts as a saturated (perfect) fit; the
# log10 argument itself is floored at 1e-300 so values stay finite.
SAT_EPS = 1e-12
LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class OrthoProjection:
    """Projection of a data vector onto the orthonormalized basis.

    ``h`` are the orthonormal-basis projections, ``a`` the equivalent
    coefficients on the raw cosine basis (the least-squares amplitudes),
    ``basis_eigenvalues`` the eigenvalues of G G^T, and
    ``condition_ratio`` their max/min ratio.
    """

    h: np.ndarray
    a: np.ndarray
    basis_eigenvalues: np.ndarray
    condition_ratio: float

    @property
    def mean_h2(self) -> float:
        return float(self.h @ self.h) / self.h.size


def _data_vector(d) -> np.ndarray:
    if isinstance(d, DataTrace):
        return d.frequencies
    return np.asarray(d, dtype=float)


def orthonormal_projection(G: DesignMatrix | np.ndarray, d) -> OrthoProjection:
    """Orthonormalize the basis rows and project the data onto them.

    Eigendecompose ``G G^T = E diag(alpha) E^T``, set
    ``V = diag(alpha^-1/2) E^T``; the orthonormal rows are ``V G``, the
    projections ``h = V G d`` and the raw-basis coefficients ``a = h^T V``.

    Raises
    ------
    DegenerateBasisError
        If the Gram matrix is numerically rank-deficient (condition
        ratio worse than 1/DEG_RATIO), e.g. at delta_omega = 0.
    """
    rows = G.entries if isinstance(G, DesignMatrix) else np.asarray(G, dtype=float)
    data = _data_vector(d)
    if rows.shape[1] != data.size:
        raise InvalidParameterError(
            "design matrix has %d columns but data has %d points" % (rows.shape[1], data.size)
        )
    if rows.shape[1] <= rows.shape[0]:
        raise InvalidParameterError("need more data points than basis functions")
    gram = rows @ rows.T
    alphas, evecs = np.linalg.eigh(gram)
    if alphas[-1] <= 0.0 or alphas[0] <= DEG_RATIO * alphas[-1]:
        raise DegenerateBasisError(
            "basis Gram matrix is rank-deficient (eigenvalue ratio %.3e); "
            "use the reduced single-frequency model" % (alphas[0] / alphas[-1] if alphas[-1] else 0.0)
        )
    q = evecs.T @ (rows @ data)
    h = q / np.sqrt(alphas)
    a = evecs @ (q / alphas)
    return OrthoProjection(
        h=h,
        a=a,
        basis_eigenvalues=alphas,
        condition_ratio=float(alphas[-1] / alphas[0]),
    )


def _loglik_from_projection(proj: OrthoProjection, data: np.ndarray) -> tuple[float, bool]:
    nt = data.size
    m_b = proj.h.size
    sumd2 = float(data @ data)
    if sumd2 <= 0.0:
        return 0.0, False
    bracket = 1.0 - float(proj.h @ proj.h) / sumd2
    saturated = bracket < SAT_EPS
    value = 0.5 * (m_b - nt) * np.log10(max(bracket, LOG_FLOOR))
    return float(value), saturated


def log_likelihood(omega: float, delta_omega: float, trace: DataTrace, full_output: bool = False):
    """Marginal log10-likelihood of a frequency pair given a trace.

    Larger is more likely.  With ``full_output=True`` returns
    ``(value, saturated)`` where the flag marks a fit that explains the
    data to rounding error.
    """
    G = design_matrix(omega, delta_omega, trace.times)
    data = trace.frequencies
    proj = orthonormal_projection(G, data)
    value, saturated = _loglik_from_projection(proj, data)
    if full_output:
        return value, saturated
    return value


@dataclass(frozen=True)
class LikelihoodSurface:
    """Gridded log-likelihood values; degenerate cells are NaN."""

    omegas: np.ndarray
    delta_omegas: np.ndarray
    values: np.ndarray  # shape (len(omegas), len(delta_omegas))
    saturated: np.ndarray
    degenerate: np.ndarray


def likelihood_surface(trace: DataTrace, omegas, delta_omegas) -> LikelihoodSurface:
    """Evaluate the log-likelihood on a rectangular frequency grid."""
    omegas = np.asarray(omegas, dtype=float)
    delta_omegas = np.asarray(delta_omegas, dtype=float)
    if omegas.size == 0 or delta_omegas.size == 0:
        raise InvalidParameterError("frequency grids must be non-empty")
    values, saturated, degenerate = kernels.surface_loglik(
        np.ascontiguousarray(trace.times),
        np.ascontiguousarray(trace.frequencies),
        np.ascontiguousarray(omegas),
        np.ascontiguousarray(delta_omegas),
        DEG_RATIO,
        SAT_EPS,
    )
    return LikelihoodSurface(omegas, delta_omegas, values, saturated, degenerate)


@dataclass(frozen=True)
class Estimate:
    """Peak of a likelihood surface with local diagnostics.

    ``curvature`` is the 2x2 second-difference matrix of the surface at
    the peak in parameter units (None when the peak sits on an edge or
    next to degenerate cells); ``margin`` is the peak height over the
    surface median.
    """

    omega: float
    delta_omega: float
    amplitudes: np.ndarray | None
    loglik: float
    curvature: np.ndarray | None
    margin: float
    grid_index: tuple
    saturated: bool = False

    def to_signal_params(self) -> SignalParams:
        if self.amplitudes is None:
            raise InvalidParameterError("estimate carries no amplitudes")
        a0, a1, a2, a3 = (float(x) for x in self.amplitudes)
        return SignalParams(a0, a1, a2, a3, self.omega, self.delta_omega)


def _quadratic_polish(values, i, j):
    """Sub-cell offset, gradient and curvature from the 3x3 neighborhood (index units)."""
    patch = values[i - 1 : i + 2, j - 1 : j + 2]
    if not np.all(np.isfinite(patch)):
        return None
    fx = 0.5 * (patch[2, 1] - patch[0, 1])
    fy = 0.5 * (patch[1, 2] - patch[1, 0])
    fxx = patch[2, 1] - 2.0 * patch[1, 1] + patch[0, 1]
    fyy = patch[1, 2] - 2.0 * patch[1, 1] + patch[1, 0]
    fxy = 0.25 * (patch[2, 2] - patch[2, 0] - patch[0, 2] + patch[0, 0])
    det = fxx * fyy - fxy * fxy
    if fxx >= 0.0 or det <= 0.0:  # not a proper interior maximum
        return 0.0, 0.0, fx, fy, fxx, fxy, fyy
    dx = float(np.clip(-(fyy * fx - fxy * fy) / det, -0.5, 0.5))
    dy = float(np.clip(-(fxx * fy - fxy * fx) / det, -0.5, 0.5))
    return dx, dy, fx, fy, fxx, fxy, fyy


def find_peak(surface: LikelihoodSurface, trace: DataTrace | None = None) -> Estimate:
    """Argmax cell of the surface, refined by a local quadratic fit.

    Ties go to the lowest (omega, then delta_omega) index.  When the
    trace is supplied the amplitudes and the log-likelihood are
    re-evaluated exactly at the polished frequencies.
    """
    values = surface.values
    if not np.any(np.isfinite(values)):
        raise DegenerateBasisError("likelihood surface has no finite cells")
    flat = np.nanargmax(values)
    i, j = np.unravel_index(flat, values.shape)
    omega = float(surface.omegas[i])
    delta_omega = float(surface.delta_omegas[j])
    loglik = float(values[i, j])
    curvature = None

    interior = 0 < i < values.shape[0] - 1 and 0 < j < values.shape[1] - 1
    if interior:
        polish = _quadratic_polish(values, i, j)
        if polish is not None:
            dx, dy, fx, fy, fxx, fxy, fyy = polish
            hx = 0.5 * (surface.omegas[i + 1] - surface.omegas[i - 1])
            hy = 0.5 * (surface.delta_omegas[j + 1] - surface.delta_omegas[j - 1])
            omega += dx * hx
            delta_omega += dy * hy
            loglik += fx * dx + fy * dy + 0.5 * (
                fxx * dx * dx + 2.0 * fxy * dx * dy + fyy * dy * dy
            )
            curvature = np.array(
                [
                    [fxx / (hx * hx), fxy / (hx * hy)],
                    [fxy / (hx * hy), fyy / (hy * hy)],
                ]
            )

    margin = loglik - float(np.nanmedian(values))
    amplitudes = None
    saturated = bool(surface.saturated[i, j])
    if trace is not None:
        try:
            G = design_matrix(omega, delta_omega, trace.times)
            proj = orthonormal_projection(G, trace.frequencies)
            value, saturated = _loglik_from_projection(proj, trace.frequencies)
            amplitudes = proj.a
            loglik = value
        except DegenerateBasisError:
            logger.warning("polished peak fell on a degenerate basis; keeping cell values")
    return Estimate(
        omega=omega,
        delta_omega=delta_omega,
        amplitudes=amplitudes,
        loglik=loglik,
        curvature=curvature,
        margin=margin,
        grid_index=(int(i), int(j)),
        saturated=saturated,
    )


def periodogram(trace: DataTrace, freqs) -> np.ndarray:
    """Mean-subtracted direct periodogram on a non-uniform time grid.

    ``P(nu) = |sum_n (d_n - mean) exp(-i nu t_n)|^2 / Nt`` for each
    angular frequency in ``freqs``.
    """
    freqs = np.asarray(freqs, dtype=float)
    residual = trace.frequencies - trace.frequencies.mean()
    phases = np.outer(freqs, trace.times)
    re = np.cos(phases) @ residual
    im = np.sin(phases) @ residual
    return (re * re + im * im) / trace.n_points


def count_halfmax_peaks(freqs, power, band) -> int:
    """Number of local maxima above half the in-band maximum power."""
    freqs = np.asarray(freqs, dtype=float)
    power = np.asarray(power, dtype=float)
    mask = (freqs >= band[0]) & (freqs <= band[1])
    if not np.any(mask):
        return 0
    p = power[mask]
    threshold = 0.5 * p.max()
    padded = np.concatenate([[-np.inf], p, [-np.inf]])
    local_max = (padded[1:-1] > padded[:-2]) & (padded[1:-1] >= padded[2:])
    return int(np.count_nonzero(local_max & (p >= threshold)))


def _single_freq_loglik(omega: float, trace: DataTrace) -> float:
    """Log-likelihood of the reduced model with basis {1, cos wt, cos 2wt}."""
    times = trace.times
    rows = np.empty((3, times.size))
    rows[0] = 1.0
    rows[1] = np.cos(omega * times)
    rows[2] = np.cos(2.0 * omega * times)
    data = trace.frequencies
    proj = orthonormal_projection(rows, data)
    value, _ = _loglik_from_projection(proj, data)
    return value


def model_compare(trace: DataTrace, est: Estimate, omegas=None) -> float:
    """Decades of evidence for the split model over one optimized frequency.

    Scans the single-frequency model over ``omegas`` (default: a band
    around the estimate), polishes its best cell, and returns the
    difference of peak log10-likelihoods.  Positive favors the splitting.
    """
    if omegas is None:
        omegas = np.linspace(0.5 * est.omega, 1.5 * est.omega, 401)
    omegas = np.asarray(omegas, dtype=float)
    values = np.full(omegas.size, np.nan)
    for k, w in enumerate(omegas):
        try:
            values[k] = _single_freq_loglik(w, trace)
        except DegenerateBasisError:
            continue
    if not np.any(np.isfinite(values)):
        raise DegenerateBasisError("single-frequency scan produced no finite values")
    k = int(np.nanargmax(values))
    w_best = omegas[k]
    if 0 < k < omegas.size - 1 and np.all(np.isfinite(values[k - 1 : k + 2])):
        fx = 0.5 * (values[k + 1] - values[k - 1])
        fxx = values[k + 1] - 2.0 * values[k] + values[k - 1]
        if fxx < 0.0:
            dk = float(np.clip(-fx / fxx, -0.5, 0.5))
            w_best = omegas[k] + dk * 0.5 * (omegas[k + 1] - omegas[k - 1])
    try:
        best = _single_freq_loglik(float(w_best), trace)
    except DegenerateBasisError:
        best = float(values[k])
    return float(est.loglik - max(best, float(values[k])))


@dataclass(frozen=True)
class SpectralConfig:
    """Grid construction for the two-step estimator.

    The omega axis spans ``omega_span`` times the periodogram peak and
    the delta_omega axis runs from 0 to ``delta_omega_frac`` times that
    peak, unless ``omega_center`` overrides the periodogram.
    """

    omega_span: tuple = (0.5, 1.5)
    omega_cells: int = 200
    delta_omega_frac: float = 0.25
    delta_omega_cells: int = 200
    freq_range: tuple = (0.1, 10.0)
    freq_count: int = 991
    omega_center: float | None = None


@dataclass(frozen=True)
class SpectralEstimate:
    estimate: Estimate
    surface: LikelihoodSurface
    omega_center: float


def estimate_spectral(trace: DataTrace, config: SpectralConfig | None = None) -> SpectralEstimate:
    """Two-step front half: periodogram seed, grid scan, polished peak."""
    cfg = config or SpectralConfig()
    if cfg.omega_center is not None:
        center = float(cfg.omega_center)
    else:
        freqs = np.linspace(cfg.freq_range[0], cfg.freq_range[1], cfg.freq_count)
        power = periodogram(trace, freqs)
        center = float(freqs[int(np.argmax(power))])
    omegas = np.linspace(cfg.omega_span[0] * center, cfg.omega_span[1] * center, cfg.omega_cells)
    delta_omegas = np.linspace(0.0, cfg.delta_omega_frac * center, cfg.delta_omega_cells)
    surface = likelihood_surface(trace, omegas, delta_omegas)
    estimate = find_peak(surface, trace)
    return SpectralEstimate(estimate=estimate, surface=surface, omega_center=center)
