"""Direct maximum likelihood over the polar parameters (Omega, alpha, epsilon).

The residual-based log-likelihood ::

    L = -(Nt / 2) * ln( sum_j (d_j - p11(t_j))^2 )

is evaluated with the exact eigensystem signal (no closed-form shortcut
is assumed beyond d3 = 0).  A coarse 3-d grid locates the basin of the
global optimum and a derivative-free simplex polishes it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import kernels
from .errors import InvalidParameterError
from .measurement import DataTrace
from .quantum import (
    PolarParams,
    build_hamiltonian,
    canonical_polar,
    ground_population,
    polar_to_couplings,
)

__all__ = [
    "Grid3",
    "DirectEstimate",
    "default_grid_axes",
    "direct_log_likelihood",
    "grid_scan3",
    "refine_local",
    "estimate_direct",
]

RSS_FLOOR = 1e-300


def default_grid_axes() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coarse scan axes bracketing couplings of order one."""
    return (
        np.linspace(0.1, 4.0, 32),
        np.linspace(0.0, math.pi / 2.0, 32),
        np.linspace(-1.25, 1.25, 32),
    )


@dataclass(frozen=True)
class Grid3:
    """Exhaustive log-likelihood scan over the three polar parameters."""

    omega_cap_axis: np.ndarray
    alpha_axis: np.ndarray
    epsilon_axis: np.ndarray
    values: np.ndarray  # shape (n_omega, n_alpha, n_epsilon)
    argmax_index: tuple

    @property
    def argmax_params(self) -> PolarParams:
        io, ia, ie = self.argmax_index
        return PolarParams(
            omega_cap=float(self.omega_cap_axis[io]),
            alpha=float(self.alpha_axis[ia]),
            epsilon=float(self.epsilon_axis[ie]),
        )


@dataclass(frozen=True)
class DirectEstimate:
    polar: PolarParams
    loglik: float
    n_evaluations: int
    converged: bool


def _rss(d1: float, d2: float, delta: float, trace: DataTrace) -> float:
    H = np.array([[0.0, d1, 0.0], [d1, 0.0, d2], [0.0, d2, delta]])
    residual = trace.frequencies - ground_population(H, trace.times)
    return float(residual @ residual)


def direct_log_likelihood(polar: PolarParams, trace: DataTrace) -> float:
    """Log-likelihood of the raw trace under the exact model; larger is better.

    Its argmax coincides with the least-squares argmin; the floor keeps
    the perfect-fit (zero-residual) case finite.
    """
    couplings = polar_to_couplings(polar)
    rss = _rss(couplings.d1, couplings.d2, couplings.delta, trace)
    return -0.5 * trace.n_points * math.log(rss + RSS_FLOOR)


def grid_scan3(trace: DataTrace, axes=None) -> Grid3:
    """Evaluate the likelihood on the full 3-d grid; ties break to the lowest index triple."""
    om, al, ep = axes if axes is not None else default_grid_axes()
    om = np.asarray(om, dtype=float)
    al = np.asarray(al, dtype=float)
    ep = np.asarray(ep, dtype=float)
    if om.size == 0 or al.size == 0 or ep.size == 0:
        raise InvalidParameterError("grid axes must be non-empty")
    values = kernels.direct_grid_loglik(
        np.ascontiguousarray(trace.times),
        np.ascontiguousarray(trace.frequencies),
        np.ascontiguousarray(om),
        np.ascontiguousarray(al),
        np.ascontiguousarray(ep),
        RSS_FLOOR,
    )
    flat = int(np.argmax(values))  # first occurrence = lowest (Omega, alpha, epsilon) triple
    argmax_index = tuple(int(x) for x in np.unravel_index(flat, values.shape))
    return Grid3(om, al, ep, values, argmax_index)


def refine_local(
    trace: DataTrace,
    start: PolarParams,
    max_evals: int = 2000,
    xtol: float = 1e-6,
) -> DirectEstimate:
    """Simplex maximization of the likelihood from a grid starting point.

    The objective is evaluated without gauge restrictions (p11 is even in
    d1 and d2) and the result is mapped back into Omega >= 0,
    alpha in [0, pi/2].  A run that exhausts the evaluation budget is
    returned with ``converged=False``.
    """
    nt = trace.n_points

    def negative(x):
        d1 = x[0] * math.cos(x[1])
        d2 = x[0] * math.sin(x[1])
        rss = _rss(abs(d1), abs(d2), 4.0 * x[2], trace)
        return 0.5 * nt * math.log(rss + RSS_FLOOR)

    result = optimize.minimize(
        negative,
        x0=np.array(start.as_tuple()),
        method="Nelder-Mead",
        options={"xatol": xtol, "fatol": 1e-9, "maxfev": max_evals},
    )
    polar = canonical_polar(*(float(v) for v in result.x))
    return DirectEstimate(
        polar=polar,
        loglik=direct_log_likelihood(polar, trace),
        n_evaluations=int(result.nfev),
        converged=bool(result.success),
    )


@dataclass(frozen=True)
class DirectResult:
    estimate: DirectEstimate
    grid: Grid3


def estimate_direct(trace: DataTrace, axes=None) -> DirectResult:
    """Grid scan followed by local refinement (the one-call front end)."""
    grid = grid_scan3(trace, axes)
    estimate = refine_local(trace, grid.argmax_params)
    return DirectResult(estimate=estimate, grid=grid)
