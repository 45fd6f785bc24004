"""Exact model of a qubit coupled to one nuisance level.

The rotating-frame Hamiltonian is the real symmetric 3x3 matrix ::

    [[0,  d1, d3],
     [d1, 0,  d2],
     [d3, d2, delta]]

with couplings d1, d2, d3 >= 0 (the rotating frame is chosen so the
off-diagonal elements are real and non-negative) and a detuning delta of
either sign.  Every observable quantity follows from the eigensystem of
this matrix; no time-dependent propagation is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, UnsupportedModelError

__all__ = [
    "CouplingParams",
    "PolarParams",
    "SpectralDecomposition",
    "build_hamiltonian",
    "spectral_decompose",
    "transition_probability",
    "ground_population",
    "bohr_frequencies",
    "polar_to_couplings",
    "couplings_to_polar",
    "canonical_polar",
]

HALF_PI = math.pi / 2.0


@dataclass(frozen=True)
class CouplingParams:
    """Couplings and detuning of the three-level model (angular frequency units)."""

    d1: float
    d2: float
    d3: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        for name in ("d1", "d2", "d3"):
            value = getattr(self, name)
            if not value >= 0.0:
                raise InvalidParameterError(
                    "%s must be >= 0 in the rotating-frame gauge, got %r" % (name, value)
                )

    def as_tuple(self):
        return (self.d1, self.d2, self.d3, self.delta)


@dataclass(frozen=True)
class PolarParams:
    """Polar form of the couplings: d1 = Omega cos(alpha), d2 = Omega sin(alpha), delta = 4 epsilon."""

    omega_cap: float
    alpha: float
    epsilon: float

    def __post_init__(self):
        if not self.omega_cap >= 0.0:
            raise InvalidParameterError("omega_cap must be >= 0, got %r" % (self.omega_cap,))
        if not (0.0 <= self.alpha <= HALF_PI):
            raise InvalidParameterError("alpha must lie in [0, pi/2], got %r" % (self.alpha,))

    def as_tuple(self):
        return (self.omega_cap, self.alpha, self.epsilon)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigensystem of the model Hamiltonian.

    Attributes
    ----------
    eigenvalues : ndarray, shape (3,)
        Sorted ascending.
    overlaps : ndarray, shape (3,)
        Squared ground-state components |<1|E_k>|^2; they sum to 1.
    eigenvectors : ndarray, shape (3, 3)
        Column k is the eigenvector of ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    overlaps: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", np.asarray(self.eigenvalues, dtype=float))
        object.__setattr__(self, "overlaps", np.asarray(self.overlaps, dtype=float))
        object.__setattr__(self, "eigenvectors", np.asarray(self.eigenvectors, dtype=float))


def build_hamiltonian(params: CouplingParams) -> np.ndarray:
    """Assemble the 3x3 rotating-frame matrix for the given couplings."""
    d1, d2, d3, delta = params.as_tuple()
    return np.array(
        [
            [0.0, d1, d3],
            [d1, 0.0, d2],
            [d3, d2, delta],
        ]
    )


def _check_symmetric3(H) -> np.ndarray:
    H = np.asarray(H, dtype=float)
    if H.shape != (3, 3):
        raise InvalidParameterError("expected a 3x3 matrix, got shape %r" % (H.shape,))
    scale = 1.0 + np.abs(H).max()
    if np.abs(H - H.T).max() > 1e-9 * scale:
        raise InvalidParameterError("matrix is not symmetric")
    return H


def spectral_decompose(H) -> SpectralDecomposition:
    """Eigenvalues (ascending), ground-state overlaps and eigenvectors of H.

    Uses the dedicated symmetric solver, which sorts ascending
    deterministically; ties keep the solver's ordering.
    """
    H = _check_symmetric3(H)
    eigenvalues, eigenvectors = np.linalg.eigh(H)
    overlaps = eigenvectors[0, :] ** 2
    return SpectralDecomposition(eigenvalues, overlaps, eigenvectors)


def _transition_amplitude_weights(sd: SpectralDecomposition, k: int, l: int) -> np.ndarray:
    return sd.eigenvectors[k - 1, :] * sd.eigenvectors[l - 1, :]


def transition_probability(H, k: int, l: int, t):
    """Probability |<k| exp(-i H t) |l>|^2, via the spectral decomposition.

    ``k`` and ``l`` are 1-based level indices; ``t`` may be a scalar or an
    array of times.
    """
    if k not in (1, 2, 3) or l not in (1, 2, 3):
        raise InvalidParameterError("level indices must be in {1, 2, 3}, got (%r, %r)" % (k, l))
    sd = spectral_decompose(H)
    weights = _transition_amplitude_weights(sd, k, l)
    t_arr = np.asarray(t, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(t_arr, sd.eigenvalues))
    prob = np.abs(phases @ weights) ** 2
    if t_arr.ndim == 0:
        return float(prob)
    return prob


def ground_population(H, times) -> np.ndarray:
    """Convenience wrapper: p11(t) for an array of times."""
    return transition_probability(H, 1, 1, np.atleast_1d(np.asarray(times, dtype=float)))


def ground_population_from_decomposition(sd: SpectralDecomposition, times) -> np.ndarray:
    """p11(t) when the decomposition is already available."""
    t_arr = np.atleast_1d(np.asarray(times, dtype=float))
    phases = np.exp(-1j * np.multiply.outer(t_arr, sd.eigenvalues))
    return np.abs(phases @ sd.overlaps) ** 2


def bohr_frequencies(sd: SpectralDecomposition) -> tuple[float, float]:
    """Center frequency and (signed) half-splitting of the spectrum.

    Returns ``omega = (l3 - l1) / 2`` and
    ``delta_omega = (l3 - 2 l2 + l1) / 2``, so the two adjacent gaps are
    ``omega -/+ delta_omega``.  ``delta_omega`` is negative when the middle
    eigenvalue lies above the midpoint; callers that want the even-signal
    convention take the absolute value (see :func:`signal.canonicalize`).
    """
    l1, l2, l3 = sd.eigenvalues
    return (l3 - l1) / 2.0, (l3 - 2.0 * l2 + l1) / 2.0


def polar_to_couplings(p: PolarParams) -> CouplingParams:
    """(Omega, alpha, epsilon) -> (d1, d2, d3=0, delta)."""
    return CouplingParams(
        d1=p.omega_cap * math.cos(p.alpha),
        d2=p.omega_cap * math.sin(p.alpha),
        d3=0.0,
        delta=4.0 * p.epsilon,
    )


def couplings_to_polar(c: CouplingParams) -> PolarParams:
    """Inverse of :func:`polar_to_couplings`; requires d3 = 0."""
    if c.d3 != 0.0:
        raise UnsupportedModelError("polar form assumes d3 = 0, got d3=%r" % (c.d3,))
    return PolarParams(
        omega_cap=math.hypot(c.d1, c.d2),
        alpha=math.atan2(c.d2, c.d1),
        epsilon=c.delta / 4.0,
    )


def canonical_polar(omega_cap: float, alpha: float, epsilon: float) -> PolarParams:
    """Map an unconstrained (Omega, alpha, epsilon) triple into the gauge.

    p11 is invariant under sign flips of d1 and d2, so any triple is
    equivalent to one with Omega >= 0 and alpha in [0, pi/2]; this returns
    that representative.
    """
    d1 = omega_cap * math.cos(alpha)
    d2 = omega_cap * math.sin(alpha)
    return PolarParams(
        omega_cap=math.hypot(d1, d2),
        alpha=math.atan2(abs(d2), abs(d1)),
        epsilon=epsilon,
    )
