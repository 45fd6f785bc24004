"""Closed-form population signal and the cosine design basis.

With d3 = 0 the ground-state population has exactly four spectral lines::

    p11(t) = a0 + a1 cos((omega - delta_omega) t)
                + a2 cos((omega + delta_omega) t)
                + a3 cos(2 omega t)

where the amplitudes follow from the ground-state overlaps c_k of the
eigenvectors (a0 = sum c_k^2, a1 = 2 c1 c2, a2 = 2 c2 c3, a3 = 2 c1 c3)
and the frequencies from the eigenvalue gaps.  Amplitudes are pinned to
ascending eigenvalue order, which makes the inverse map single-valued.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, UnsupportedModelError
from .quantum import bohr_frequencies, spectral_decompose

__all__ = [
    "SignalParams",
    "DesignMatrix",
    "signal_from_hamiltonian",
    "eval_signal",
    "design_matrix",
    "canonicalize",
]


@dataclass(frozen=True)
class SignalParams:
    """Amplitudes and frequencies of the four-line cosine model.

    Fitted instances may violate positivity / normalization of the
    amplitudes; physical validity is only checked at reconstruction time.
    """

    a0: float
    a1: float
    a2: float
    a3: float
    omega: float
    delta_omega: float

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([self.a0, self.a1, self.a2, self.a3])


def canonicalize(sp: SignalParams) -> SignalParams:
    """Fold a negative splitting into the amplitude labels.

    The signal is even in delta_omega up to swapping a1 and a2, so the
    canonical form has delta_omega >= 0.
    """
    if sp.delta_omega >= 0.0:
        return sp
    return SignalParams(sp.a0, sp.a2, sp.a1, sp.a3, sp.omega, -sp.delta_omega)


def signal_from_hamiltonian(H) -> SignalParams:
    """Closed-form signal parameters of a d3 = 0 Hamiltonian."""
    H = np.asarray(H, dtype=float)
    scale = 1.0 + np.abs(H).max()
    if abs(H[0, 2]) > 1e-12 * scale:
        raise UnsupportedModelError(
            "the four-line signal model requires d3 = 0, got d3=%r" % (H[0, 2],)
        )
    sd = spectral_decompose(H)
    c1, c2, c3 = sd.overlaps
    omega, delta_omega = bohr_frequencies(sd)
    return canonicalize(
        SignalParams(
            a0=c1 * c1 + c2 * c2 + c3 * c3,
            a1=2.0 * c1 * c2,
            a2=2.0 * c2 * c3,
            a3=2.0 * c1 * c3,
            omega=omega,
            delta_omega=delta_omega,
        )
    )


def eval_signal(sp: SignalParams, t):
    """Evaluate the cosine model at scalar or array times."""
    t_arr = np.asarray(t, dtype=float)
    value = (
        sp.a0
        + sp.a1 * np.cos((sp.omega - sp.delta_omega) * t_arr)
        + sp.a2 * np.cos((sp.omega + sp.delta_omega) * t_arr)
        + sp.a3 * np.cos(2.0 * sp.omega * t_arr)
    )
    if t_arr.ndim == 0:
        return float(value)
    return value


@dataclass(frozen=True)
class DesignMatrix:
    """Basis functions evaluated at the sample times (rows = functions)."""

    entries: np.ndarray  # shape (4, Nt)
    times: np.ndarray
    omega: float
    delta_omega: float


def design_matrix(omega: float, delta_omega: float, times) -> DesignMatrix:
    """Rows (1, cos((w-dw)t), cos((w+dw)t), cos(2wt)) at the sample times.

    Requires at least as many samples as basis functions.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 4:
        raise InvalidParameterError(
            "need at least 4 sample times for the 4-function basis, got %d" % times.size
        )
    entries = np.empty((4, times.size))
    entries[0] = 1.0
    entries[1] = np.cos((omega - delta_omega) * times)
    entries[2] = np.cos((omega + delta_omega) * times)
    entries[3] = np.cos(2.0 * omega * times)
    return DesignMatrix(entries=entries, times=times, omega=omega, delta_omega=delta_omega)
