"""Inversion of fitted signal parameters into a physical Hamiltonian.

The four amplitudes determine the ground-state overlaps up to
normalization, the two frequencies fix the eigenvalue gaps, and the
structural zero at the (1,1) entry anchors the unobservable global energy
shift through ``sum_k c_k lambda_k = 0``.  Noisy fits can land outside
the physical set (negative amplitudes or radicands); those cases are
flagged, never silently returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, UnphysicalModelError
from .quantum import CouplingParams, build_hamiltonian
from .signal import SignalParams

__all__ = [
    "ReconstructionResult",
    "amplitudes_to_overlaps",
    "reconstruct_hamiltonian",
    "relative_error",
]

# Radicands above this (negative) tolerance are treated as rounding noise
# and clamped to zero; anything lower is a genuinely unphysical fit.
RADICAND_TOL = 1e-9


@dataclass(frozen=True)
class ReconstructionResult:
    """Outcome of the algebraic inversion.

    ``params`` is None when no Hamiltonian could be formed at all
    (missing spectral line); for negative-radicand failures the clamped
    parameters are kept so the error of the outlier can still be reported,
    with ``valid`` False either way.
    """

    params: CouplingParams | None
    overlaps: np.ndarray | None
    residual: float
    valid: bool
    reason: str | None = None

    def as_dict(self, rel_error: float | None = None) -> dict:
        out = {
            "d1": None if self.params is None else self.params.d1,
            "d2": None if self.params is None else self.params.d2,
            "delta": None if self.params is None else self.params.delta,
            "valid": self.valid,
            "residual": None if math.isnan(self.residual) else self.residual,
        }
        if self.reason is not None:
            out["reason"] = self.reason
        if rel_error is not None:
            out["relative_error"] = rel_error
        return out


def amplitudes_to_overlaps(sp: SignalParams) -> tuple[np.ndarray, float]:
    """Invert a1 = 2 c1 c2, a2 = 2 c2 c3, a3 = 2 c1 c3 for the overlaps.

    Returns the renormalized overlaps and a consistency residual
    combining the a0 mismatch and the pre-normalization deficit.  All
    three line amplitudes must be strictly positive.
    """
    if not (sp.a1 > 0.0 and sp.a2 > 0.0 and sp.a3 > 0.0):
        raise UnphysicalModelError(
            "missing-line",
            "all three spectral lines must have positive amplitude, got a1=%g a2=%g a3=%g"
            % (sp.a1, sp.a2, sp.a3),
        )
    c1 = math.sqrt(sp.a1 * sp.a3 / (2.0 * sp.a2))
    c2 = math.sqrt(sp.a1 * sp.a2 / (2.0 * sp.a3))
    c3 = math.sqrt(sp.a2 * sp.a3 / (2.0 * sp.a1))
    total = c1 + c2 + c3
    overlaps = np.array([c1, c2, c3]) / total
    residual = abs(sp.a0 - float(overlaps @ overlaps)) + abs(1.0 - total)
    return overlaps, residual


def reconstruct_hamiltonian(model) -> ReconstructionResult:
    """Recover (d1, d2, delta) from fitted signal parameters.

    Accepts a :class:`~qutritchar.signal.SignalParams` or any object with
    a ``to_signal_params`` method (e.g. a spectral
    :class:`~qutritchar.spectral.Estimate`).
    """
    sp = model if isinstance(model, SignalParams) else model.to_signal_params()
    try:
        overlaps, residual = amplitudes_to_overlaps(sp)
    except UnphysicalModelError as err:
        return ReconstructionResult(
            params=None, overlaps=None, residual=float("nan"), valid=False, reason=err.reason
        )

    gap12 = sp.omega - sp.delta_omega
    gap23 = sp.omega + sp.delta_omega
    # Anchor the spectrum so the weighted eigenvalue sum vanishes (the
    # model matrix has a structural zero at entry (1,1)).
    mu = -(overlaps[1] * gap12 + overlaps[2] * (gap12 + gap23))
    lam = np.array([mu, mu + gap12, mu + gap12 + gap23])
    delta = float(lam.sum())

    d1_sq = float(overlaps @ (lam * lam))
    e2 = lam[0] * lam[1] + lam[0] * lam[2] + lam[1] * lam[2]
    d2_sq = float(-e2 - d1_sq)

    valid = True
    reason = None
    if d1_sq < -RADICAND_TOL or d2_sq < -RADICAND_TOL:
        valid = False
        reason = "negative-radicand"
    params = CouplingParams(
        d1=math.sqrt(max(d1_sq, 0.0)),
        d2=math.sqrt(max(d2_sq, 0.0)),
        d3=0.0,
        delta=delta,
    )
    return ReconstructionResult(
        params=params, overlaps=overlaps, residual=residual, valid=valid, reason=reason
    )


def relative_error(estimated: CouplingParams, true: CouplingParams) -> float:
    """Frobenius-norm relative error between the two model matrices."""
    H_true = build_hamiltonian(true)
    norm_true = np.linalg.norm(H_true)
    if norm_true == 0.0:
        raise InvalidParameterError("relative error is undefined for a zero Hamiltonian")
    return float(np.linalg.norm(build_hamiltonian(estimated) - H_true) / norm_true)
