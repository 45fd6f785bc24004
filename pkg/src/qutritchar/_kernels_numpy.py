"""Vectorized pure-numpy implementations of the grid kernels.

This is the fallback path when numba is disabled (``CHARACTERIZER_JIT=0``)
or unavailable.  The math matches ``_kernels_numba`` term by term -- same
trig identities, same clamping -- so the two backends agree to rounding
error; the test suite asserts this.

Memory is kept bounded by chunking the outer grid axis.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 16
_LOG_FLOOR = 1e-300


def surface_loglik(times, data, omegas, delta_omegas, deg_ratio, sat_eps):
    """Log-likelihood of the 4-function model on an (omega, delta_omega) grid.

    Returns ``(values, saturated, degenerate)``.  Degenerate cells (Gram
    matrix of the basis numerically rank-deficient) hold NaN; saturated
    cells are those where the basis explains the data to rounding error.
    """
    times = np.asarray(times, dtype=float)
    data = np.asarray(data, dtype=float)
    omegas = np.asarray(omegas, dtype=float)
    delta_omegas = np.asarray(delta_omegas, dtype=float)

    nt = times.size
    ni = omegas.size
    nj = delta_omegas.size
    values = np.full((ni, nj), np.nan)
    saturated = np.zeros((ni, nj), dtype=bool)
    degenerate = np.zeros((ni, nj), dtype=bool)

    sumd = float(data.sum())
    sumd2 = float(data @ data)
    if sumd2 <= 0.0:
        sumd2 = _LOG_FLOOR
    prefactor = 0.5 * (4.0 - nt)

    cd = np.cos(np.outer(delta_omegas, times))  # (nj, nt)
    sd = np.sin(np.outer(delta_omegas, times))

    for i0 in range(0, ni, _CHUNK):
        om = omegas[i0 : i0 + _CHUNK]
        ci = om.size
        cw = np.cos(np.outer(om, times))  # (ci, nt)
        sw = np.sin(np.outer(om, times))
        g3 = 2.0 * cw * cw - 1.0  # cos(2 w t), same identity as the jit kernel

        u = cw[:, None, :] * cd[None, :, :]  # (ci, nj, nt)
        v = sw[:, None, :] * sd[None, :, :]
        g1 = u + v  # cos((w - dw) t)
        g2 = u - v  # cos((w + dw) t)

        gram = np.empty((ci, nj, 4, 4))
        gram[..., 0, 0] = nt
        gram[..., 0, 1] = gram[..., 1, 0] = g1.sum(axis=-1)
        gram[..., 0, 2] = gram[..., 2, 0] = g2.sum(axis=-1)
        gram[..., 0, 3] = gram[..., 3, 0] = g3.sum(axis=-1)[:, None]
        gram[..., 1, 1] = (g1 * g1).sum(axis=-1)
        gram[..., 1, 2] = gram[..., 2, 1] = (g1 * g2).sum(axis=-1)
        gram[..., 1, 3] = gram[..., 3, 1] = np.einsum("ijt,it->ij", g1, g3)
        gram[..., 2, 2] = (g2 * g2).sum(axis=-1)
        gram[..., 2, 3] = gram[..., 3, 2] = np.einsum("ijt,it->ij", g2, g3)
        gram[..., 3, 3] = (g3 * g3).sum(axis=-1)[:, None]

        proj = np.empty((ci, nj, 4))
        proj[..., 0] = sumd
        proj[..., 1] = g1 @ data
        proj[..., 2] = g2 @ data
        proj[..., 3] = (g3 @ data)[:, None]

        alphas, evecs = np.linalg.eigh(gram)  # ascending in the last axis
        deg = (alphas[..., 3] <= 0.0) | (alphas[..., 0] <= deg_ratio * alphas[..., 3])

        q = np.einsum("ijrm,ijr->ijm", evecs, proj)
        with np.errstate(divide="ignore", invalid="ignore"):
            sumh2 = np.where(deg[..., None], 0.0, (q * q) / np.where(alphas > 0, alphas, 1.0)).sum(
                axis=-1
            )
        bracket = 1.0 - sumh2 / sumd2
        sat = bracket < sat_eps
        vals = prefactor * np.log10(np.maximum(bracket, _LOG_FLOOR))
        vals[deg] = np.nan

        values[i0 : i0 + ci] = vals
        saturated[i0 : i0 + ci] = sat & ~deg
        degenerate[i0 : i0 + ci] = deg

    return values, saturated, degenerate


def direct_grid_loglik(times, data, omega_cap_axis, alpha_axis, epsilon_axis, floor):
    """Residual-based log-likelihood on an (Omega, alpha, epsilon) grid.

    Each cell diagonalizes the corresponding d3 = 0 Hamiltonian and scores
    the data against its exact population signal.
    """
    times = np.asarray(times, dtype=float)
    data = np.asarray(data, dtype=float)
    om = np.asarray(omega_cap_axis, dtype=float)
    al = np.asarray(alpha_axis, dtype=float)
    ep = np.asarray(epsilon_axis, dtype=float)

    nt = times.size
    shape = (om.size, al.size, ep.size)
    oo, aa, ee = np.meshgrid(om, al, ep, indexing="ij")
    d1 = (oo * np.cos(aa)).ravel()
    d2 = (oo * np.sin(aa)).ravel()
    delta = 4.0 * ee.ravel()

    n_cells = d1.size
    out = np.empty(n_cells)
    chunk = 4096
    for c0 in range(0, n_cells, chunk):
        sl = slice(c0, min(c0 + chunk, n_cells))
        nc = sl.stop - sl.start
        H = np.zeros((nc, 3, 3))
        H[:, 0, 1] = H[:, 1, 0] = d1[sl]
        H[:, 1, 2] = H[:, 2, 1] = d2[sl]
        H[:, 2, 2] = delta[sl]
        w, v = np.linalg.eigh(H)
        c = v[:, 0, :] ** 2  # (nc, 3)
        a0 = (c * c).sum(axis=1)
        a1 = 2.0 * c[:, 0] * c[:, 1]
        a2 = 2.0 * c[:, 1] * c[:, 2]
        a3 = 2.0 * c[:, 0] * c[:, 2]
        w10 = w[:, 1] - w[:, 0]
        w21 = w[:, 2] - w[:, 1]
        w20 = w[:, 2] - w[:, 0]
        model = (
            a0[:, None]
            + a1[:, None] * np.cos(np.outer(w10, times))
            + a2[:, None] * np.cos(np.outer(w21, times))
            + a3[:, None] * np.cos(np.outer(w20, times))
        )
        rss = ((data[None, :] - model) ** 2).sum(axis=1)
        out[sl] = -0.5 * nt * np.log(rss + floor)

    return out.reshape(shape)
