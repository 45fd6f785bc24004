"""JIT-compiled grid kernels.

Loop-level twins of the vectorized routines in ``_kernels_numpy`` -- same
formulas, same trig identities, same clamping -- compiled with numba.
Compilation results are cached on disk, and the kernels release the GIL
so campaign workers can run them concurrently.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_LOG_FLOOR = 1e-300


@njit(cache=True, nogil=True)
def surface_loglik(times, data, omegas, delta_omegas, deg_ratio, sat_eps):
    nt = times.size
    ni = omegas.size
    nj = delta_omegas.size
    values = np.full((ni, nj), np.nan)
    saturated = np.zeros((ni, nj), dtype=np.bool_)
    degenerate = np.zeros((ni, nj), dtype=np.bool_)

    sumd = 0.0
    sumd2 = 0.0
    for n in range(nt):
        sumd += data[n]
        sumd2 += data[n] * data[n]
    if sumd2 <= 0.0:
        sumd2 = _LOG_FLOOR
    prefactor = 0.5 * (4.0 - nt)

    cd = np.empty((nj, nt))
    sd = np.empty((nj, nt))
    for j in range(nj):
        for n in range(nt):
            arg = delta_omegas[j] * times[n]
            cd[j, n] = np.cos(arg)
            sd[j, n] = np.sin(arg)

    cw = np.empty(nt)
    sw = np.empty(nt)
    g3 = np.empty(nt)
    gram = np.empty((4, 4))
    proj = np.empty(4)

    for i in range(ni):
        w = omegas[i]
        s3 = 0.0
        s33 = 0.0
        p3 = 0.0
        for n in range(nt):
            arg = w * times[n]
            cw[n] = np.cos(arg)
            sw[n] = np.sin(arg)
            g3[n] = 2.0 * cw[n] * cw[n] - 1.0  # cos(2 w t)
            s3 += g3[n]
            s33 += g3[n] * g3[n]
            p3 += g3[n] * data[n]

        for j in range(nj):
            s1 = s2 = s11 = s12 = s22 = s13 = s23 = p1 = p2 = 0.0
            for n in range(nt):
                u = cw[n] * cd[j, n]
                v = sw[n] * sd[j, n]
                g1 = u + v  # cos((w - dw) t)
                g2 = u - v  # cos((w + dw) t)
                s1 += g1
                s2 += g2
                s11 += g1 * g1
                s12 += g1 * g2
                s22 += g2 * g2
                s13 += g1 * g3[n]
                s23 += g2 * g3[n]
                p1 += g1 * data[n]
                p2 += g2 * data[n]

            gram[0, 0] = nt
            gram[0, 1] = gram[1, 0] = s1
            gram[0, 2] = gram[2, 0] = s2
            gram[0, 3] = gram[3, 0] = s3
            gram[1, 1] = s11
            gram[1, 2] = gram[2, 1] = s12
            gram[1, 3] = gram[3, 1] = s13
            gram[2, 2] = s22
            gram[2, 3] = gram[3, 2] = s23
            gram[3, 3] = s33

            alphas, evecs = np.linalg.eigh(gram)
            if alphas[3] <= 0.0 or alphas[0] <= deg_ratio * alphas[3]:
                degenerate[i, j] = True
                continue

            proj[0] = sumd
            proj[1] = p1
            proj[2] = p2
            proj[3] = p3
            sumh2 = 0.0
            for m in range(4):
                q = 0.0
                for r in range(4):
                    q += evecs[r, m] * proj[r]
                sumh2 += q * q / alphas[m]

            bracket = 1.0 - sumh2 / sumd2
            if bracket < sat_eps:
                saturated[i, j] = True
                if bracket < _LOG_FLOOR:
                    bracket = _LOG_FLOOR
            values[i, j] = prefactor * np.log10(bracket)

    return values, saturated, degenerate


@njit(cache=True, nogil=True)
def direct_grid_loglik(times, data, omega_cap_axis, alpha_axis, epsilon_axis, floor):
    nt = times.size
    no = omega_cap_axis.size
    na = alpha_axis.size
    ne = epsilon_axis.size
    out = np.empty((no, na, ne))
    H = np.empty((3, 3))

    for io in range(no):
        for ia in range(na):
            d1 = omega_cap_axis[io] * np.cos(alpha_axis[ia])
            d2 = omega_cap_axis[io] * np.sin(alpha_axis[ia])
            for ie in range(ne):
                H[0, 0] = 0.0
                H[0, 1] = d1
                H[0, 2] = 0.0
                H[1, 0] = d1
                H[1, 1] = 0.0
                H[1, 2] = d2
                H[2, 0] = 0.0
                H[2, 1] = d2
                H[2, 2] = 4.0 * epsilon_axis[ie]
                w, v = np.linalg.eigh(H)
                c0 = v[0, 0] * v[0, 0]
                c1 = v[0, 1] * v[0, 1]
                c2 = v[0, 2] * v[0, 2]
                a0 = c0 * c0 + c1 * c1 + c2 * c2
                a1 = 2.0 * c0 * c1
                a2 = 2.0 * c1 * c2
                a3 = 2.0 * c0 * c2
                w10 = w[1] - w[0]
                w21 = w[2] - w[1]
                w20 = w[2] - w[0]
                rss = 0.0
                for n in range(nt):
                    t = times[n]
                    model = (
                        a0
                        + a1 * np.cos(w10 * t)
                        + a2 * np.cos(w21 * t)
                        + a3 * np.cos(w20 * t)
                    )
                    r = data[n] - model
                    rss += r * r
                out[io, ia, ie] = -0.5 * nt * np.log(rss + floor)

    return out
