"""Backend dispatch for the hot grid kernels (see ``_jit``)."""

from ._jit import JIT_ENABLED

if JIT_ENABLED:
    from ._kernels_numba import direct_grid_loglik, surface_loglik
else:
    from ._kernels_numpy import direct_grid_loglik, surface_loglik

BACKEND = "numba" if JIT_ENABLED else "numpy"

__all__ = ["surface_loglik", "direct_grid_loglik", "BACKEND"]
