"""Backend selection for the hot grid kernels.

The package ships two implementations of each grid kernel: a numba
``@njit`` version and a vectorized pure-numpy version.  The environment
variable ``CHARACTERIZER_JIT`` picks the backend:

* unset / ``auto``  -- numba when importable, numpy otherwise
* ``0`` / ``numpy`` -- force the pure-numpy fallback
* ``1`` / ``numba`` -- require numba (ImportError if missing)
"""

import os

_FLAG = os.environ.get("CHARACTERIZER_JIT", "").strip().lower()


def _numba_importable():
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


if _FLAG in ("0", "false", "off", "numpy"):
    JIT_ENABLED = False
elif _FLAG in ("1", "true", "on", "numba"):
    import numba  # noqa: F401  -- fail loudly when explicitly requested

    JIT_ENABLED = True
else:
    JIT_ENABLED = _numba_importable()
