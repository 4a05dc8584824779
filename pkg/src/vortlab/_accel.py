"""Numba availability switch.

Set ``VORTLAB_DISABLE_NUMBA=1`` to force the pure-numpy kernels, e.g. for
debugging or on platforms without numba wheels.
"""
import os

_FLAG = os.environ.get("VORTLAB_DISABLE_NUMBA", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(func):
    """Compile ``func`` in nopython mode, or return None without numba.

    Returning None (rather than the Python function) keeps callers from
    silently running an interpreted triple loop.
    """
    if not HAVE_NUMBA:
        return None
    return numba.njit(cache=True, nogil=True)(func)
