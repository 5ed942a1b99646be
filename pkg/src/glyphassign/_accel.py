"""Backend selection for the hot kernels.

Kernels are written twice: a numba ``@njit`` loop version and a vectorized
numpy version.  Set ``GLYPHASSIGN_DISABLE_NUMBA=1`` to force the numpy path
(also used automatically when numba cannot be imported).
"""
import os

_DISABLED = os.environ.get("GLYPHASSIGN_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLED


def njit(*args, **kwargs):
    """``numba.njit(cache=True, nogil=True)`` when available, else identity."""
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    if not HAVE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    return _numba.njit(*args, **kwargs)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
