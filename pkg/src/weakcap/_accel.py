"""Numba switch.

Hot kernels are written twice: a ``@njit`` loop version and a vectorised
numpy version. Setting ``WEAKCAP_DISABLE_NUMBA=1`` (or running without numba
installed) routes every dispatcher to the numpy path.
"""
import os

_DISABLED = os.environ.get("WEAKCAP_DISABLE_NUMBA", "").strip().lower() in {
    "1", "true", "yes", "on",
}

try:
    if _DISABLED:
        raise ImportError
    import numba as _nb
    HAVE_NUMBA = True
except ImportError:
    _nb = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED

njit_kwargs = {"nogil": True, "cache": True, "fastmath": False}


def njit(func):
    """Compile ``func`` with numba when available, else return it unchanged."""
    if HAVE_NUMBA:
        return _nb.njit(**njit_kwargs)(func)
    return func


def pick(numba_impl, numpy_impl):
    """Return the implementation selected by the environment flag."""
    return numba_impl if USE_NUMBA else numpy_impl
