"""Backend selection for the hot kernels.

Every kernel in :mod:`tirlab._kernels` exists twice: an ``@njit`` loop version
and a vectorised numpy version. The loop version is used when numba imports
and ``TIRLAB_NO_NUMBA`` is unset (or ``0``).
"""

import logging
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is an optional speedup
    numba = None

_FALSE = {"", "0", "false", "no", "off"}

HAVE_NUMBA = numba is not None
NUMBA_ENABLED = HAVE_NUMBA and os.environ.get("TIRLAB_NO_NUMBA", "").strip().lower() in _FALSE


def njit(func):
    """Compile ``func`` with numba when it is installed, else return it unchanged."""
    if numba is None:
        return func
    logging.getLogger("numba").setLevel(logging.WARNING)
    return numba.njit(cache=True)(func)


def backend():
    return "numba" if NUMBA_ENABLED else "numpy"


def set_backend(name):
    """Switch kernels to ``"numba"`` or ``"numpy"`` for the rest of the process."""
    global NUMBA_ENABLED
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    NUMBA_ENABLED = name == "numba"
