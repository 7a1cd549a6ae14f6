"""Kernel backend selection.

Hot numeric kernels are written once as plain Python functions operating on
scalars/ndarrays and compiled with numba's @njit when available.  The active
backend is chosen at import time from the environment:

    SPLITSCHED_BACKEND=numba   force numba (ImportError if numba is missing)
    SPLITSCHED_BACKEND=numpy   pure Python/numpy fallback (no compilation)
    unset / auto               numba if importable, else numpy

fastmath is left OFF so both backends produce bit-identical floating point
results for the same inputs.  ``active_backend()`` reports which path is live;
the benchmark CLI compares the two by spawning subprocesses with the flag set.
"""

import os

_MODE = os.environ.get("SPLITSCHED_BACKEND", "auto").lower()

if _MODE not in ("auto", "numba", "numpy"):
    raise ValueError(
        "SPLITSCHED_BACKEND must be 'numba', 'numpy' or unset, got %r" % _MODE
    )

HAS_NUMBA = False
if _MODE in ("auto", "numba"):
    try:
        from numba import njit as _njit

        HAS_NUMBA = True
    except ImportError:
        if _MODE == "numba":
            raise
        HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and _MODE != "numpy"


def maybe_jit(fn):
    """Compile ``fn`` with numba when the numba backend is active, else
    return it unchanged.  Applied at definition time in _kernels.py."""
    if USE_NUMBA:
        return _njit(cache=True, fastmath=False)(fn)
    return fn


def active_backend():
    return "numba" if USE_NUMBA else "numpy"
