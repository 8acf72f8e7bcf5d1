"""Backend selection for the hot kernels.

Set ``STROKEJOIN_DISABLE_JIT=1`` (or numba's own ``NUMBA_DISABLE_JIT=1``)
to run the vectorized numpy kernels instead of the compiled loops.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is optional
    numba = None


def _flag(name):
    return os.environ.get(name, "").strip().lower() not in ("", "0", "false", "no")


HAVE_NUMBA = numba is not None and not _flag("NUMBA_DISABLE_JIT")
USE_NUMBA = HAVE_NUMBA and not _flag("STROKEJOIN_DISABLE_JIT")


def njit(fn):
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
