"""numba shim.  Set E2EV_NO_NUMBA=1 to force the pure-numpy kernels."""

from __future__ import annotations

import os

DISABLED = os.environ.get("E2EV_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if DISABLED:
        raise ImportError("disabled by E2EV_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


BACKEND = "numba" if HAVE_NUMBA else "numpy"
