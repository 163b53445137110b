"""Backend selection for the numeric kernels.

Set ``WRIGHT_LAB_DISABLE_NUMBA=1`` to force the pure-numpy path. When numba
is not importable the numpy path is used regardless.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_FLAG = os.environ.get("WRIGHT_LAB_DISABLE_NUMBA", "").strip().lower()

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and _FLAG not in {"1", "true", "yes", "on"}


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise."""
    if not NUMBA_AVAILABLE:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
