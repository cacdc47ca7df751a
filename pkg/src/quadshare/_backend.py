"""Kernel backend selection.

Hot numeric kernels ship in two flavours: numba @njit loop kernels and
vectorized pure-numpy equivalents. The env var QUADSHARE_BACKEND picks one:

    QUADSHARE_BACKEND=numba   use @njit kernels (default when numba imports)
    QUADSHARE_BACKEND=numpy   force the pure-numpy fallback

Selection happens once at import; benchmarks/bench_kernels.py runs both in
subprocesses to compare them.
"""
from __future__ import annotations

import os

_ENV_VAR = "QUADSHARE_BACKEND"


def _pick_backend() -> str:
    choice = os.environ.get(_ENV_VAR, "").strip().lower()
    if choice == "numpy":
        return "numpy"
    if choice not in ("", "numba"):
        raise ValueError(f"{_ENV_VAR} must be 'numba' or 'numpy', got {choice!r}")
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _pick_backend()
USE_NUMBA = BACKEND == "numba"


def active_backend() -> str:
    """Name of the kernel backend selected at import time."""
    return BACKEND


if USE_NUMBA:
    from numba import njit
else:
    def njit(*args, **kwargs):  # type: ignore[misc]
        """No-op stand-in so kernel modules import cleanly without numba."""
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap
