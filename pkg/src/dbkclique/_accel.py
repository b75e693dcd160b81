"""Numba switch.

Set ``DBKCLIQUE_DISABLE_JIT=1`` to run every hot kernel through its
pure numpy/Python fallback instead of the compiled path.  The flag is read
once at import time; :func:`set_jit` flips it at runtime (used by the
benchmark and the equivalence tests).
"""
from __future__ import annotations

import os

try:
    import numba as nb

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    nb = None
    HAS_NUMBA = False

_FALSY = {"", "0", "false", "no", "off"}

USE_JIT = HAS_NUMBA and os.environ.get("DBKCLIQUE_DISABLE_JIT", "").strip().lower() in _FALSY


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise."""
    if HAS_NUMBA:
        return nb.njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]
    return lambda func: func


def jit_enabled() -> bool:
    return USE_JIT


def set_jit(enabled: bool) -> bool:
    """Select the compiled kernels (True) or the fallbacks (False).

    Returns the previous setting.
    """
    global USE_JIT
    previous = USE_JIT
    USE_JIT = bool(enabled) and HAS_NUMBA
    return previous
