"""Optional numba acceleration.

Kernels are written once in numba-compatible Python. When numba is importable
and ``FROSIM_DISABLE_NUMBA`` is unset (or ``0``), they are compiled with
``numba.njit``; otherwise the plain Python/numpy definitions are used as-is.
"""
import os

_flag = os.environ.get("FROSIM_DISABLE_NUMBA", "0").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError
    import numba as _numba
except ImportError:  # pragma: no cover - exercised via env flag
    _numba = None

NUMBA_ENABLED = _numba is not None


def njit(fn=None, **kwargs):
    """``numba.njit(cache=True)`` when enabled, identity otherwise."""
    if fn is None:
        return lambda f: njit(f, **kwargs)
    if _numba is None:
        return fn
    kwargs.setdefault("cache", True)
    return _numba.njit(**kwargs)(fn)


def backend():
    return "numba" if NUMBA_ENABLED else "numpy"
