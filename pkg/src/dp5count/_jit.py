"""JIT switch for the hot kernels.

Kernels are written once, in the numba-compatible subset of Python/numpy.
Setting ``DP5_NO_JIT=1`` (or running without numba installed) turns the
decorators into no-ops, so the same source runs as plain Python on numpy
arrays.  The two paths must give identical integers; ``benchmarks/`` times
them against each other.
"""

from __future__ import annotations

import os

JIT_DISABLED = os.environ.get("DP5_NO_JIT", "").strip().lower() not in ("", "0", "false", "no")

try:
    if JIT_DISABLED:
        raise ImportError
    import numba as _nb
except ImportError:  # pragma: no cover - exercised via the env flag in a subprocess
    _nb = None


def njit(*args, **kwargs):
    if _nb is None:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return _nb.njit(*args, **kwargs)


def jit_enabled() -> bool:
    return _nb is not None
