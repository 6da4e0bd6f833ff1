"""JIT switch for the hot kernels.

Set ``SPARSE_PDE_DISABLE_JIT=1`` to run every kernel through its pure-numpy
path instead of the numba-compiled one. The flag is read once, at import.
"""

import os

_FLAG = os.environ.get("SPARSE_PDE_DISABLE_JIT", "").strip().lower()
DISABLE_JIT = _FLAG in {"1", "true", "yes", "on"}

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and not DISABLE_JIT


def njit(*args, **kwargs):
    """``numba.njit`` with caching, or the identity decorator when JIT is off."""
    if not USE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)


if USE_NUMBA:
    # probing an outdated TBB first only produces a warning
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    prange = numba.prange
else:
    prange = range
