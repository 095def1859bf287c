"""
Optional numba acceleration.

Set ``STABENT_NO_NUMBA=1`` to force the pure-numpy code paths (useful for
debugging and for environments where numba cannot be installed).
``STABENT_NUM_THREADS`` sets the default numba thread count.
"""
import os

_disabled = os.environ.get("STABENT_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

# the TBB probe emits a version warning on some hosts; OpenMP is always fine here
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

try:
    if _disabled:
        raise ImportError("numba disabled by STABENT_NO_NUMBA")
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False
    prange = range

    def njit(*args, **kw):
        if len(args) == 1 and callable(args[0]) and not kw:
            return args[0]
        return lambda f: f


def set_num_threads(count):
    """Set the worker count for parallel kernels; a no-op without numba."""
    if HAVE_NUMBA and count:
        numba.set_num_threads(max(1, min(int(count), numba.config.NUMBA_NUM_THREADS)))


def default_backend():
    return "numba" if HAVE_NUMBA else "numpy"


_env_threads = os.environ.get("STABENT_NUM_THREADS")
if _env_threads:
    set_num_threads(_env_threads)
