"""Backend selection and thread configuration.

Two execution backends provide the same kernel interface:

* ``numba``: JIT-compiled loops, the default when numba is importable.
* ``numpy``: vectorized fallback, always available.

The choice is controlled by the ``ICD_BACKEND`` environment variable
(``auto`` | ``numba`` | ``numpy``, default ``auto``) and re-read on every
resolve so tests and callers can switch at run time. ``ICD_THREADS`` caps
both the numba thread pool and the CLI's per-file worker pool.
"""

import os

from .errors import ConfigurationError
from .kernels import numpy_impl

try:
    from .kernels import numba_impl

    HAS_NUMBA = True
except ImportError:
    numba_impl = None
    HAS_NUMBA = False

BACKENDS = ("numba", "numpy")
_ENV_BACKEND = "ICD_BACKEND"
_ENV_THREADS = "ICD_THREADS"


def available_backends():
    """Names of the backends usable in this environment."""
    return BACKENDS if HAS_NUMBA else ("numpy",)


def resolve_backend(name=None):
    """Resolve a backend request to a concrete backend name.

    ``name`` wins over the environment; ``auto`` (or unset) picks numba
    when available. Asking for numba without numba installed is an error
    rather than a silent fallback.
    """
    req = (name or os.environ.get(_ENV_BACKEND, "auto")).strip().lower()
    if req in ("", "auto"):
        return "numba" if HAS_NUMBA else "numpy"
    if req == "numba":
        if not HAS_NUMBA:
            raise ConfigurationError("backend 'numba' requested but numba is not importable")
        return "numba"
    if req == "numpy":
        return "numpy"
    raise ConfigurationError(f"unknown backend {req!r}; expected auto, numba, or numpy")


def get_kernels(name=None):
    """Return the kernel module for the resolved backend."""
    return numba_impl if resolve_backend(name) == "numba" else numpy_impl


def thread_count():
    """Worker count for per-file parallelism, honoring ICD_THREADS."""
    raw = os.environ.get(_ENV_THREADS, "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise ConfigurationError(f"{_ENV_THREADS} must be a positive integer, got {raw!r}")
    return n


def configure_threads():
    """Apply the thread cap to numba's pool; returns the effective count."""
    n = thread_count()
    if HAS_NUMBA:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    return n
