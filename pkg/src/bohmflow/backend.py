"""Kernel backend selection.

Hot numeric kernels exist twice: a numba @njit implementation and a pure
numpy one.  ``BOHMFLOW_BACKEND`` picks which one the package uses:

    auto   (default) numba when importable, numpy otherwise
    numba  require numba; fall back with a warning if it is missing
    numpy  force the pure-numpy path

``BOHMFLOW_THREADS`` caps numba's worker threads (absent = hardware default).
"""

import os
import warnings

_requested = os.environ.get("BOHMFLOW_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "numba", "numpy"):
    warnings.warn(
        f"unknown BOHMFLOW_BACKEND={_requested!r}, using 'auto'", stacklevel=1
    )
    _requested = "auto"

HAS_NUMBA = False
if _requested in ("auto", "numba"):
    try:
        import numba  # noqa: F401

        HAS_NUMBA = True
    except ImportError:
        if _requested == "numba":
            warnings.warn(
                "BOHMFLOW_BACKEND=numba but numba is not importable; "
                "falling back to numpy kernels",
                stacklevel=1,
            )

USE_NUMBA = HAS_NUMBA and _requested != "numpy"
BACKEND = "numba" if USE_NUMBA else "numpy"


def apply_thread_cap():
    """Apply BOHMFLOW_THREADS to the numba thread pool (no-op otherwise)."""
    raw = os.environ.get("BOHMFLOW_THREADS")
    if not raw or not USE_NUMBA:
        return None
    try:
        n = int(raw)
    except ValueError:
        warnings.warn(f"ignoring non-integer BOHMFLOW_THREADS={raw!r}", stacklevel=1)
        return None
    if n < 1:
        return None
    import numba

    n = min(n, numba.config.NUMBA_NUM_THREADS)
    numba.set_num_threads(n)
    return n
