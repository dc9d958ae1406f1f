"""Backend switch for the compiled kernels.

Set ``CSYNTH_DISABLE_NUMBA=1`` to force the vectorized numpy kernels. The
numpy path is also used when numba cannot be imported.
"""
import os

_DISABLED = os.environ.get("CSYNTH_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED
