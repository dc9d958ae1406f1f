"""Hot inner loops, compiled with numba or run as vectorized numpy.

Both backends expose the same functions with the same signatures; the
active one is chosen once at import time (see ``csynth._jit``).
"""
from .._jit import USE_NUMBA

if USE_NUMBA:
    from ._numba import (
        coord_roots,
        jacobi_sweeps,
        line_derivs,
        linesearch,
        potential_value,
        potential_value_grad,
    )

    BACKEND = "numba"
else:
    from ._numpy import (
        coord_roots,
        jacobi_sweeps,
        line_derivs,
        linesearch,
        potential_value,
        potential_value_grad,
    )

    BACKEND = "numpy"

__all__ = [
    "BACKEND",
    "coord_roots",
    "jacobi_sweeps",
    "line_derivs",
    "linesearch",
    "potential_value",
    "potential_value_grad",
]
