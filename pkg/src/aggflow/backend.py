"""Stencil backend selection.

The hot 2D kernels exist twice: a vectorized numpy reference and a
numba-compiled twin with identical semantics. The environment
variable ``AGGFLOW_BACKEND`` picks between them:

* ``auto`` (default): use numba when it imports, else numpy;
* ``numba``: require the compiled kernels, raise if unavailable;
* ``numpy``: force the reference kernels.

Only the 2D periodic-x / wall-z fast path is compiled; every other
layout (3D, wall-bounded horizontal axes) always runs the generic
numpy code in the operators module, regardless of this switch.
"""

from __future__ import annotations

import os

from . import _stencils_numpy

__all__ = [
    "BACKEND_NAME",
    "active_backend",
    "laplacian_cells_2d",
    "stress_div_2d",
    "advect_scalar_2d",
    "advect_vector_2d",
]


def _select():
    choice = os.environ.get("AGGFLOW_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"AGGFLOW_BACKEND must be 'auto', 'numba', or 'numpy', got {choice!r}"
        )
    if choice == "numpy":
        return "numpy", _stencils_numpy
    try:
        from . import _stencils_numba
        return "numba", _stencils_numba
    except ImportError:
        if choice == "numba":
            raise
        return "numpy", _stencils_numpy


BACKEND_NAME, _impl = _select()

laplacian_cells_2d = _impl.laplacian_cells_2d
stress_div_2d = _impl.stress_div_2d
advect_scalar_2d = _impl.advect_scalar_2d
advect_vector_2d = _impl.advect_vector_2d


def active_backend() -> str:
    """Name of the kernel set in use, ``numba`` or ``numpy``."""
    return BACKEND_NAME
