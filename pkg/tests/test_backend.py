"""Bitwise agreement between the compiled and the numpy stencil kernels.

Both implementations are written with identical expression trees so
the compiled path is not just close but reproduces the numpy path
exactly, float for float. That keeps every tolerance in this suite
meaningful under either backend and makes backend selection invisible
in regression data.
"""

import numpy as np
import pytest

from aggflow import _stencils_numpy as sn

numba = pytest.importorskip("numba")
from aggflow import _stencils_numba as sj  # noqa: E402


def padded(rng, shape):
    return rng.standard_normal(shape)


@pytest.fixture(scope="module")
def arrays():
    rng = np.random.default_rng(99)
    nx, nz = 16, 12
    return {
        "nx": nx,
        "nz": nz,
        "hx": 1.0 / nx,
        "hz": 1.3 / nz,
        "s": padded(rng, (nx + 4, nz + 4)),
        "nu": 1.0 + np.abs(padded(rng, (nx + 4, nz + 4))),
        "u": padded(rng, (nx + 4, nz + 4)),
        "w": padded(rng, (nx + 4, nz + 5)),
    }


def test_laplacian_bitwise(arrays):
    a = arrays
    got = sj.laplacian_cells_2d(a["s"], a["hx"], a["hz"])
    want = sn.laplacian_cells_2d(a["s"], a["hx"], a["hz"])
    assert np.array_equal(got, want)


def test_stress_div_bitwise(arrays):
    a = arrays
    gu, gw = sj.stress_div_2d(a["nu"], a["u"], a["w"], a["hx"], a["hz"])
    wu, ww = sn.stress_div_2d(a["nu"], a["u"], a["w"], a["hx"], a["hz"])
    assert np.array_equal(gu, wu)
    assert np.array_equal(gw, ww)


def test_advect_scalar_bitwise(arrays):
    a = arrays
    got = sj.advect_scalar_2d(a["u"], a["w"], a["s"], a["hx"], a["hz"])
    want = sn.advect_scalar_2d(a["u"], a["w"], a["s"], a["hx"], a["hz"])
    assert np.array_equal(got, want)


def test_advect_vector_bitwise(arrays):
    a = arrays
    gu, gw = sj.advect_vector_2d(a["u"], a["w"], a["hx"], a["hz"])
    wu, ww = sn.advect_vector_2d(a["u"], a["w"], a["hx"], a["hz"])
    assert np.array_equal(gu, wu)
    assert np.array_equal(gw, ww)


def test_backend_selection_env(monkeypatch):
    from aggflow import backend

    assert backend.BACKEND_NAME in ("numba", "numpy")
    monkeypatch.setenv("AGGFLOW_BACKEND", "nonsense")
    with pytest.raises(ValueError):
        backend._select()
    monkeypatch.setenv("AGGFLOW_BACKEND", "numpy")
    name, impl = backend._select()
    assert name == "numpy"
    assert impl is sn
