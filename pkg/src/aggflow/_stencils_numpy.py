"""Vectorized reference kernels for the 2D fast-path stencils.

These cover the primary run layout: two dimensions, periodic first
axis, wall-bounded second axis. All kernels take ghost-padded float64
arrays (two layers per side, already filled by the caller) plus the
two spacings, and return freshly allocated interior arrays. The
accelerated twins in the numba module implement the same formulas
with identical operation order, so the two backends agree bitwise.

Layout reminders, with G = 2 the ghost depth and (nx, nz) cells:

* cell samples: padded shape (nx+4, nz+4), cell (i, k) at [i+2, k+2];
* x-velocity u: faces (i, k), i periodic, padded (nx+4, nz+4);
* z-velocity w: faces (i, j), j = 0..nz including both walls, padded
  (nx+4, nz+5), wall faces pinned to zero by the BC fill;
* nodes (i, j) sit at cell corners; node-averaged viscosity uses the
  four surrounding cells, which near walls and the periodic seam are
  ghost cells, so the caller must evaluate material laws on the full
  padded array.
"""

from __future__ import annotations

import numpy as np


def laplacian_cells_2d(pad: np.ndarray, hx: float, hz: float) -> np.ndarray:
    c = pad[2:-2, 2:-2]
    return (pad[3:-1, 2:-2] - 2.0 * c + pad[1:-3, 2:-2]) / (hx * hx) + (
        pad[2:-2, 3:-1] - 2.0 * c + pad[2:-2, 1:-3]
    ) / (hz * hz)


def stress_div_2d(nu_pad: np.ndarray, u_pad: np.ndarray, w_pad: np.ndarray,
                  hx: float, hz: float):
    """Divergence of 2 nu D(u): diagonal stress at cells, shear at nodes."""
    nx = nu_pad.shape[0] - 4
    nz = nu_pad.shape[1] - 4
    nuc = nu_pad[2 : nx + 2, 2 : nz + 2]

    txx = np.empty((nx + 2, nz))
    dux = (u_pad[3 : nx + 3, 2 : nz + 2] - u_pad[2 : nx + 2, 2 : nz + 2]) / hx
    txx[1 : nx + 1] = 2.0 * nuc * dux
    txx[0] = txx[nx]
    txx[nx + 1] = txx[1]

    dwz = (w_pad[2 : nx + 2, 3 : nz + 3] - w_pad[2 : nx + 2, 2 : nz + 2]) / hz
    tzz = 2.0 * nuc * dwz

    nun = 0.25 * (
        nu_pad[1 : nx + 1, 1 : nz + 2]
        + nu_pad[2 : nx + 2, 1 : nz + 2]
        + nu_pad[1 : nx + 1, 2 : nz + 3]
        + nu_pad[2 : nx + 2, 2 : nz + 3]
    )
    dudz = (u_pad[2 : nx + 2, 2 : nz + 3] - u_pad[2 : nx + 2, 1 : nz + 2]) / hz
    dwdx = (w_pad[2 : nx + 2, 2 : nz + 3] - w_pad[1 : nx + 1, 2 : nz + 3]) / hx
    txz = np.empty((nx + 2, nz + 1))
    txz[1 : nx + 1] = nun * (dudz + dwdx)
    txz[0] = txz[nx]
    txz[nx + 1] = txz[1]

    du = (txx[1 : nx + 1] - txx[0:nx]) / hx + (
        txz[1 : nx + 1, 1 : nz + 1] - txz[1 : nx + 1, 0:nz]
    ) / hz
    dw = np.zeros((nx, nz + 1))
    dw[:, 1:nz] = (txz[2 : nx + 2, 1:nz] - txz[1 : nx + 1, 1:nz]) / hx + (
        tzz[:, 1:nz] - tzz[:, 0 : nz - 1]
    ) / hz
    return du, dw


def advect_scalar_2d(u_pad: np.ndarray, w_pad: np.ndarray, s_pad: np.ndarray,
                     hx: float, hz: float) -> np.ndarray:
    """Flux-form (u . grad) s at cells; exactly skew for solenoidal u."""
    nx = s_pad.shape[0] - 4
    nz = s_pad.shape[1] - 4
    sc = s_pad[2 : nx + 2, 2 : nz + 2]
    se = s_pad[3 : nx + 3, 2 : nz + 2]
    sw = s_pad[1 : nx + 1, 2 : nz + 2]
    su = s_pad[2 : nx + 2, 3 : nz + 3]
    sd = s_pad[2 : nx + 2, 1 : nz + 1]
    ue = u_pad[3 : nx + 3, 2 : nz + 2]
    uw = u_pad[2 : nx + 2, 2 : nz + 2]
    wu = w_pad[2 : nx + 2, 3 : nz + 3]
    wd = w_pad[2 : nx + 2, 2 : nz + 2]
    div = (ue - uw) / hx + (wu - wd) / hz
    flux = (ue * (se + sc) - uw * (sc + sw)) / (2.0 * hx) + (
        wu * (su + sc) - wd * (sc + sd)
    ) / (2.0 * hz)
    return flux - sc * div


def advect_vector_2d(u_pad: np.ndarray, w_pad: np.ndarray, hx: float, hz: float):
    """Centered (u . grad) u at the staggered component positions."""
    nx = u_pad.shape[0] - 4
    nz = u_pad.shape[1] - 4
    uc = u_pad[2 : nx + 2, 2 : nz + 2]
    dudx = (u_pad[3 : nx + 3, 2 : nz + 2] - u_pad[1 : nx + 1, 2 : nz + 2]) / (2.0 * hx)
    wbar = 0.25 * (
        w_pad[1 : nx + 1, 2 : nz + 2]
        + w_pad[2 : nx + 2, 2 : nz + 2]
        + w_pad[1 : nx + 1, 3 : nz + 3]
        + w_pad[2 : nx + 2, 3 : nz + 3]
    )
    dudz = (u_pad[2 : nx + 2, 3 : nz + 3] - u_pad[2 : nx + 2, 1 : nz + 1]) / (2.0 * hz)
    au = uc * dudx + wbar * dudz

    ubar = 0.25 * (
        u_pad[2 : nx + 2, 1 : nz + 2]
        + u_pad[3 : nx + 3, 1 : nz + 2]
        + u_pad[2 : nx + 2, 2 : nz + 3]
        + u_pad[3 : nx + 3, 2 : nz + 3]
    )
    dwdx = (w_pad[3 : nx + 3, 2 : nz + 3] - w_pad[1 : nx + 1, 2 : nz + 3]) / (2.0 * hx)
    wc = w_pad[2 : nx + 2, 2 : nz + 3]
    dwdz = (w_pad[2 : nx + 2, 3 : nz + 4] - w_pad[2 : nx + 2, 1 : nz + 2]) / (2.0 * hz)
    aw = ubar * dwdx + wc * dwdz
    aw[:, 0] = 0.0
    aw[:, nz] = 0.0
    return au, aw
