"""Compiled twins of the 2D fast-path stencil kernels.

Same signatures, same formulas, and the same operation order as the
numpy reference module, written as explicit loops under numba's
nopython compiler. No fastmath, so floating-point results match the
reference bitwise. Importing this module without numba installed
raises ImportError; the backend module catches that and falls back.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def laplacian_cells_2d(pad, hx, hz):
    m0 = pad.shape[0] - 4
    m1 = pad.shape[1] - 4
    out = np.empty((m0, m1))
    for i in range(m0):
        for k in range(m1):
            c = pad[i + 2, k + 2]
            out[i, k] = (pad[i + 3, k + 2] - 2.0 * c + pad[i + 1, k + 2]) / (hx * hx) + (
                pad[i + 2, k + 3] - 2.0 * c + pad[i + 2, k + 1]
            ) / (hz * hz)
    return out


@njit(cache=True)
def stress_div_2d(nu_pad, u_pad, w_pad, hx, hz):
    nx = nu_pad.shape[0] - 4
    nz = nu_pad.shape[1] - 4

    txx = np.empty((nx + 2, nz))
    for i in range(nx):
        for k in range(nz):
            dux = (u_pad[i + 3, k + 2] - u_pad[i + 2, k + 2]) / hx
            txx[i + 1, k] = 2.0 * nu_pad[i + 2, k + 2] * dux
    for k in range(nz):
        txx[0, k] = txx[nx, k]
        txx[nx + 1, k] = txx[1, k]

    tzz = np.empty((nx, nz))
    for i in range(nx):
        for k in range(nz):
            dwz = (w_pad[i + 2, k + 3] - w_pad[i + 2, k + 2]) / hz
            tzz[i, k] = 2.0 * nu_pad[i + 2, k + 2] * dwz

    txz = np.empty((nx + 2, nz + 1))
    for i in range(nx):
        for j in range(nz + 1):
            nun = 0.25 * (
                nu_pad[i + 1, j + 1]
                + nu_pad[i + 2, j + 1]
                + nu_pad[i + 1, j + 2]
                + nu_pad[i + 2, j + 2]
            )
            dudz = (u_pad[i + 2, j + 2] - u_pad[i + 2, j + 1]) / hz
            dwdx = (w_pad[i + 2, j + 2] - w_pad[i + 1, j + 2]) / hx
            txz[i + 1, j] = nun * (dudz + dwdx)
    for j in range(nz + 1):
        txz[0, j] = txz[nx, j]
        txz[nx + 1, j] = txz[1, j]

    du = np.empty((nx, nz))
    for i in range(nx):
        for k in range(nz):
            du[i, k] = (txx[i + 1, k] - txx[i, k]) / hx + (
                txz[i + 1, k + 1] - txz[i + 1, k]
            ) / hz

    dw = np.zeros((nx, nz + 1))
    for i in range(nx):
        for j in range(1, nz):
            dw[i, j] = (txz[i + 2, j] - txz[i + 1, j]) / hx + (
                tzz[i, j] - tzz[i, j - 1]
            ) / hz
    return du, dw


@njit(cache=True)
def advect_scalar_2d(u_pad, w_pad, s_pad, hx, hz):
    nx = s_pad.shape[0] - 4
    nz = s_pad.shape[1] - 4
    out = np.empty((nx, nz))
    for i in range(nx):
        for k in range(nz):
            sc = s_pad[i + 2, k + 2]
            se = s_pad[i + 3, k + 2]
            sw = s_pad[i + 1, k + 2]
            su = s_pad[i + 2, k + 3]
            sd = s_pad[i + 2, k + 1]
            ue = u_pad[i + 3, k + 2]
            uw = u_pad[i + 2, k + 2]
            wu = w_pad[i + 2, k + 3]
            wd = w_pad[i + 2, k + 2]
            div = (ue - uw) / hx + (wu - wd) / hz
            flux = (ue * (se + sc) - uw * (sc + sw)) / (2.0 * hx) + (
                wu * (su + sc) - wd * (sc + sd)
            ) / (2.0 * hz)
            out[i, k] = flux - sc * div
    return out


@njit(cache=True)
def advect_vector_2d(u_pad, w_pad, hx, hz):
    nx = u_pad.shape[0] - 4
    nz = u_pad.shape[1] - 4
    au = np.empty((nx, nz))
    for i in range(nx):
        for k in range(nz):
            uc = u_pad[i + 2, k + 2]
            dudx = (u_pad[i + 3, k + 2] - u_pad[i + 1, k + 2]) / (2.0 * hx)
            wbar = 0.25 * (
                w_pad[i + 1, k + 2]
                + w_pad[i + 2, k + 2]
                + w_pad[i + 1, k + 3]
                + w_pad[i + 2, k + 3]
            )
            dudz = (u_pad[i + 2, k + 3] - u_pad[i + 2, k + 1]) / (2.0 * hz)
            au[i, k] = uc * dudx + wbar * dudz

    aw = np.zeros((nx, nz + 1))
    for i in range(nx):
        for j in range(1, nz):
            ubar = 0.25 * (
                u_pad[i + 2, j + 1]
                + u_pad[i + 3, j + 1]
                + u_pad[i + 2, j + 2]
                + u_pad[i + 3, j + 2]
            )
            dwdx = (w_pad[i + 3, j + 2] - w_pad[i + 1, j + 2]) / (2.0 * hx)
            wc = w_pad[i + 2, j + 2]
            dwdz = (w_pad[i + 2, j + 3] - w_pad[i + 2, j + 1]) / (2.0 * hz)
            aw[i, j] = ubar * dwdx + wc * dwdz
    return au, aw
