"""Tests for the staggered-grid differential operators.

The checks here are the discrete identities the time stepper relies
on: gradient/divergence adjointness, exactness of the projection,
skew-adjoint transport, sign-definite viscous dissipation, and the
sharp constant in the discrete Korn relation for solenoidal fields.
Where an identity is claimed exact it is tested near rounding, not
merely to truncation order.
"""

import numpy as np
import pytest

from aggflow import operators as ops
from aggflow.grid import (
    GHOST,
    ScalarField,
    VectorField,
    apply_bc,
    h1_seminorm,
    l2_norm,
    linf_norm,
    make_grid,
    vector_component_counts,
    _component_l2_weight,
)
from aggflow.errors import SolverFailure

G = GHOST


def grid2d(hbc="periodic", nx=12, nz=10, lx=1.0, lz=1.3):
    return make_grid({"extents": [lx, lz], "cells": [nx, nz], "horizontal_bc": hbc})


def grid3d():
    return make_grid(
        {
            "extents": [1.0, 1.1, 1.4],
            "cells": [8, 10, 12],
            "horizontal_bc": ["periodic", "wall"],
        }
    )


def random_scalar(grid, bc, seed=0):
    rng = np.random.default_rng(seed)
    return ScalarField.from_interior(grid, rng.standard_normal(grid.cells), bc)


def random_vector(grid, seed=0):
    v = VectorField(grid)
    rng = np.random.default_rng(seed)
    for c in range(grid.dim):
        v.interior(c)[...] = rng.standard_normal(v.interior(c).shape)
    apply_bc(v)
    return v


def stream_velocity(grid, seed=0):
    """Exactly divergence-free noslip 2D field from a node streamfunction."""
    assert grid.dim == 2
    nx, nz = grid.cells
    hx, hz = grid.spacing
    rng = np.random.default_rng(seed)
    if grid.periodic[0]:
        chi = rng.standard_normal((nx, nz + 1))
        chi[:, 0] = 0.0
        chi[:, nz] = 0.0
        u_arr = (chi[:, 1:] - chi[:, :-1]) / hz
        w_arr = -(np.roll(chi, -1, axis=0) - chi) / hx
    else:
        chi = rng.standard_normal((nx + 1, nz + 1))
        chi[0, :] = 0.0
        chi[nx, :] = 0.0
        chi[:, 0] = 0.0
        chi[:, nz] = 0.0
        u_arr = (chi[:, 1:] - chi[:, :-1]) / hz
        w_arr = -(chi[1:, :] - chi[:-1, :]) / hx
    v = VectorField(grid)
    v.interior(0)[...] = u_arr
    v.interior(1)[...] = w_arr
    apply_bc(v)
    return v


def inner_scalar(grid, a, b):
    return grid.cell_volume * float(np.sum(a * b))


def inner_vector(grid, u, w):
    total = 0.0
    for c in range(grid.dim):
        wt = _component_l2_weight(grid, c)
        total += float(np.sum(wt * u.interior(c) * w.interior(c)))
    return grid.cell_volume * total


class TestGradientDivergence:
    @pytest.mark.parametrize("hbc", ["periodic", "wall"])
    @pytest.mark.parametrize("bc", ["dirichlet0", "neumann0"])
    def test_adjointness_2d(self, hbc, bc):
        grid = grid2d(hbc=hbc)
        s = random_scalar(grid, bc, seed=1)
        u = random_vector(grid, seed=2)
        g = ops.gradient(s)
        d = ops.divergence(u)
        lhs = inner_vector(grid, g, u)
        rhs = inner_scalar(grid, s.interior, d.interior)
        scale = abs(lhs) + abs(rhs) + 1.0
        assert abs(lhs + rhs) <= 1e-12 * scale

    def test_adjointness_3d(self):
        grid = grid3d()
        s = random_scalar(grid, "neumann0", seed=3)
        u = random_vector(grid, seed=4)
        lhs = inner_vector(grid, ops.gradient(s), u)
        rhs = inner_scalar(grid, s.interior, ops.divergence(u).interior)
        scale = abs(lhs) + abs(rhs) + 1.0
        assert abs(lhs + rhs) <= 1e-12 * scale

    @pytest.mark.parametrize("hbc", ["periodic", "wall"])
    @pytest.mark.parametrize("bc", ["dirichlet0", "neumann0"])
    def test_div_grad_is_stencil_laplacian(self, hbc, bc):
        grid = grid2d(hbc=hbc)
        s = random_scalar(grid, bc, seed=5)
        composed = ops.divergence(ops.gradient(s))
        direct = ops.laplacian(s)
        scale = np.max(np.abs(direct.interior))
        assert np.max(np.abs(composed.interior - direct.interior)) <= 1e-12 * scale

    def test_div_grad_is_stencil_laplacian_3d(self):
        grid = grid3d()
        s = random_scalar(grid, "dirichlet0", seed=6)
        composed = ops.divergence(ops.gradient(s))
        direct = ops.laplacian(s)
        scale = np.max(np.abs(direct.interior))
        assert np.max(np.abs(composed.interior - direct.interior)) <= 1e-12 * scale

    def test_gradient_needs_bc_tag(self):
        grid = grid2d()
        s = ScalarField(grid, "none")
        with pytest.raises(ValueError):
            ops.gradient(s)

    def test_gradient_of_neumann_scalar_vanishes_on_walls(self):
        grid = grid2d(hbc="wall")
        s = random_scalar(grid, "neumann0", seed=7)
        g = ops.gradient(s)
        assert np.all(g.interior(0)[0, :] == 0.0)
        assert np.all(g.interior(0)[-1, :] == 0.0)
        assert np.all(g.interior(1)[:, 0] == 0.0)
        assert np.all(g.interior(1)[:, -1] == 0.0)


class TestLaplacianOracle:
    def test_dense_loop_oracle(self):
        grid = grid2d(hbc="wall", nx=8, nz=9)
        s = random_scalar(grid, "dirichlet0", seed=8)
        apply_bc(s)
        pad = s.data
        hx, hz = grid.spacing
        nx, nz = grid.cells
        want = np.zeros((nx, nz))
        for i in range(nx):
            for k in range(nz):
                c = pad[G + i, G + k]
                want[i, k] = (
                    pad[G + i + 1, G + k] - 2 * c + pad[G + i - 1, G + k]
                ) / (hx * hx) + (
                    pad[G + i, G + k + 1] - 2 * c + pad[G + i, G + k - 1]
                ) / (hz * hz)
        got = ops.laplacian(s)
        np.testing.assert_allclose(got.interior, want, rtol=1e-14, atol=1e-12)


class TestAdvectScalar:
    def test_uniform_flow_is_exact_centered_derivative(self):
        grid = grid2d()
        c = 0.73
        u = VectorField(grid)
        u.interior(0)[...] = c
        apply_bc(u)
        s = random_scalar(grid, "neumann0", seed=9)
        apply_bc(s)
        hx = grid.spacing[0]
        east = np.roll(s.interior, -1, axis=0)
        west = np.roll(s.interior, 1, axis=0)
        want = c * (east - west) / (2.0 * hx)
        got = ops.advect(u, s)
        np.testing.assert_allclose(got.interior, want, rtol=0, atol=1e-13)

    @pytest.mark.parametrize("hbc", ["periodic", "wall"])
    def test_skew_symmetry_for_solenoidal_velocity(self, hbc):
        grid = grid2d(hbc=hbc)
        u = stream_velocity(grid, seed=10)
        s = random_scalar(grid, "neumann0", seed=11)
        a = ops.advect(u, s)
        ip = inner_scalar(grid, a.interior, s.interior)
        assert abs(ip) <= 1e-10 * l2_norm(s) ** 2

    def test_skew_symmetry_3d(self):
        grid = grid3d()
        u, _ = ops.leray_project(random_vector(grid, seed=12))
        s = random_scalar(grid, "neumann0", seed=13)
        a = ops.advect(u, s)
        ip = inner_scalar(grid, a.interior, s.interior)
        assert abs(ip) <= 1e-10 * l2_norm(s) ** 2

    @pytest.mark.parametrize("hbc", ["periodic", "wall"])
    def test_zero_mean_contribution(self, hbc):
        grid = grid2d(hbc=hbc)
        u = stream_velocity(grid, seed=14)
        s = random_scalar(grid, "neumann0", seed=15)
        a = ops.advect(u, s)
        scale = max(1.0, float(np.sum(np.abs(a.interior))))
        assert abs(float(np.sum(a.interior))) <= 1e-12 * scale

    def test_zero_velocity_gives_zero(self):
        grid = grid2d()
        u = VectorField(grid)
        s = random_scalar(grid, "dirichlet0", seed=16)
        a = ops.advect(u, s)
        assert np.all(a.interior == 0.0)


class TestAdvectVector:
    def test_uniform_translation_has_no_self_advection(self):
        grid = grid2d()
        u = VectorField(grid)
        u.interior(0)[...] = 1.37
        apply_bc(u)
        a = ops.advect(u, u)
        assert np.max(np.abs(a.interior(0))) == 0.0
        assert np.max(np.abs(a.interior(1))) == 0.0

    def test_generic_matches_fast_path(self):
        grid = grid2d()
        u = random_vector(grid, seed=17)
        fast = ops.advect_vector_pad(grid, u.components, u.components)
        slow = ops._generic_advect_vector_pad(grid, u.components, u.components)
        for c in range(2):
            scale = max(1.0, np.max(np.abs(fast[c])))
            assert np.max(np.abs(fast[c] - slow[c])) <= 1e-13 * scale

    def test_dense_loop_oracle_wall_grid(self):
        grid = grid2d(hbc="wall", nx=8, nz=9)
        vel = random_vector(grid, seed=18)
        tgt = random_vector(grid, seed=19)
        got = ops.advect_vector_pad(grid, vel.components, tgt.components)

        hx, hz = grid.spacing
        nx, nz = grid.cells
        U, W = vel.components
        TU, TW = tgt.components

        want_u = np.zeros((nx + 1, nz))
        for i in range(1, nx):
            for k in range(nz):
                uc = U[G + i, G + k]
                dudx = (TU[G + i + 1, G + k] - TU[G + i - 1, G + k]) / (2 * hx)
                wbar = 0.25 * (
                    W[G + i - 1, G + k]
                    + W[G + i, G + k]
                    + W[G + i - 1, G + k + 1]
                    + W[G + i, G + k + 1]
                )
                dudz = (TU[G + i, G + k + 1] - TU[G + i, G + k - 1]) / (2 * hz)
                want_u[i, k] = uc * dudx + wbar * dudz
        np.testing.assert_allclose(got[0], want_u, rtol=1e-13, atol=1e-13)

        want_w = np.zeros((nx, nz + 1))
        for i in range(nx):
            for j in range(1, nz):
                wc = W[G + i, G + j]
                dwdz = (TW[G + i, G + j + 1] - TW[G + i, G + j - 1]) / (2 * hz)
                ubar = 0.25 * (
                    U[G + i, G + j - 1]
                    + U[G + i + 1, G + j - 1]
                    + U[G + i, G + j]
                    + U[G + i + 1, G + j]
                )
                dwdx = (TW[G + i + 1, G + j] - TW[G + i - 1, G + j]) / (2 * hx)
                want_w[i, j] = wc * dwdz + ubar * dwdx
        np.testing.assert_allclose(got[1], want_w, rtol=1e-13, atol=1e-13)


def stress_energy_2d(grid, nu, u, w):
    """Dense-loop dissipation pairing sum(tau(u) : grad w) for 2D grids.

    Node contributions carry half weights on wall planes, matching the
    quadrature under which the stress divergence is skew-adjoint.
    """
    apply_bc(nu)
    apply_bc(u)
    apply_bc(w)
    hx, hz = grid.spacing
    nx, nz = grid.cells
    N = nu.data
    U, Wc = u.components
    VU, VW = w.components
    total = 0.0
    for i in range(nx):
        for k in range(nz):
            nuc = N[G + i, G + k]
            du = (U[G + i + 1, G + k] - U[G + i, G + k]) / hx
            dvu = (VU[G + i + 1, G + k] - VU[G + i, G + k]) / hx
            dw = (Wc[G + i, G + k + 1] - Wc[G + i, G + k]) / hz
            dvw = (VW[G + i, G + k + 1] - VW[G + i, G + k]) / hz
            total += 2.0 * nuc * (du * dvu + dw * dvw)
    ni = nx if grid.periodic[0] else nx + 1
    for i in range(ni):
        for j in range(nz + 1):
            wgt = 1.0
            if not grid.periodic[0] and i in (0, nx):
                wgt *= 0.5
            if j in (0, nz):
                wgt *= 0.5
            nun = 0.25 * (
                N[G + i - 1, G + j - 1]
                + N[G + i, G + j - 1]
                + N[G + i - 1, G + j]
                + N[G + i, G + j]
            )
            dzu = (U[G + i, G + j] - U[G + i, G + j - 1]) / hz
            dxw = (Wc[G + i, G + j] - Wc[G + i - 1, G + j]) / hx
            dzvu = (VU[G + i, G + j] - VU[G + i, G + j - 1]) / hz
            dxvw = (VW[G + i, G + j] - VW[G + i - 1, G + j]) / hx
            total += wgt * nun * (dzu + dxw) * (dzvu + dxvw)
    return grid.cell_volume * total


class TestStressDiv:
    @pytest.mark.parametrize("hbc", ["periodic", "wall"])
    def test_adjoint_to_dissipation_form(self, hbc):
        grid = grid2d(hbc=hbc)
        rng = np.random.default_rng(20)
        nu = ScalarField.from_interior(grid, 1.0 + 0.5 * rng.random(grid.cells), "neumann0")
        u = random_vector(grid, seed=21)
        w = random_vector(grid, seed=22)
        f = ops.stress_div(nu, u)
        lhs = inner_vector(grid, f, w)
        rhs = -stress_energy_2d(grid, nu, u, w)
        scale = abs(lhs) + abs(rhs) + 1.0
        assert abs(lhs - rhs) <= 1e-11 * scale

    def test_symmetry_of_quadratic_form(self):
        grid = grid2d()
        rng = np.random.default_rng(23)
        nu = ScalarField.from_interior(grid, 0.5 + rng.random(grid.cells), "neumann0")
        u = random_vector(grid, seed=24)
        w = random_vector(grid, seed=25)
        a = inner_vector(grid, ops.stress_div(nu, u), w)
        b = inner_vector(grid, ops.stress_div(nu, w), u)
        assert abs(a - b) <= 1e-11 * (abs(a) + abs(b) + 1.0)

    def test_dissipation_nonnegative(self):
        grid = grid2d(hbc="wall")
        rng = np.random.default_rng(26)
        nu = ScalarField.from_interior(grid, 0.1 + rng.random(grid.cells), "neumann0")
        for seed in range(5):
            u = random_vector(grid, seed=100 + seed)
            e = -inner_vector(grid, ops.stress_div(nu, u), u)
            assert e >= 0.0

    def test_constant_viscosity_reduction(self):
        # on a field supported away from walls the variable-coefficient
        # stress divergence must equal nu (lap u + grad div u) exactly
        grid = grid2d(nx=32, nz=32)
        nu_val = 0.37
        nu = ScalarField.from_interior(grid, np.full(grid.cells, nu_val), "neumann0")
        u = VectorField(grid)
        rng = np.random.default_rng(27)
        for c in range(2):
            inner = u.interior(c)
            block = rng.standard_normal((10, 10))
            inner[10:20, 10:20] = block
        apply_bc(u)
        f = ops.stress_div(nu, u)
        lap = ops.laplacian(u)
        div = ops.divergence(u)
        apply_bc(div)
        gdiv = ops.gradient_pad(grid, div.data)
        for c in range(2):
            want = nu_val * (lap.interior(c) + gdiv[c])
            scale = max(1.0, np.max(np.abs(want)))
            assert np.max(np.abs(f.interior(c) - want)) <= 1e-12 * scale

    def test_zero_velocity_gives_zero(self):
        grid = grid2d()
        nu = ScalarField.from_interior(grid, np.ones(grid.cells), "neumann0")
        f = ops.stress_div(nu, VectorField(grid))
        for c in range(2):
            assert np.all(f.interior(c) == 0.0)

    def test_nonpositive_viscosity_rejected(self):
        grid = grid2d()
        bad = np.ones(grid.cells)
        bad[3, 4] = 0.0
        nu = ScalarField.from_interior(grid, bad, "neumann0")
        with pytest.raises(ValueError):
            ops.stress_div(nu, VectorField(grid))

    def test_generic_matches_fast_path(self):
        grid = grid2d()
        rng = np.random.default_rng(28)
        nu = ScalarField.from_interior(grid, 1.0 + rng.random(grid.cells), "neumann0")
        u = random_vector(grid, seed=29)
        apply_bc(nu)
        fast = ops.stress_div_pad(grid, nu.data, u.components)
        slow = ops._generic_stress_div_pad(grid, nu.data, u.components)
        for c in range(2):
            scale = max(1.0, np.max(np.abs(fast[c])))
            assert np.max(np.abs(fast[c] - slow[c])) <= 1e-13 * scale

    def test_adjointness_3d(self):
        grid = grid3d()
        rng = np.random.default_rng(30)
        nu = ScalarField.from_interior(grid, 1.0 + rng.random(grid.cells), "neumann0")
        u = random_vector(grid, seed=31)
        w = random_vector(grid, seed=32)
        a = inner_vector(grid, ops.stress_div(nu, u), w)
        b = inner_vector(grid, ops.stress_div(nu, w), u)
        assert abs(a - b) <= 1e-11 * (abs(a) + abs(b) + 1.0)
        e = -inner_vector(grid, ops.stress_div(nu, u), u)
        assert e >= 0.0


class TestKorn:
    @pytest.mark.parametrize("hbc", ["periodic", "wall"])
    def test_equality_for_solenoidal_noslip_fields(self, hbc):
        grid = grid2d(hbc=hbc, nx=16, nz=14)
        for seed in range(10):
            u = stream_velocity(grid, seed=40 + seed)
            full = h1_seminorm(u)
            sym = ops.tensor_norm(ops.sym_grad(u))
            assert full <= np.sqrt(2.0) * 1.05 * sym
            assert abs(full - np.sqrt(2.0) * sym) <= 1e-12 * full

    def test_inequality_after_projection(self):
        grid = grid2d(nx=16, nz=14)
        for seed in range(5):
            u, _ = ops.leray_project(random_vector(grid, seed=60 + seed))
            full = h1_seminorm(u)
            sym = ops.tensor_norm(ops.sym_grad(u))
            assert full <= np.sqrt(2.0) * 1.05 * sym


class TestLeray:
    @pytest.mark.parametrize("hbc", ["periodic", "wall"])
    def test_divergence_after_projection(self, hbc):
        grid = grid2d(hbc=hbc, nx=24, nz=20)
        u = random_vector(grid, seed=70)
        proj, chi = ops.leray_project(u)
        resid = linf_norm(ops.divergence(proj))
        assert resid <= 1e-10 * max(1.0, linf_norm(u))

    def test_idempotent(self):
        grid = grid2d(nx=24, nz=20)
        u = random_vector(grid, seed=71)
        proj, _ = ops.leray_project(u)
        again, _ = ops.leray_project(proj)
        for c in range(2):
            diff = np.max(np.abs(again.interior(c) - proj.interior(c)))
            assert diff <= 1e-12 * max(1.0, linf_norm(proj))

    def test_kills_gradients(self):
        grid = grid2d()
        s = random_scalar(grid, "neumann0", seed=72)
        g = ops.gradient(s)
        proj, _ = ops.leray_project(g)
        assert linf_norm(proj) <= 1e-10 * max(1.0, linf_norm(g))

    def test_preserves_solenoidal_fields(self):
        grid = grid2d()
        u = stream_velocity(grid, seed=73)
        proj, _ = ops.leray_project(u)
        for c in range(2):
            diff = np.max(np.abs(proj.interior(c) - u.interior(c)))
            assert diff <= 1e-12 * max(1.0, linf_norm(u))

    def test_potential_zero_mean(self):
        grid = grid2d()
        u = random_vector(grid, seed=74)
        _, chi = ops.leray_project(u)
        assert abs(chi.interior.mean()) <= 1e-12 * max(1.0, np.max(np.abs(chi.interior)))

    def test_3d(self):
        grid = grid3d()
        u = random_vector(grid, seed=75)
        proj, _ = ops.leray_project(u)
        resid = linf_norm(ops.divergence(proj))
        assert resid <= 1e-10 * max(1.0, linf_norm(u))

    def test_projection_is_orthogonal(self):
        # the removed part is a gradient; it must be inner-product
        # orthogonal to every solenoidal noslip field
        grid = grid2d()
        u = random_vector(grid, seed=76)
        proj, _ = ops.leray_project(u)
        removed = VectorField(grid)
        for c in range(2):
            removed.interior(c)[...] = u.interior(c) - proj.interior(c)
        for seed in range(3):
            v = stream_velocity(grid, seed=80 + seed)
            ip = inner_vector(grid, removed, v)
            norm = l2_norm(removed) * l2_norm(v)
            assert abs(ip) <= 1e-11 * max(1.0, norm)
