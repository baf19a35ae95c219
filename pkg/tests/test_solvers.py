"""Tests for the implicit Stokes step and the fourth-order phase step.

The manufactured-solution tests build the right-hand side by applying
the discrete operator to a known divergence-free field, so recovery
checks the full solver chain (preconditioned CG, projection, pressure
update) against an independent oracle rather than against itself.
"""

import numpy as np
import pytest

from aggflow import operators as ops
from aggflow.errors import SolverFailure
from aggflow.grid import (
    ScalarField,
    VectorField,
    apply_bc,
    l2_norm,
    linf_norm,
    make_grid,
    _component_l2_weight,
)
from aggflow.operators import average_to_faces
from aggflow.solvers import StokesSolveSpec, StokesReport, phase_step, stokes_step
from aggflow.spectral import make_eigen_solver, scalar_flavors


def grid2d(hbc="periodic", nx=24, nz=32, lx=1.0, lz=1.3):
    return make_grid({"extents": [lx, lz], "cells": [nx, nz], "horizontal_bc": hbc})


def stream_velocity(grid, seed=0):
    nx, nz = grid.cells
    hx, hz = grid.spacing
    rng = np.random.default_rng(seed)
    v = VectorField(grid)
    if grid.periodic[0]:
        chi = rng.standard_normal((nx, nz + 1))
        chi[:, 0] = 0.0
        chi[:, nz] = 0.0
        v.interior(0)[...] = (chi[:, 1:] - chi[:, :-1]) / hz
        v.interior(1)[...] = -(np.roll(chi, -1, axis=0) - chi) / hx
    else:
        chi = rng.standard_normal((nx + 1, nz + 1))
        chi[0, :] = chi[nx, :] = 0.0
        chi[:, 0] = chi[:, nz] = 0.0
        v.interior(0)[...] = (chi[:, 1:] - chi[:, :-1]) / hz
        v.interior(1)[...] = -(chi[1:, :] - chi[:-1, :]) / hx
    apply_bc(v)
    return v


def constant_fields(grid, rho=2.0, nu=0.01):
    r = ScalarField.from_interior(grid, np.full(grid.cells, rho), "neumann0")
    n = ScalarField.from_interior(grid, np.full(grid.cells, nu), "neumann0")
    return r, n


def random_fields(grid, seed):
    rng = np.random.default_rng(seed)
    r = ScalarField.from_interior(grid, 1.5 + rng.random(grid.cells), "neumann0")
    n = ScalarField.from_interior(
        grid, 0.02 + 0.01 * rng.random(grid.cells), "neumann0"
    )
    return r, n


def manufactured_rhs(grid, rho, nu, v_target, v_old, q_target, dt):
    """Apply the implicit momentum operator to a known solution."""
    apply_bc(rho)
    apply_bc(nu)
    apply_bc(v_target)
    apply_bc(v_old)
    apply_bc(q_target)
    visc = ops.stress_div_pad(grid, nu.data, v_target.components)
    gq = ops.gradient_pad(grid, q_target.data)
    rhs = VectorField(grid)
    for c in range(grid.dim):
        rf = average_to_faces(grid, rho.data, c)
        rhs.interior(c)[...] = (
            rf * (v_target.interior(c) - v_old.interior(c)) / dt - visc[c] + gq[c]
        )
    return rhs


class TestStokesStep:
    def test_zero_inputs_zero_outputs(self):
        grid = grid2d()
        rho, nu = constant_fields(grid)
        spec = StokesSolveSpec(
            dt=1e-3, rho_field=rho, nu_field=nu,
            rhs=VectorField(grid), v_old=VectorField(grid),
        )
        v, q, rep = stokes_step(spec)
        assert rep.converged
        assert l2_norm(v) == 0.0
        assert np.all(q.interior == 0.0)

    def test_hydrostatic_balance(self):
        grid = grid2d(nx=32, nz=40)
        rho_val, g_acc = 2.0, 10.0
        rho, nu = constant_fields(grid, rho=rho_val)
        F = VectorField(grid)
        F.interior(1)[...] = -rho_val * g_acc
        spec = StokesSolveSpec(
            dt=1e-3, rho_field=rho, nu_field=nu, rhs=F, v_old=VectorField(grid)
        )
        v, q, rep = stokes_step(spec)
        assert rep.converged
        assert l2_norm(v) <= 1e-8
        zc = grid.cell_centers(1)
        want = -rho_val * g_acc * zc
        want -= want.mean()
        err = np.max(np.abs(q.interior - want[None, :]))
        assert err <= 1e-9 * np.max(np.abs(want))

    @pytest.mark.parametrize("hbc", ["periodic", "wall"])
    def test_manufactured_recovery(self, hbc):
        grid = grid2d(hbc=hbc)
        rng = np.random.default_rng(31)
        rho, nu = random_fields(grid, seed=32)
        vm = stream_velocity(grid, seed=33)
        qm = rng.standard_normal(grid.cells)
        qm -= qm.mean()
        q_t = ScalarField.from_interior(grid, qm, "neumann0")
        dt = 2e-3
        v_old = VectorField(grid)
        for c in range(grid.dim):
            v_old.interior(c)[...] = 0.3 * vm.interior(c)
        apply_bc(v_old)
        rhs = manufactured_rhs(grid, rho, nu, vm, v_old, q_t, dt)
        spec = StokesSolveSpec(
            dt=dt, rho_field=rho, nu_field=nu, rhs=rhs, v_old=v_old,
            mom_tol=1e-11, div_tol=1e-9,
        )
        v, q, rep = stokes_step(spec)
        assert rep.converged
        scale = max(1.0, linf_norm(vm))
        for c in range(grid.dim):
            err = np.max(np.abs(v.interior(c) - vm.interior(c)))
            assert err <= 1e-8 * scale
        qerr = np.max(np.abs(q.interior - qm))
        assert qerr <= 1e-6 * np.max(np.abs(qm))

    def test_divergence_free_to_rounding(self):
        grid = grid2d()
        rho, nu = random_fields(grid, seed=41)
        rng = np.random.default_rng(42)
        F = VectorField(grid)
        for c in range(grid.dim):
            F.interior(c)[...] = rng.standard_normal(F.interior(c).shape)
        apply_bc(F)
        spec = StokesSolveSpec(
            dt=1e-3, rho_field=rho, nu_field=nu, rhs=F, v_old=VectorField(grid)
        )
        v, q, rep = stokes_step(spec)
        assert rep.converged
        assert linf_norm(ops.divergence(v)) <= 1e-10 * max(1.0, linf_norm(v))

    def test_pressure_zero_mean(self):
        grid = grid2d()
        rho, nu = random_fields(grid, seed=51)
        rng = np.random.default_rng(52)
        F = VectorField(grid)
        F.interior(0)[...] = rng.standard_normal(F.interior(0).shape)
        apply_bc(F)
        spec = StokesSolveSpec(
            dt=1e-3, rho_field=rho, nu_field=nu, rhs=F, v_old=VectorField(grid)
        )
        _, q, _ = stokes_step(spec)
        assert abs(q.interior.mean()) <= 1e-12 * max(1.0, np.max(np.abs(q.interior)))

    def test_energy_identity_free_decay(self):
        # with zero force the implicit step must dissipate:
        # ||sqrt(rho) v_new||^2 + 2 dt ||sqrt(nu) D v_new||^2 <= ||sqrt(rho) v_old||^2
        grid = grid2d()
        rho, nu = random_fields(grid, seed=61)
        v_old = stream_velocity(grid, seed=62)
        dt = 5e-3
        spec = StokesSolveSpec(
            dt=dt, rho_field=rho, nu_field=nu, rhs=VectorField(grid), v_old=v_old
        )
        v, q, rep = stokes_step(spec)
        assert rep.converged
        apply_bc(rho)

        def rho_energy(field):
            total = 0.0
            for c in range(grid.dim):
                rf = average_to_faces(grid, rho.data, c)
                w = _component_l2_weight(grid, c)
                total += float(np.sum(w * rf * field.interior(c) ** 2))
            return grid.cell_volume * total

        diss = 0.0
        f = ops.stress_div(nu, v)
        for c in range(grid.dim):
            w = _component_l2_weight(grid, c)
            diss -= grid.cell_volume * float(np.sum(w * f.interior(c) * v.interior(c)))
        lhs = rho_energy(v) + 2.0 * dt * 0.5 * diss  # diss = 2 <nu Du, Du>
        rhs_e = rho_energy(v_old)
        assert lhs <= rhs_e * (1.0 + 1e-9) + 1e-12

    def test_deterministic(self):
        grid = grid2d(nx=16, nz=20)
        rho, nu = random_fields(grid, seed=71)
        rng = np.random.default_rng(72)
        F = VectorField(grid)
        for c in range(grid.dim):
            F.interior(c)[...] = rng.standard_normal(F.interior(c).shape)
        apply_bc(F)

        def run():
            spec = StokesSolveSpec(
                dt=1e-3, rho_field=rho, nu_field=nu, rhs=F, v_old=VectorField(grid)
            )
            return stokes_step(spec)

        v1, q1, r1 = run()
        v2, q2, r2 = run()
        for c in range(grid.dim):
            assert np.array_equal(v1.interior(c), v2.interior(c))
        assert np.array_equal(q1.interior, q2.interior)
        assert r1 == r2

    def test_nonconvergence_raises_with_residuals(self):
        grid = grid2d(nx=16, nz=20)
        rho, nu = random_fields(grid, seed=81)
        rng = np.random.default_rng(82)
        F = VectorField(grid)
        for c in range(grid.dim):
            F.interior(c)[...] = rng.standard_normal(F.interior(c).shape)
        apply_bc(F)
        spec = StokesSolveSpec(
            dt=1e-3, rho_field=rho, nu_field=nu, rhs=F, v_old=VectorField(grid),
            mom_tol=1e-14, max_outer=1,
        )
        with pytest.raises(SolverFailure) as err:
            stokes_step(spec)
        assert np.isfinite(err.value.mom_residual)

    def test_invalid_inputs_rejected(self):
        grid = grid2d(nx=16, nz=20)
        rho, nu = constant_fields(grid)
        bad_rho = ScalarField.from_interior(grid, np.zeros(grid.cells), "neumann0")
        with pytest.raises(ValueError):
            stokes_step(StokesSolveSpec(
                dt=1e-3, rho_field=bad_rho, nu_field=nu,
                rhs=VectorField(grid), v_old=VectorField(grid)))
        with pytest.raises(ValueError):
            stokes_step(StokesSolveSpec(
                dt=0.0, rho_field=rho, nu_field=nu,
                rhs=VectorField(grid), v_old=VectorField(grid)))

    def test_3d_smoke(self):
        grid = make_grid(
            {
                "extents": [1.0, 1.1, 1.4],
                "cells": [8, 10, 12],
                "horizontal_bc": ["periodic", "wall"],
            }
        )
        rng = np.random.default_rng(91)
        rho = ScalarField.from_interior(grid, 1.0 + rng.random(grid.cells), "neumann0")
        nu = ScalarField.from_interior(grid, 0.05 + 0.02 * rng.random(grid.cells), "neumann0")
        F = VectorField(grid)
        for c in range(3):
            F.interior(c)[...] = rng.standard_normal(F.interior(c).shape)
        apply_bc(F)
        spec = StokesSolveSpec(
            dt=1e-3, rho_field=rho, nu_field=nu, rhs=F, v_old=VectorField(grid),
            mom_tol=1e-8, div_tol=1e-8,
        )
        v, q, rep = stokes_step(spec)
        assert rep.converged
        assert linf_norm(ops.divergence(v)) <= 1e-9 * max(1.0, linf_norm(v))


class TestPhaseStep:
    def test_eigenmode_decay_factor(self):
        grid = grid2d(nx=16, nz=24)
        nx, nz = grid.cells
        i = np.arange(nx)[:, None]
        j = np.arange(nz)[None, :]
        m, k = 3, 2
        mode = np.cos(2 * np.pi * m * (i + 0.5) / nx) * np.cos(np.pi * k * (j + 0.5) / nz)
        lam_x = 4.0 * np.sin(np.pi * m / nx) ** 2 / grid.spacing[0] ** 2
        lam_z = 4.0 * np.sin(np.pi * k / (2 * nz)) ** 2 / grid.spacing[1] ** 2
        lam = lam_x + lam_z
        dt = 1e-4
        phi = ScalarField.from_interior(grid, mode, "neumann0")
        zero = ScalarField.from_interior(grid, np.zeros(grid.cells), "neumann0")
        out = phase_step(dt, phi, zero, "neumann0")
        want = mode / (1.0 + dt * lam**2)
        np.testing.assert_allclose(out.interior, want, rtol=1e-11, atol=1e-13)

    def test_zero_maps_to_zero(self):
        grid = grid2d(nx=16, nz=24)
        zero = ScalarField.from_interior(grid, np.zeros(grid.cells), "dirichlet0")
        out = phase_step(1e-3, zero, zero, "dirichlet0")
        assert np.all(out.interior == 0.0)

    def test_neumann_mean_bookkeeping(self):
        grid = grid2d(nx=16, nz=24)
        rng = np.random.default_rng(101)
        phi = ScalarField.from_interior(grid, rng.standard_normal(grid.cells), "neumann0")
        f = ScalarField.from_interior(grid, rng.standard_normal(grid.cells), "neumann0")
        dt = 1e-3
        out = phase_step(dt, phi, f, "neumann0")
        want = phi.interior.mean() + dt * f.interior.mean()
        assert abs(out.interior.mean() - want) <= 1e-13 * max(1.0, abs(want))

    def test_dirichlet_unconditional_decay(self):
        grid = grid2d(nx=16, nz=24)
        rng = np.random.default_rng(102)
        phi = ScalarField.from_interior(grid, rng.standard_normal(grid.cells), "dirichlet0")
        zero = ScalarField.from_interior(grid, np.zeros(grid.cells), "dirichlet0")
        out = phase_step(0.7, phi, zero, "dirichlet0")
        assert l2_norm(out) <= l2_norm(phi)

    def test_bc_mismatch_rejected(self):
        grid = grid2d(nx=16, nz=24)
        phi = ScalarField.from_interior(grid, np.zeros(grid.cells), "dirichlet0")
        with pytest.raises(ValueError):
            phase_step(1e-3, phi, phi, "neumann0")

    def test_nonpositive_dt_rejected(self):
        grid = grid2d(nx=16, nz=24)
        phi = ScalarField.from_interior(grid, np.zeros(grid.cells), "neumann0")
        with pytest.raises(ValueError):
            phase_step(0.0, phi, phi, "neumann0")

    def test_deterministic(self):
        grid = grid2d(nx=16, nz=24)
        rng = np.random.default_rng(103)
        phi = ScalarField.from_interior(grid, rng.standard_normal(grid.cells), "neumann0")
        f = ScalarField.from_interior(grid, rng.standard_normal(grid.cells), "neumann0")
        a = phase_step(1e-3, phi, f, "neumann0")
        b = phase_step(1e-3, phi, f, "neumann0")
        assert np.array_equal(a.interior, b.interior)
