"""Implicit Euler solvers for the two linear subproblems of the split.

One time step of the coupled system separates into a variable-density,
variable-viscosity Stokes problem for the velocity/pressure pair and a
fourth-order parabolic step for the phase perturbation. Both are
solved here with frozen coefficient fields supplied by the caller.

The Stokes step runs an incremental pressure-correction outer loop: a
conjugate-gradient solve of the symmetric positive momentum operator
    M v = rho_f/dt v - div(2 nu D(v))
under the current pressure guess, an exact transform projection of the
result, and a pressure update combining the projection potential with
a viscous divergence correction (the classic rotational form). The
projection potential is resolved by the same transform solver that the
Leray projection uses, so every accepted velocity is discretely
divergence-free to rounding; the outer loop only has to converge the
momentum residual, which it does at a rate set by the density and
viscosity contrast, not by the grid.

The phase step is a single diagonal solve in the eigenbasis and is
exact there; its cost is two transforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SolverFailure
from .grid import (
    GHOST,
    Grid,
    ScalarField,
    VectorField,
    apply_bc,
    l2_norm,
    linf_norm,
    vector_component_counts,
)
from .operators import (
    average_to_faces,
    divergence,
    gradient_pad,
    leray_project,
    stress_div_pad,
    biharmonic_helmholtz_solve,
)
from .spectral import make_eigen_solver

__all__ = ["StokesSolveSpec", "StokesReport", "stokes_step", "phase_step"]

G = GHOST


@dataclass
class StokesSolveSpec:
    """One implicit momentum/pressure step with frozen coefficients."""

    dt: float
    rho_field: ScalarField
    nu_field: ScalarField
    rhs: VectorField
    v_old: VectorField
    mom_tol: float = 1e-9
    div_tol: float = 1e-9
    max_outer: int = 200
    max_cg: int = 400
    q_init: ScalarField | None = None


@dataclass
class StokesReport:
    outer_iters: int
    cg_iters: int
    mom_residual: float
    div_residual: float
    converged: bool


def _component_flavors(grid: Grid, comp: int) -> tuple[str, ...]:
    flavors = []
    for axis in range(grid.dim):
        if grid.periodic[axis]:
            flavors.append("periodic")
        elif axis == comp:
            flavors.append("dirichlet_node")
        else:
            flavors.append("dirichlet0")
    return tuple(flavors)


def _active_slices(grid: Grid, comp: int) -> tuple:
    """Index of the free DOFs inside a component's interior array."""
    idx = []
    for axis in range(grid.dim):
        if axis == comp and not grid.periodic[axis]:
            idx.append(slice(1, grid.cells[axis]))
        else:
            idx.append(slice(None))
    return tuple(idx)


def _list_dot(a, b) -> float:
    return sum(float(np.vdot(x, y)) for x, y in zip(a, b))


def _list_norm(a) -> float:
    return float(np.sqrt(_list_dot(a, a)))


class _MomentumOperator:
    """M v = rho_f/dt v - div(2 nu D v) on pinned noslip fields."""

    def __init__(self, grid: Grid, rho_field: ScalarField, nu_field: ScalarField,
                 dt: float):
        self.grid = grid
        self.dt = dt
        apply_bc(rho_field)
        apply_bc(nu_field)
        self.nu_pad = nu_field.data
        self.rho_faces = [
            average_to_faces(grid, rho_field.data, c) for c in range(grid.dim)
        ]
        self._scratch = VectorField(grid)

    def apply(self, arrays):
        grid = self.grid
        v = self._scratch
        for c in range(grid.dim):
            v.interior(c)[...] = arrays[c]
        apply_bc(v)
        visc = stress_div_pad(grid, self.nu_pad, v.components)
        out = []
        for c in range(grid.dim):
            out.append(self.rho_faces[c] / self.dt * arrays[c] - visc[c])
        return out


class _TransformPreconditioner:
    """Per-component eigenbasis inverse of the constant-coefficient M."""

    def __init__(self, grid: Grid, rho_c: float, nu_c: float, dt: float):
        self.grid = grid
        self.solvers = [
            make_eigen_solver(grid, _component_flavors(grid, c))
            for c in range(grid.dim)
        ]
        self.symbols = [
            rho_c / dt + nu_c * s.laplacian_symbol() for s in self.solvers
        ]

    def apply(self, arrays):
        grid = self.grid
        out = []
        for c in range(grid.dim):
            active = _active_slices(grid, c)
            solver = self.solvers[c]
            x = solver.inverse(solver.forward(arrays[c][active]) / self.symbols[c])
            full = np.zeros_like(arrays[c])
            full[active] = x
            out.append(full)
        return out


def _pcg(op: _MomentumOperator, pre: _TransformPreconditioner, rhs, x0,
         tol_abs: float, max_iter: int):
    """Preconditioned conjugate gradients on component-array lists."""
    x = [a.copy() for a in x0]
    r = [b - a for b, a in zip(rhs, op.apply(x))]
    iters = 0
    if _list_norm(r) <= tol_abs:
        return x, iters
    z = pre.apply(r)
    p = [a.copy() for a in z]
    rz = _list_dot(r, z)
    for _ in range(max_iter):
        Ap = op.apply(p)
        alpha = rz / _list_dot(p, Ap)
        for c in range(len(x)):
            x[c] += alpha * p[c]
            r[c] -= alpha * Ap[c]
        iters += 1
        if _list_norm(r) <= tol_abs:
            return x, iters
        z = pre.apply(r)
        rz_new = _list_dot(r, z)
        beta = rz_new / rz
        rz = rz_new
        for c in range(len(x)):
            p[c] = z[c] + beta * p[c]
    raise SolverFailure(
        f"momentum CG did not reach tolerance in {max_iter} iterations",
        mom_residual=_list_norm(r),
    )


def _harmonic_mid(lo: float, hi: float) -> float:
    return 2.0 * lo * hi / (lo + hi)


def stokes_step(spec: StokesSolveSpec):
    """Advance velocity and pressure one implicit Euler step.

    Returns the divergence-free velocity, the zero-mean pressure, and
    a report with iteration counts and the final residuals. Raises
    SolverFailure when the outer loop exhausts its budget.
    """
    grid = spec.rhs.grid
    nd = grid.dim
    dt = float(spec.dt)
    if not dt > 0.0:
        raise ValueError(f"time step must be positive, got {dt}")
    rho_int = spec.rho_field.interior
    nu_int = spec.nu_field.interior
    if float(np.min(rho_int)) <= 0.0:
        raise ValueError("density samples must be positive")
    if float(np.min(nu_int)) <= 0.0:
        raise ValueError("viscosity samples must be positive")

    op = _MomentumOperator(grid, spec.rho_field, spec.nu_field, dt)
    rho_c = _harmonic_mid(float(np.min(rho_int)), float(np.max(rho_int)))
    nu_c = _harmonic_mid(float(np.min(nu_int)), float(np.max(nu_int)))
    pre = _TransformPreconditioner(grid, rho_c, nu_c, dt)

    apply_bc(spec.v_old)
    apply_bc(spec.rhs)
    F = []
    for c in range(nd):
        force = spec.rhs.interior(c).copy()
        active = _active_slices(grid, c)
        masked = np.zeros_like(force)
        masked[active] = force[active]
        masked[active] += (op.rho_faces[c] / dt)[active] * spec.v_old.interior(c)[active]
        F.append(masked)
    f_scale = _list_norm(F)

    q = ScalarField(grid, "neumann0")
    if spec.q_init is not None:
        q.interior[...] = spec.q_init.interior
        q.interior[...] -= q.interior.mean()

    v_arrays = [spec.v_old.interior(c).copy() for c in range(nd)]
    if f_scale == 0.0 and l2_norm(spec.v_old) == 0.0 and spec.q_init is None:
        v_new = VectorField(grid)
        report = StokesReport(0, 0, 0.0, 0.0, True)
        return v_new, q, report

    cg_total = 0
    mom_residual = np.inf
    div_residual = np.inf
    v_new = None
    for outer in range(1, spec.max_outer + 1):
        apply_bc(q)
        gq = gradient_pad(grid, q.data)
        rhs_mom = []
        for c in range(nd):
            t = F[c] - gq[c]
            active = _active_slices(grid, c)
            masked = np.zeros_like(t)
            masked[active] = t[active]
            rhs_mom.append(masked)
        tol_abs = 0.1 * spec.mom_tol * max(f_scale, _list_norm(rhs_mom))
        v_arrays, used = _pcg(op, pre, rhs_mom, v_arrays, tol_abs, spec.max_cg)
        cg_total += used

        v_star = VectorField(grid)
        for c in range(nd):
            v_star.interior(c)[...] = v_arrays[c]
        apply_bc(v_star)
        d_star = divergence(v_star)
        v_proj, chi = leray_project(v_star)
        q.interior[...] += rho_c / dt * chi.interior - nu_c * d_star.interior
        q.interior[...] -= q.interior.mean()

        v_arrays = [v_proj.interior(c).copy() for c in range(nd)]
        div_residual = linf_norm(d_star) / max(1.0, linf_norm(v_star))

        apply_bc(q)
        gq = gradient_pad(grid, q.data)
        Mv = op.apply(v_arrays)
        resid = []
        for c in range(nd):
            t = F[c] - gq[c] - Mv[c]
            active = _active_slices(grid, c)
            masked = np.zeros_like(t)
            masked[active] = t[active]
            resid.append(masked)
        mom_residual = _list_norm(resid) / max(f_scale, 1e-300)
        v_new = v_proj
        if mom_residual <= spec.mom_tol and div_residual <= spec.div_tol:
            return v_new, q, StokesReport(outer, cg_total, mom_residual,
                                          div_residual, True)

    raise SolverFailure(
        f"pressure correction stalled after {spec.max_outer} outer iterations "
        f"(momentum {mom_residual:.3e}, divergence {div_residual:.3e})",
        mom_residual=mom_residual,
        div_residual=div_residual,
    )


def phase_step(dt: float, phi_old: ScalarField, f_tilde: ScalarField,
               bc: str) -> ScalarField:
    """One implicit Euler step of the fourth-order phase equation.

    Solves (1 + dt lap^2) phi_new = phi_old + dt f_tilde exactly in
    the discrete eigenbasis of the tagged boundary condition.
    """
    if not dt > 0.0:
        raise ValueError(f"time step must be positive, got {dt}")
    if phi_old.bc != bc:
        raise ValueError(
            f"phase BC mismatch: field tagged {phi_old.bc!r}, step wants {bc!r}"
        )
    grid = phi_old.grid
    rhs = ScalarField.from_interior(
        grid, phi_old.interior + dt * f_tilde.interior, bc
    )
    return biharmonic_helmholtz_solve(rhs, dt, bc)
