"""Discrete differential operators on the staggered box.

All operators are second-order centered stencils acting on ghost
padded arrays. The staggering fixes where each quantity lives: cell
scalars, face velocities, and node shear stresses. Three exact
discrete identities organize the whole design, and the test suite
checks each of them to rounding accuracy:

* divergence is the negative adjoint of gradient under the volume
  weighted inner products, so the pressure solve in the projection is
  a true orthogonal decomposition;
* the divergence of the gradient of a cell scalar is exactly the
  ghost-filled five-point Laplacian, whose eigenbasis the spectral
  module holds, so one transform solve projects a velocity onto the
  discretely divergence-free space with only rounding residual;
* the variable-viscosity stress divergence is the exact negative
  adjoint of twice the viscous strain-rate quadratic form with
  trapezoidal node weights, so viscous dissipation is sign-definite
  step by step.

Nonlinear coefficient fields (density, viscosity, potential slopes)
are always evaluated pointwise on full padded arrays before any
stencil here touches them; that convention makes wall and corner
ghost values of composite expressions consistent with the declared
boundary conditions without any special-casing near walls.

The 2D periodic-x layout dispatches to the compiled kernels selected
by the backend module; every other layout uses the generic
dimension-agnostic numpy paths below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import SolverFailure
from .grid import (
    GHOST,
    Grid,
    ScalarField,
    VectorField,
    _face_weights,
    _bcast,
    _fill_periodic,
    _interior_slices,
    _laplacian_interior,
    _padded_shape,
    _sl,
    apply_bc,
    linf_norm,
    vector_component_counts,
)
from .spectral import biharmonic_helmholtz_solve, poisson_solve

__all__ = [
    "gradient",
    "divergence",
    "laplacian",
    "advect",
    "sym_grad",
    "SymTensorField",
    "tensor_norm",
    "stress_div",
    "leray_project",
    "poisson_solve",
    "biharmonic_helmholtz_solve",
    "gradient_pad",
    "divergence_pad",
    "laplacian_pad",
    "laplacian_extended",
    "embed_extended",
    "advect_scalar_pad",
    "advect_vector_pad",
    "stress_div_pad",
    "average_to_faces",
]

G = GHOST


def _fast2d(grid: Grid) -> bool:
    return grid.dim == 2 and grid.periodic == (True, False)


def _face_count(grid: Grid, axis: int) -> int:
    n = grid.cells[axis]
    return n if grid.periodic[axis] else n + 1


def _interior_idx(grid: Grid, full_axes) -> tuple:
    idx = [slice(G, G + n) for n in grid.cells]
    for a in full_axes:
        idx[a] = slice(None)
    return tuple(idx)


def _generic_laplacian_pad(grid: Grid, pad: np.ndarray) -> np.ndarray:
    counts = tuple(s - 2 * G for s in pad.shape)
    return _laplacian_interior(pad, counts, grid.spacing)


def laplacian_pad(grid: Grid, pad: np.ndarray) -> np.ndarray:
    """Five/seven-point Laplacian of any padded sample array."""
    if grid.dim == 2:
        return backend.laplacian_cells_2d(pad, grid.spacing[0], grid.spacing[1])
    return _generic_laplacian_pad(grid, pad)


def laplacian_extended(grid: Grid, pad: np.ndarray) -> np.ndarray:
    """Stencil Laplacian on the interior plus one ghost layer.

    The two-deep ghost padding leaves exactly enough neighbours to
    evaluate the centered stencil one layer outside the interior.
    Derived cell quantities such as a chemical potential need that
    extra layer so their face gradients reach the walls. Entry ``[i]``
    of the result corresponds to padded index ``[i+1]``.
    """
    nd = grid.dim
    core = tuple(slice(1, -1) for _ in range(nd))
    ctr = pad[core]
    out = np.zeros_like(ctr)
    for a in range(nd):
        h2 = grid.spacing[a] * grid.spacing[a]
        up = list(core)
        up[a] = slice(2, None)
        dn = list(core)
        dn[a] = slice(0, -2)
        out += (pad[tuple(up)] - 2.0 * ctr + pad[tuple(dn)]) / h2
    return out


def embed_extended(grid: Grid, ext: np.ndarray) -> np.ndarray:
    """Place an interior-plus-one-layer array back into padded storage.

    The outermost ghost ring stays zero. Every face-based operator in
    this module touches at most one layer beyond the interior, so the
    embedded array is safe input for gradients, face averages, and the
    interior Laplacian.
    """
    pad = np.zeros(_padded_shape(grid.cells))
    pad[tuple(slice(1, -1) for _ in range(grid.dim))] = ext
    return pad


def gradient_pad(grid: Grid, pad: np.ndarray) -> list[np.ndarray]:
    """Cell scalar to face gradient, one interior array per axis."""
    nd = grid.dim
    out = []
    for a in range(nd):
        m = _face_count(grid, a)
        h = grid.spacing[a]
        hi = pad[_sl(nd, a, slice(G, G + m))]
        lo = pad[_sl(nd, a, slice(G - 1, G - 1 + m))]
        d = (hi - lo) / h
        out.append(d[_interior_idx(grid, (a,))])
    return out


def divergence_pad(grid: Grid, comp_pads) -> np.ndarray:
    """Face fluxes to cell divergence."""
    nd = grid.dim
    out = np.zeros(grid.cells)
    for a in range(nd):
        n = grid.cells[a]
        h = grid.spacing[a]
        pad = comp_pads[a]
        hi = pad[_sl(nd, a, slice(G + 1, G + n + 1))]
        lo = pad[_sl(nd, a, slice(G, G + n))]
        d = (hi - lo) / h
        out += d[_interior_idx(grid, (a,))]
    return out


def average_to_faces(grid: Grid, pad: np.ndarray, axis: int) -> np.ndarray:
    """Arithmetic average of a padded cell scalar onto the faces of one axis."""
    nd = grid.dim
    m = _face_count(grid, axis)
    hi = pad[_sl(nd, axis, slice(G, G + m))]
    lo = pad[_sl(nd, axis, slice(G - 1, G - 1 + m))]
    return (0.5 * (hi + lo))[_interior_idx(grid, (axis,))]


def advect_scalar_pad(grid: Grid, comp_pads, s_pad: np.ndarray) -> np.ndarray:
    """Flux-form transport of a cell scalar by a face velocity.

    Computed as div(u s_face) - s div u, which collapses to the
    centered (u . grad) s and is exactly skew-adjoint in s whenever
    the discrete divergence of u vanishes.
    """
    if _fast2d(grid):
        return backend.advect_scalar_2d(
            comp_pads[0], comp_pads[1], s_pad, grid.spacing[0], grid.spacing[1]
        )
    return _generic_advect_scalar_pad(grid, comp_pads, s_pad)


def _generic_advect_scalar_pad(grid: Grid, comp_pads, s_pad: np.ndarray) -> np.ndarray:
    nd = grid.dim
    s_int = s_pad[_interior_slices(grid.cells)]
    flux = np.zeros(grid.cells)
    div = np.zeros(grid.cells)
    for a in range(nd):
        n = grid.cells[a]
        h = grid.spacing[a]
        pad = comp_pads[a]
        rest = _interior_idx(grid, (a,))
        u_hi = pad[_sl(nd, a, slice(G + 1, G + n + 1))][rest]
        u_lo = pad[_sl(nd, a, slice(G, G + n))][rest]
        s_c = s_pad[_sl(nd, a, slice(G, G + n))][rest]
        s_up = s_pad[_sl(nd, a, slice(G + 1, G + n + 1))][rest]
        s_dn = s_pad[_sl(nd, a, slice(G - 1, G + n - 1))][rest]
        flux += (u_hi * (s_up + s_c) - u_lo * (s_c + s_dn)) / (2.0 * h)
        div += (u_hi - u_lo) / h
    return flux - s_int * div


def advect_vector_pad(grid: Grid, vel_pads, tgt_pads) -> list[np.ndarray]:
    """Centered (u . grad) target at the target's staggered positions."""
    if _fast2d(grid) and vel_pads is tgt_pads:
        au, aw = backend.advect_vector_2d(
            vel_pads[0], vel_pads[1], grid.spacing[0], grid.spacing[1]
        )
        return [au, aw]
    return _generic_advect_vector_pad(grid, vel_pads, tgt_pads)


def _generic_advect_vector_pad(grid: Grid, vel_pads, tgt_pads) -> list[np.ndarray]:
    nd = grid.dim
    out = []
    for c in range(nd):
        counts = vector_component_counts(grid, c)
        m_c = counts[c]
        acc = np.zeros(counts)
        tgt = tgt_pads[c]
        for a in range(nd):
            h = grid.spacing[a]
            if a == c:
                ctr = tgt[_sl(nd, c, slice(G, G + m_c))]
                up = tgt[_sl(nd, c, slice(G + 1, G + m_c + 1))]
                dn = tgt[_sl(nd, c, slice(G - 1, G + m_c - 1))]
                vel = vel_pads[c][_sl(nd, c, slice(G, G + m_c))]
                term = vel * (up - dn) / (2.0 * h)
                acc += term[_interior_idx(grid, (c,))]
            else:
                n_a = grid.cells[a]
                pad_a = vel_pads[a]
                tmp = 0.5 * (
                    pad_a[_sl(nd, a, slice(G, G + n_a))]
                    + pad_a[_sl(nd, a, slice(G + 1, G + n_a + 1))]
                )
                tmp = 0.5 * (
                    tmp[_sl(nd, c, slice(G - 1, G - 1 + m_c))]
                    + tmp[_sl(nd, c, slice(G, G + m_c))]
                )
                ubar = tmp[_interior_idx(grid, (a, c))]
                dup = tgt[_sl(nd, a, slice(G + 1, G + n_a + 1))]
                ddn = tgt[_sl(nd, a, slice(G - 1, G + n_a - 1))]
                dc = (dup - ddn) / (2.0 * h)
                dc = dc[_sl(nd, c, slice(G, G + m_c))][_interior_idx(grid, (a, c))]
                acc += ubar * dc
        if not grid.periodic[c]:
            acc[_sl(nd, c, slice(0, 1))] = 0.0
            acc[_sl(nd, c, slice(m_c - 1, m_c))] = 0.0
        out.append(acc)
    return out


def stress_div_pad(grid: Grid, nu_pad: np.ndarray, comp_pads) -> list[np.ndarray]:
    """Conservative divergence of twice the viscous strain-rate stress."""
    if _fast2d(grid):
        du, dw = backend.stress_div_2d(
            nu_pad, comp_pads[0], comp_pads[1], grid.spacing[0], grid.spacing[1]
        )
        return [du, dw]
    return _generic_stress_div_pad(grid, nu_pad, comp_pads)


def _generic_stress_div_pad(grid: Grid, nu_pad: np.ndarray, comp_pads) -> list[np.ndarray]:
    nd = grid.dim
    nu_int = nu_pad[_interior_slices(grid.cells)]
    outs = [np.zeros(vector_component_counts(grid, c)) for c in range(nd)]

    # diagonal stress: tau_cc = 2 nu D_c u_c at cells
    for c in range(nd):
        n_c = grid.cells[c]
        h_c = grid.spacing[c]
        m_c = _face_count(grid, c)
        pad_c = comp_pads[c]
        d = (
            pad_c[_sl(nd, c, slice(G + 1, G + n_c + 1))]
            - pad_c[_sl(nd, c, slice(G, G + n_c))]
        ) / h_c
        tau = np.zeros(_padded_shape(grid.cells))
        tau[_interior_slices(grid.cells)] = 2.0 * nu_int * d[_interior_idx(grid, (c,))]
        for q in range(nd):
            if grid.periodic[q]:
                _fill_periodic(tau, q, grid.cells[q])
        grad = (
            tau[_sl(nd, c, slice(G, G + m_c))]
            - tau[_sl(nd, c, slice(G - 1, G - 1 + m_c))]
        ) / h_c
        outs[c] += grad[_interior_idx(grid, (c,))]

    # shear stress: tau_ab = nu_node (D_b u_a + D_a u_b) at plane nodes
    for a in range(nd):
        for b in range(a + 1, nd):
            fa = _face_count(grid, a)
            fb = _face_count(grid, b)
            h_a = grid.spacing[a]
            h_b = grid.spacing[b]
            node_counts = list(grid.cells)
            node_counts[a] = fa
            node_counts[b] = fb
            node_counts = tuple(node_counts)

            dba = (
                comp_pads[a][_sl(nd, b, slice(G, G + fb))]
                - comp_pads[a][_sl(nd, b, slice(G - 1, G - 1 + fb))]
            ) / h_b
            dba = dba[_sl(nd, a, slice(G, G + fa))][_interior_idx(grid, (a, b))]
            dab = (
                comp_pads[b][_sl(nd, a, slice(G, G + fa))]
                - comp_pads[b][_sl(nd, a, slice(G - 1, G - 1 + fa))]
            ) / h_a
            dab = dab[_sl(nd, b, slice(G, G + fb))][_interior_idx(grid, (a, b))]

            t = 0.5 * (
                nu_pad[_sl(nd, a, slice(G - 1, G - 1 + fa))]
                + nu_pad[_sl(nd, a, slice(G, G + fa))]
            )
            t = 0.5 * (
                t[_sl(nd, b, slice(G - 1, G - 1 + fb))] + t[_sl(nd, b, slice(G, G + fb))]
            )
            nun = t[_interior_idx(grid, (a, b))]

            tau = np.zeros(_padded_shape(node_counts))
            tau[_interior_slices(node_counts)] = nun * (dba + dab)
            for q in range(nd):
                if grid.periodic[q]:
                    _fill_periodic(tau, q, node_counts[q])

            n_b = grid.cells[b]
            ga = (
                tau[_sl(nd, b, slice(G + 1, G + n_b + 1))]
                - tau[_sl(nd, b, slice(G, G + n_b))]
            ) / h_b
            outs[a] += ga[_sl(nd, a, slice(G, G + fa))][_interior_idx(grid, (a, b))]

            n_a = grid.cells[a]
            gb = (
                tau[_sl(nd, a, slice(G + 1, G + n_a + 1))]
                - tau[_sl(nd, a, slice(G, G + n_a))]
            ) / h_a
            outs[b] += gb[_sl(nd, b, slice(G, G + fb))][_interior_idx(grid, (a, b))]

    for c in range(nd):
        if not grid.periodic[c]:
            m_c = _face_count(grid, c)
            outs[c][_sl(nd, c, slice(0, 1))] = 0.0
            outs[c][_sl(nd, c, slice(m_c - 1, m_c))] = 0.0
    return outs


def _vector_from_interior(grid: Grid, arrays) -> VectorField:
    """Wrap interior component arrays; fills periodic ghosts only.

    Wall-side ghosts stay zero: outputs of gradient and stress type
    are forces, not velocities, so the noslip ghost rules must not be
    imposed on them.
    """
    v = VectorField(grid)
    for c, arr in enumerate(arrays):
        v.interior(c)[...] = arr
    for c, pad in enumerate(v.components):
        counts = vector_component_counts(grid, c)
        for axis in range(grid.dim):
            if grid.periodic[axis]:
                _fill_periodic(pad, axis, counts[axis])
    return v


def _require_scalar_bc(s: ScalarField, what: str) -> None:
    if s.bc == "none" and not all(s.grid.periodic):
        raise ValueError(f"{what} needs a wall BC tag, field has bc='none'")


def gradient(s: ScalarField) -> VectorField:
    """Face-centered gradient of a cell scalar."""
    _require_scalar_bc(s, "gradient")
    apply_bc(s)
    return _vector_from_interior(s.grid, gradient_pad(s.grid, s.data))


def divergence(u: VectorField) -> ScalarField:
    """Cell-centered divergence of a face field; untagged output.

    Reads only owned faces plus periodic wraps, so it reports the flux
    balance of the samples as given. In particular it never pins wall
    faces, which keeps div(gradient(s)) identical to the stencil
    Laplacian for every scalar BC tag.
    """
    grid = u.grid
    for c, pad in enumerate(u.components):
        counts = vector_component_counts(grid, c)
        for axis in range(grid.dim):
            if grid.periodic[axis]:
                _fill_periodic(pad, axis, counts[axis])
    out = ScalarField.from_interior(grid, divergence_pad(grid, u.components), "none")
    return apply_bc(out)


def laplacian(field):
    """Component-wise centered Laplacian, same field kind out."""
    grid = field.grid
    if isinstance(field, ScalarField):
        _require_scalar_bc(field, "laplacian")
        apply_bc(field)
        out = ScalarField.from_interior(grid, laplacian_pad(grid, field.data), field.bc)
        return apply_bc(out)
    if isinstance(field, VectorField):
        apply_bc(field)
        arrays = [laplacian_pad(grid, pad) for pad in field.components]
        return _vector_from_interior(grid, arrays)
    raise TypeError(f"unsupported field type {type(field)!r}")


def advect(u: VectorField, target):
    """Centered (u . grad) target, same kind as the target."""
    grid = u.grid
    apply_bc(u)
    if isinstance(target, ScalarField):
        _require_scalar_bc(target, "advect")
        apply_bc(target)
        out = advect_scalar_pad(grid, u.components, target.data)
        return apply_bc(ScalarField.from_interior(grid, out, "none"))
    if isinstance(target, VectorField):
        apply_bc(target)
        vel_pads = u.components
        tgt_pads = target.components
        if target is u:
            tgt_pads = vel_pads
        arrays = advect_vector_pad(grid, vel_pads, tgt_pads)
        return _vector_from_interior(grid, arrays)
    raise TypeError(f"unsupported target type {type(target)!r}")


@dataclass
class SymTensorField:
    """Symmetric velocity gradient: diagonal at cells, shear at nodes."""

    grid: Grid
    diag: tuple
    off: dict


def sym_grad(u: VectorField) -> SymTensorField:
    grid = u.grid
    nd = grid.dim
    apply_bc(u)
    diag = []
    for c in range(nd):
        n_c = grid.cells[c]
        h_c = grid.spacing[c]
        pad_c = u.components[c]
        d = (
            pad_c[_sl(nd, c, slice(G + 1, G + n_c + 1))]
            - pad_c[_sl(nd, c, slice(G, G + n_c))]
        ) / h_c
        diag.append(d[_interior_idx(grid, (c,))])
    off = {}
    for a in range(nd):
        for b in range(a + 1, nd):
            fa = _face_count(grid, a)
            fb = _face_count(grid, b)
            dba = (
                u.components[a][_sl(nd, b, slice(G, G + fb))]
                - u.components[a][_sl(nd, b, slice(G - 1, G - 1 + fb))]
            ) / grid.spacing[b]
            dba = dba[_sl(nd, a, slice(G, G + fa))][_interior_idx(grid, (a, b))]
            dab = (
                u.components[b][_sl(nd, a, slice(G, G + fa))]
                - u.components[b][_sl(nd, a, slice(G - 1, G - 1 + fa))]
            ) / grid.spacing[a]
            dab = dab[_sl(nd, b, slice(G, G + fb))][_interior_idx(grid, (a, b))]
            off[(a, b)] = 0.5 * (dba + dab)
    return SymTensorField(grid=grid, diag=tuple(diag), off=off)


def tensor_norm(t: SymTensorField) -> float:
    """Frobenius norm with trapezoidal weights on wall-plane nodes."""
    grid = t.grid
    nd = grid.dim
    total = 0.0
    for d in t.diag:
        total += float(np.sum(d * d))
    for (a, b), arr in t.off.items():
        w = 1.0
        for axis in (a, b):
            wa = _face_weights(grid, axis, True)
            if not np.all(wa == 1.0):
                w = w * _bcast(wa, axis, nd)
        total += 2.0 * float(np.sum(w * arr * arr))
    return float(np.sqrt(grid.cell_volume * total))


def stress_div(nu_field: ScalarField, u: VectorField) -> VectorField:
    """Divergence of 2 nu D(u) with node-averaged viscosity.

    The viscosity field's ghost layers participate in wall and corner
    node averages: a BC-tagged field gets them filled here, while a
    field tagged ``none`` must arrive with ghosts already populated
    (the assembly path always evaluates material laws on full padded
    arrays, which guarantees that).
    """
    if float(np.min(nu_field.interior)) <= 0.0:
        raise ValueError("viscosity samples must be positive")
    apply_bc(nu_field)
    apply_bc(u)
    arrays = stress_div_pad(u.grid, nu_field.data, u.components)
    return _vector_from_interior(u.grid, arrays)


def leray_project(u: VectorField):
    """Project onto the discretely divergence-free subspace.

    Returns the projected field and the cell pressure potential whose
    gradient was removed. Because the transform solve inverts exactly
    the same stencil Laplacian that div(grad(.)) produces, the
    projected divergence is rounding noise; a safety check enforces
    that and raises on violation.
    """
    grid = u.grid
    apply_bc(u)
    div = divergence(u)
    rhs = ScalarField.from_interior(grid, -div.interior, "none")
    chi = poisson_solve(rhs, "neumann0", check_compatibility=False)
    gchi = gradient_pad(grid, chi.data)
    arrays = [u.interior(c) - gchi[c] for c in range(grid.dim)]
    proj = _vector_from_interior(grid, arrays)
    apply_bc(proj)
    resid = linf_norm(divergence(proj))
    scale = max(1.0, linf_norm(u))
    if resid > 1e-10 * scale:
        raise SolverFailure(
            f"projection left divergence {resid:.3e} above tolerance",
            div_residual=resid,
        )
    return proj, chi
