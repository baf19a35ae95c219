"""Energy, mass, and residual bookkeeping for two-phase runs.

The physics carries three conserved or dissipated quantities worth
watching every step. The free energy integrates half the squared
phase gradient plus the regularized double-well potential of the
total order parameter; it decays in a pure phase-field relaxation and
exchanges with kinetic energy once flow couples in. The kinetic
energy weights the squared velocity with the phase-dependent density.
The mass is the plain cell sum of the order parameter; under natural
boundary conditions the discrete transport and fourth-order terms are
both mean-free, so mass drift measures accumulated solver error
rather than physics.

All integrals use midpoint quadrature over cells. Face-staggered
quantities are averaged back to cell centers first, so every reported
number refers to the same control volumes.

A record of these diagnostics, together with solver health numbers
(divergence residual, iteration counts, contraction ratios), is
serialized as one CSV row per time step with full-precision decimal
values, which keeps the series bitwise reproducible across runs.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .grid import (
    GHOST,
    ScalarField,
    _bcast,
    _face_weights,
    _interior_slices,
    _sl,
    apply_bc,
)
from .materials import Params, RegularizedPotential, extend_density, extend_viscosity
from .operators import (
    _face_count,
    _interior_idx,
    embed_extended,
    gradient_pad,
    laplacian_extended,
    sym_grad,
)

G = GHOST

CSV_COLUMNS = (
    "t",
    "E_free",
    "E_kin",
    "E_total",
    "mass",
    "max_div",
    "linf_phi_tot",
    "picard_iters",
    "picard_ratio_geo",
    "mom_residual",
    "div_residual",
)


@dataclasses.dataclass(frozen=True)
class DiagnosticsRecord:
    """One row of the per-step diagnostics series."""

    t: float
    E_free: float
    E_kin: float
    E_total: float
    mass: float
    max_div: float
    linf_phi_tot: float
    picard_iters: int
    picard_ratio_geo: float
    mom_residual: float
    div_residual: float

    def csv_row(self) -> str:
        parts = []
        for name in CSV_COLUMNS:
            value = getattr(self, name)
            if name == "picard_iters":
                parts.append(str(int(value)))
            else:
                parts.append(repr(float(value)))
        return ",".join(parts)


def csv_header() -> str:
    return ",".join(CSV_COLUMNS)


def _velocity_sq_at_cells(v) -> np.ndarray:
    """Average each squared component onto cell centers and sum."""
    grid = v.grid
    nd = grid.dim
    out = np.zeros(grid.cells)
    for c in range(nd):
        n = grid.cells[c]
        sq = v.components[c] ** 2
        lo = sq[_sl(nd, c, slice(G, G + n))]
        hi = sq[_sl(nd, c, slice(G + 1, G + n + 1))]
        out += (0.5 * (lo + hi))[_interior_idx(grid, (c,))]
    return out


def _gradient_sq_at_cells(grid, pad: np.ndarray) -> np.ndarray:
    """Average squared face differences of a cell scalar onto centers."""
    nd = grid.dim
    out = np.zeros(grid.cells)
    for a in range(nd):
        n = grid.cells[a]
        h = grid.spacing[a]
        hi = pad[_sl(nd, a, slice(G, G + n + 1))]
        lo = pad[_sl(nd, a, slice(G - 1, G + n))]
        d2 = ((hi - lo) / h) ** 2
        avg = 0.5 * (d2[_sl(nd, a, slice(0, n))] + d2[_sl(nd, a, slice(1, n + 1))])
        out += avg[_interior_idx(grid, (a,))]
    return out


def _node_viscosity(grid, nu_pad: np.ndarray, a: int, b: int) -> np.ndarray:
    """Four-point average of a padded cell viscosity onto (a, b) nodes."""
    nd = grid.dim
    fa = _face_count(grid, a)
    fb = _face_count(grid, b)
    acc = None
    for sa in (slice(G - 1, G - 1 + fa), slice(G, G + fa)):
        for sb in (slice(G - 1, G - 1 + fb), slice(G, G + fb)):
            piece = nu_pad[_sl(nd, a, sa)][_sl(nd, b, sb)]
            acc = piece if acc is None else acc + piece
    return 0.25 * acc[_interior_idx(grid, (a, b))]


def chemical_potential_pad(grid, tot_pad: np.ndarray, pot: RegularizedPotential) -> np.ndarray:
    """Padded chemical potential of a composite order parameter.

    Evaluates -lap(phi) + potential'(phi) on the interior plus one
    ghost layer, which is exactly the extent face gradients need. The
    input must carry valid ghosts two layers deep (the standard state
    after BC application).
    """
    nd = grid.dim
    ext = tot_pad[tuple(slice(1, -1) for _ in range(nd))]
    mu_ext = -laplacian_extended(grid, tot_pad) + pot.evaluate(ext, 1)
    return embed_extended(grid, mu_ext)


def energy_and_mass(state, eq, p: Params, pot: RegularizedPotential) -> dict:
    """Compute the energy budget of a perturbation state.

    Returns a dict with the free, kinetic, and total energies, the
    order-parameter mass, and two instantaneous dissipation
    surrogates: twice the viscosity-weighted strain-rate quadratic
    form, and the squared gradient of the chemical potential. The
    state only needs ``v`` and ``phi`` attributes; the equilibrium
    supplies the frozen background profile.
    """
    grid = state.phi.grid
    nd = grid.dim
    apply_bc(state.phi)
    apply_bc(state.v)
    vol = grid.cell_volume
    inner = _interior_slices(grid.cells)

    tot_pad = state.phi.data + eq.psi.data
    tot_int = tot_pad[inner]

    grad_sq = _gradient_sq_at_cells(grid, tot_pad)
    bulk = pot.evaluate(tot_int, 0)
    e_free = vol * float(np.sum(0.5 * grad_sq + bulk))

    rho_cells = extend_density(tot_int, 0, p)
    e_kin = 0.5 * vol * float(np.sum(rho_cells * _velocity_sq_at_cells(state.v)))

    mass = vol * float(np.sum(tot_int))

    # dissipation surrogate one: 2 <nu D(v), D(v)> with the same node
    # weighting the stress divergence is adjoint to
    nu_pad = extend_viscosity(tot_pad, 0, p)
    tensor = sym_grad(state.v)
    visc = 0.0
    nu_int = nu_pad[inner]
    for d in tensor.diag:
        visc += float(np.sum(nu_int * d * d))
    for (a, b), arr in tensor.off.items():
        w = 1.0
        for axis in (a, b):
            wa = _face_weights(grid, axis, True)
            if not np.all(wa == 1.0):
                w = w * _bcast(wa, axis, nd)
        nun = _node_viscosity(grid, nu_pad, a, b)
        visc += 2.0 * float(np.sum(w * nun * arr * arr))
    visc_dissipation = 2.0 * vol * visc

    # dissipation surrogate two: <grad mu, grad mu> over faces with
    # trapezoidal wall weights
    mu_pad = chemical_potential_pad(grid, tot_pad, pot)
    gmu = gradient_pad(grid, mu_pad)
    chem = 0.0
    for a in range(nd):
        w = _bcast(_face_weights(grid, a, not grid.periodic[a]), a, nd)
        chem += float(np.sum(w * gmu[a] * gmu[a]))
    chem_dissipation = vol * chem

    return {
        "E_free": e_free,
        "E_kin": e_kin,
        "E_total": e_free + e_kin,
        "mass": mass,
        "visc_dissipation": visc_dissipation,
        "chem_dissipation": chem_dissipation,
    }
