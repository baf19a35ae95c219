"""Time advance by per-step fixed-point linearization.

Each implicit Euler step couples a variable-density Stokes solve to a
fourth-order phase update through state-dependent coefficients and
nonlinear forcings. Rather than a monolithic Newton solve, the step
repeats a frozen-coefficient map: evaluate density, viscosity, and
the chemical potential at the current iterate, assemble the momentum
and phase sources from it, then solve both linear subproblems
starting from the same previous time level. The fixed point of that
map is the fully implicit step.

The map contracts when the step size is small enough, and the
iteration history doubles as a measurement device. Every iteration
records a combined update seminorm (velocity in H1, phase in an H2
surrogate), and successive ratios estimate the contraction factor.
Three consecutive non-contracting ratios abort the step early with
advice to shrink dt rather than burning the iteration budget.

The background profile enters only through frozen precomputed
derivative arrays. The unknowns are perturbations about it, so a
zero perturbation is an exact fixed point of the map, and integrating
it holds every diagnostic constant to rounding.
"""

from __future__ import annotations

import dataclasses
import logging
import math

import numpy as np

from .diagnostics import DiagnosticsRecord, chemical_potential_pad, energy_and_mass
from .errors import PicardDivergenceError, RegimeExcursionError, SolverFailure
from .grid import (
    GHOST,
    Grid,
    ScalarField,
    VectorField,
    _fill_periodic,
    _padded_shape,
    _sl,
    apply_bc,
    h1_seminorm,
    h2_seminorm,
    l2_norm,
    linf_norm,
    vector_component_counts,
)
from .materials import Params, RegularizedPotential, extend_density, extend_viscosity
from .operators import (
    _face_count,
    _vector_from_interior,
    advect_scalar_pad,
    advect_vector_pad,
    average_to_faces,
    divergence,
    embed_extended,
    gradient_pad,
    laplacian_extended,
    laplacian_pad,
)
from .solvers import StokesSolveSpec, phase_step, stokes_step

logger = logging.getLogger(__name__)

G = GHOST


@dataclasses.dataclass
class State:
    """One time level of the perturbation unknowns."""

    v: VectorField
    phi: ScalarField
    q: ScalarField
    t: float = 0.0

    def copy(self) -> "State":
        return State(self.v.copy(), self.phi.copy(), self.q.copy(), self.t)


def zero_state(grid: Grid, phase_bc: str, t: float = 0.0) -> State:
    return State(
        VectorField(grid),
        ScalarField(grid, phase_bc),
        ScalarField(grid, "neumann0"),
        t,
    )


@dataclasses.dataclass(frozen=True)
class Equilibrium:
    """Frozen background profile with precomputed derivatives.

    ``psi`` must arrive with both ghost layers filled by the profile
    builder (reflection ghosts under natural conditions, pinned
    extrapolation under essential ones); it keeps tag ``none`` so no
    operator ever refills them. ``lap_psi`` is stored in padded form
    with the interior plus one honest ghost layer, ready for face
    averaging.
    """

    psi: ScalarField
    p_star: ScalarField
    grad_psi: tuple
    lap_psi: np.ndarray
    grad_lap_psi: tuple
    psi_linf: float


def make_equilibrium(psi: ScalarField, p_star: ScalarField) -> Equilibrium:
    grid = psi.grid
    psi_linf = float(np.max(np.abs(psi.interior)))
    if psi_linf >= 1.0:
        raise ValueError(
            f"background profile reaches |psi| = {psi_linf:.6f}; the model "
            "requires it strictly inside the physical interval (-1, 1)"
        )
    lap_pad = embed_extended(grid, laplacian_extended(grid, psi.data))
    return Equilibrium(
        psi=psi,
        p_star=p_star,
        grad_psi=tuple(gradient_pad(grid, psi.data)),
        lap_psi=lap_pad,
        grad_lap_psi=tuple(gradient_pad(grid, lap_pad)),
        psi_linf=psi_linf,
    )


@dataclasses.dataclass(frozen=True)
class PicardConfig:
    tol: float = 1e-8
    max_iters: int = 40
    mom_tol: float = 1e-9
    div_tol: float = 1e-9
    max_outer: int = 200
    freeze_velocity: bool = False


@dataclasses.dataclass
class PicardReport:
    """Iteration history of one fixed-point solve."""

    diffs: list
    ratios: list
    converged: bool
    iterations: int
    mom_residual: float = 0.0
    div_residual: float = 0.0

    def geometric_mean_ratio(self) -> float:
        """Geometric mean of the recorded contraction ratios.

        Returns nan when no ratio was recorded (single-iteration
        convergence), and zero if any update landed exactly on the
        previous iterate.
        """
        if not self.ratios:
            return math.nan
        if any(r == 0.0 for r in self.ratios):
            return 0.0
        return math.exp(sum(math.log(r) for r in self.ratios) / len(self.ratios))


@dataclasses.dataclass(frozen=True)
class TimeConfig:
    dt: float
    t_end: float
    snapshot_every: int = 0


def _transporter_pads(grid: Grid, mu_pad: np.ndarray) -> list:
    """Face gradient of a padded cell scalar, shaped as a velocity.

    The vector advection stencil interpolates its transporting field
    across wall-adjacent cells, so along every axis other than its own
    each gradient component gets one honest ghost layer computed from
    the extended scalar. Wall faces keep their one-sided values; the
    advection output at wall faces is discarded anyway.
    """
    nd = grid.dim
    pads = []
    for a in range(nd):
        m_a = _face_count(grid, a)
        h_a = grid.spacing[a]
        hi = mu_pad[_sl(nd, a, slice(G, G + m_a))]
        lo = mu_pad[_sl(nd, a, slice(G - 1, G - 1 + m_a))]
        d = (hi - lo) / h_a
        counts = vector_component_counts(grid, a)
        pad = np.zeros(_padded_shape(counts))
        src = [slice(None)] * nd
        dst = [slice(None)] * nd
        dst[a] = slice(G, G + m_a)
        for b in range(nd):
            if b == a:
                continue
            span = slice(G - 1, G + grid.cells[b] + 1)
            src[b] = span
            dst[b] = span
        pad[tuple(dst)] = d[tuple(src)]
        for b in range(nd):
            if grid.periodic[b]:
                _fill_periodic(pad, b, counts[b])
        pads.append(pad)
    return pads


def _zero_wall_faces(grid: Grid, arrays) -> None:
    nd = grid.dim
    for c in range(nd):
        if grid.periodic[c]:
            continue
        m = grid.cells[c] + 1
        arrays[c][_sl(nd, c, slice(0, 1))] = 0.0
        arrays[c][_sl(nd, c, slice(m - 1, m))] = 0.0


def assemble_g_tilde(
    prev: State, eq: Equilibrium, p: Params, pot: RegularizedPotential
) -> VectorField:
    """Momentum forcing of the frozen-coefficient step.

    Five terms: inertial transport with the frozen density; transport
    of momentum by the chemical-potential flux, the diffuse-interface
    correction that keeps the energy balance consistent when the two
    phases have different densities; two capillary terms splitting
    the surface force between perturbation curvature acting on the
    total profile and background curvature acting on the
    perturbation; and buoyancy from the density the perturbation
    carries. Wall faces are zeroed because the velocity there is
    pinned, so no force acts on them.
    """
    grid = prev.phi.grid
    nd = grid.dim
    z = nd - 1
    apply_bc(prev.phi)
    apply_bc(prev.v)
    tot_pad = prev.phi.data + eq.psi.data

    rho_pad = extend_density(tot_pad, 0, p)
    mu_pad = chemical_potential_pad(grid, tot_pad, pot)
    adv_v = advect_vector_pad(grid, prev.v.components, prev.v.components)
    adv_mu = advect_vector_pad(grid, _transporter_pads(grid, mu_pad), prev.v.components)
    lap_phi = embed_extended(grid, laplacian_extended(grid, prev.phi.data))
    grad_tot = gradient_pad(grid, tot_pad)
    grad_phi = gradient_pad(grid, prev.phi.data)

    arrays = []
    for a in range(nd):
        term = -average_to_faces(grid, rho_pad, a) * adv_v[a]
        term += p.varrho1 * adv_mu[a]
        term -= average_to_faces(grid, lap_phi, a) * grad_tot[a]
        term -= average_to_faces(grid, eq.lap_psi, a) * grad_phi[a]
        if a == z:
            term -= p.g * p.varrho1 * average_to_faces(grid, prev.phi.data, a)
        arrays.append(term)
    _zero_wall_faces(grid, arrays)
    return _vector_from_interior(grid, arrays)


def assemble_f_tilde(
    prev: State, eq: Equilibrium, p: Params, pot: RegularizedPotential
) -> ScalarField:
    """Phase forcing of the frozen-coefficient step.

    The curvature of the potential-slope difference between the total
    order parameter and the background, minus flux-form transport of
    the total by the perturbation velocity. Under natural wall
    conditions both pieces are mean-free by construction: reflection
    ghosts make the stencil Laplacian telescope, and the flux form
    telescopes for a discretely divergence-free velocity. The
    rounding-level residual mean is removed outright so the phase
    solve conserves mass exactly, and logged at debug level.
    """
    grid = prev.phi.grid
    nd = grid.dim
    apply_bc(prev.phi)
    apply_bc(prev.v)
    tot_pad = prev.phi.data + eq.psi.data

    core = tuple(slice(1, -1) for _ in range(nd))
    slope_diff = pot.evaluate(tot_pad[core], 1) - pot.evaluate(eq.psi.data[core], 1)
    vals = laplacian_pad(grid, embed_extended(grid, slope_diff))
    vals = vals - advect_scalar_pad(grid, prev.v.components, tot_pad)
    if prev.phi.bc == "neumann0":
        resid = float(np.mean(vals))
        vals = vals - resid
        logger.debug("removed mean %.3e from the phase source", resid)
    return ScalarField.from_interior(grid, vals, prev.phi.bc)


def vstar_seminorm(dv: VectorField, dphi: ScalarField) -> float:
    """Combined update norm driving the stopping rule.

    Velocity enters through its L2 norm and H1 seminorm, the phase
    through L2, H1, and an H2 surrogate built on the stencil
    Laplacian. Within a single implicit step the time-integrated
    parts of the trajectory norm collapse to these single-level
    quantities.
    """
    ev = l2_norm(dv) ** 2 + h1_seminorm(dv) ** 2
    ep = l2_norm(dphi) ** 2 + h1_seminorm(dphi) ** 2 + h2_seminorm(dphi) ** 2
    return math.sqrt(ev + ep)


def _vector_diff(a: VectorField, b: VectorField) -> VectorField:
    return VectorField(a.grid, tuple(x - y for x, y in zip(a.components, b.components)))


def _scalar_diff(a: ScalarField, b: ScalarField) -> ScalarField:
    return ScalarField(a.grid, a.bc, a.data - b.data)


def picard_solve(
    old: State,
    eq: Equilibrium,
    p: Params,
    pot: RegularizedPotential,
    dt: float,
    cfg: PicardConfig,
) -> tuple:
    """Advance one implicit step by fixed-point iteration.

    Iterate k freezes density and viscosity at the previous iterate's
    total order parameter, assembles both forcings from the previous
    iterate, and solves the two linear subproblems from the same old
    time level; the iteration refines the linearization point, never
    the time level. Iterate zero is the old state itself. Stops when
    the combined update norm falls below tol*(1 + old state norm) or
    under the rounding floor. Raises PicardDivergenceError after
    three consecutive non-contracting ratios, or when the iteration
    budget runs out.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    grid = old.v.grid
    apply_bc(old.v)
    apply_bc(old.phi)
    scale = vstar_seminorm(old.v, old.phi)
    thresh = cfg.tol * (1.0 + scale)
    floor = 64.0 * np.finfo(float).eps * (1.0 + scale)

    v_prev, phi_prev, q_prev = old.v, old.phi, old.q
    diffs: list = []
    ratios: list = []
    bad_streak = 0
    mom_res = 0.0
    div_res = 0.0
    converged = False
    iterations = 0

    for k in range(1, cfg.max_iters + 1):
        iterations = k
        prev = State(v_prev, phi_prev, q_prev, old.t)
        f_rhs = assemble_f_tilde(prev, eq, p, pot)

        if cfg.freeze_velocity:
            v_new, q_new = old.v, old.q
            mom_res = 0.0
            div_res = 0.0
        else:
            g_rhs = assemble_g_tilde(prev, eq, p, pot)
            tot_pad = phi_prev.data + eq.psi.data
            spec = StokesSolveSpec(
                dt=dt,
                rho_field=ScalarField(grid, "none", extend_density(tot_pad, 0, p)),
                nu_field=ScalarField(grid, "none", extend_viscosity(tot_pad, 0, p)),
                rhs=g_rhs,
                v_old=old.v,
                mom_tol=cfg.mom_tol,
                div_tol=cfg.div_tol,
                max_outer=cfg.max_outer,
                q_init=q_prev,
            )
            v_new, q_new, srep = stokes_step(spec)
            mom_res = srep.mom_residual
            div_res = srep.div_residual

        phi_new = phase_step(dt, old.phi, f_rhs, old.phi.bc)

        diff = vstar_seminorm(_vector_diff(v_new, v_prev), _scalar_diff(phi_new, phi_prev))
        diffs.append(diff)
        if len(diffs) >= 2 and diffs[-2] > 1e-14:
            r = diffs[-1] / diffs[-2]
            ratios.append(r)
            bad_streak = bad_streak + 1 if r >= 1.0 else 0
            if bad_streak >= 3:
                raise PicardDivergenceError(
                    f"update norm grew for {bad_streak} consecutive iterations "
                    f"(last ratio {r:.3f}); reduce dt"
                )
        v_prev, phi_prev, q_prev = v_new, phi_new, q_new
        if diff <= thresh or diff <= floor:
            converged = True
            break

    if not converged:
        last = ratios[-1] if ratios else math.inf
        if last >= 1.0:
            raise PicardDivergenceError(
                f"no contraction after {cfg.max_iters} iterations "
                f"(last ratio {last:.3f}); reduce dt"
            )
        raise PicardDivergenceError(
            f"tolerance not reached in {cfg.max_iters} iterations "
            f"(last ratio {last:.3f}); reduce dt or raise max_iters"
        )

    report = PicardReport(
        diffs=diffs,
        ratios=ratios,
        converged=converged,
        iterations=iterations,
        mom_residual=mom_res,
        div_residual=div_res,
    )
    return State(v_prev, phi_prev, q_prev, old.t + dt), report


def nonlinear_residuals(
    new: State,
    old: State,
    eq: Equilibrium,
    p: Params,
    pot: RegularizedPotential,
    dt: float,
    cfg: PicardConfig | None = None,
) -> dict:
    """One fully updated iteration applied to a converged state.

    The step is nonlinearly balanced exactly when it is a fixed point
    of the map with coefficients evaluated at itself. So: reassemble
    both forcings and the material fields at the new state, re-solve
    the two subproblems from the old time level, and measure how far
    the state moves, in the same split norms and relative scale the
    stopping rule uses. A converged iterate moves by at most the
    linearization lag, which contracts with the iteration tolerance.
    """
    cfg = cfg if cfg is not None else PicardConfig()
    grid = new.v.grid
    apply_bc(new.v)
    apply_bc(new.phi)
    prev = State(new.v, new.phi, new.q, old.t)
    f_rhs = assemble_f_tilde(prev, eq, p, pot)
    phi_next = phase_step(dt, old.phi, f_rhs, old.phi.bc)
    if cfg.freeze_velocity:
        v_next = old.v
    else:
        g_rhs = assemble_g_tilde(prev, eq, p, pot)
        tot_pad = new.phi.data + eq.psi.data
        spec = StokesSolveSpec(
            dt=dt,
            rho_field=ScalarField(grid, "none", extend_density(tot_pad, 0, p)),
            nu_field=ScalarField(grid, "none", extend_viscosity(tot_pad, 0, p)),
            rhs=g_rhs,
            v_old=old.v,
            mom_tol=cfg.mom_tol,
            div_tol=cfg.div_tol,
            max_outer=cfg.max_outer,
            q_init=new.q,
        )
        v_next, _, _ = stokes_step(spec)

    scale = 1.0 + vstar_seminorm(old.v, old.phi)
    dv = _vector_diff(v_next, new.v)
    dphi = _scalar_diff(phi_next, new.phi)
    mom = math.sqrt(l2_norm(dv) ** 2 + h1_seminorm(dv) ** 2) / scale
    phase = math.sqrt(
        l2_norm(dphi) ** 2 + h1_seminorm(dphi) ** 2 + h2_seminorm(dphi) ** 2
    ) / scale
    return {"momentum": mom, "phase": phase}


def _make_record(state: State, eq: Equilibrium, p: Params, pot, report) -> DiagnosticsRecord:
    vals = energy_and_mass(state, eq, p, pot)
    max_div = linf_norm(divergence(state.v))
    tot = state.phi.interior + eq.psi.interior
    if report is None:
        iters, geo, momr, divr = 0, math.nan, 0.0, 0.0
    else:
        iters = report.iterations
        geo = report.geometric_mean_ratio()
        momr = report.mom_residual
        divr = report.div_residual
    return DiagnosticsRecord(
        t=state.t,
        E_free=vals["E_free"],
        E_kin=vals["E_kin"],
        E_total=vals["E_total"],
        mass=vals["mass"],
        max_div=max_div,
        linf_phi_tot=float(np.max(np.abs(tot))),
        picard_iters=iters,
        picard_ratio_geo=geo,
        mom_residual=momr,
        div_residual=divr,
    )


def time_integrate(
    initial: State,
    eq: Equilibrium,
    p: Params,
    pot: RegularizedPotential,
    tcfg: TimeConfig,
    pcfg: PicardConfig,
    *,
    record_sink=None,
    snapshot_sink=None,
    step_hook=None,
) -> State:
    """March the perturbation system to t_end.

    Emits one DiagnosticsRecord for the initial state and one after
    every step. Aborts with RegimeExcursionError as soon as the total
    order parameter climbs within half a regularization width of the
    physical bound, because past that point the smooth potential
    branches dominate and the computed dynamics no longer represent
    the model. Solver errors are re-raised with the step index
    attached. The integration owns its state exclusively; the caller
    keeps the initial state unchanged except for ghost refills.
    """
    if tcfg.dt <= 0.0:
        raise ValueError(f"dt must be positive, got {tcfg.dt}")
    if tcfg.t_end < 0.0:
        raise ValueError(f"t_end must be nonnegative, got {tcfg.t_end}")
    n_steps = int(math.floor(tcfg.t_end / tcfg.dt + 1e-9))

    scale = vstar_seminorm(initial.v, initial.phi)
    if scale > 0.0:
        horizon = (1.0 + scale) ** -16
        logger.info(
            "contraction heuristic: data norm %.3e suggests dt <= %.3e "
            "(sixteenth-power horizon; guidance only)",
            scale,
            horizon,
        )

    abort_at = 1.0 - 0.5 * p.delta
    state = initial
    record = _make_record(state, eq, p, pot, None)
    if record_sink is not None:
        record_sink(record)
    _check_regime(record, 0, abort_at)

    for step in range(1, n_steps + 1):
        try:
            state, report = picard_solve(state, eq, p, pot, tcfg.dt, pcfg)
        except PicardDivergenceError as err:
            raise PicardDivergenceError(f"step {step}: {err}") from err
        except SolverFailure as err:
            raise SolverFailure(
                f"step {step}: {err}", err.mom_residual, err.div_residual
            ) from err
        if step_hook is not None:
            step_hook(step, state, report)
        record = _make_record(state, eq, p, pot, report)
        if record_sink is not None:
            record_sink(record)
        if (
            snapshot_sink is not None
            and tcfg.snapshot_every > 0
            and step % tcfg.snapshot_every == 0
        ):
            snapshot_sink(step, state)
        _check_regime(record, step, abort_at)
    return state


def _check_regime(record: DiagnosticsRecord, step: int, abort_at: float) -> None:
    if record.linf_phi_tot >= abort_at:
        raise RegimeExcursionError(
            f"step {step}: total order parameter reached "
            f"{record.linf_phi_tot:.6f} >= {abort_at:.6f}; the regularized "
            "potential branches would dominate past this point"
        )
