"""Background profiles and initial data for perturbation runs.

A stationary state of the two-phase system has zero velocity and a
phase profile whose chemical potential is affine in height: the
fourth-order balance collapses to the second-order equation

    -psi'' + potential'(psi) = level + slope * x3

solved here on cell centers by a damped Newton iteration. Under
natural (zero-flux) conditions the slope must vanish, so the profile
connects the two coexistence values of the double well through a
kink; under essential conditions the end values are pinned and the
affine branch of the potential is part of the configuration. The
matching hydrostatic pressure is accumulated face by face from the
same discrete capillary and gravity forces the momentum assembly
uses, which makes the discrete force balance hold to rounding at
every interior vertical face.

The classical instability mechanism needs the heavy phase to sit
above the light one somewhere, which for an increasing density
interpolant is a sign condition on the vertical derivative of the
profile. ``rt_condition_check`` reports the condition together with a
witnessing height, and ``rt_initial_data`` seeds a run with a single
horizontal mode localized at the interface, odd in the vertical so
the order-parameter mean stays zero under natural conditions.
"""

import dataclasses
import logging

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .errors import ConfigError, SolverFailure
from .grid import GHOST, Grid, ScalarField, apply_bc
from .materials import Params, RegularizedPotential, extend_density
from .operators import leray_project
from .picard import Equilibrium, State, make_equilibrium, zero_state

__all__ = [
    "ScenarioConfig",
    "coexistence_value",
    "equilibrium_profile",
    "uniform_equilibrium",
    "rt_condition_check",
    "rt_initial_data",
    "manufactured_initial_data",
    "make_initial_data",
    "amplitude_for_linf",
    "suggested_delta",
]

logger = logging.getLogger(__name__)

G = GHOST

_SCENARIOS = ("rayleigh_taylor", "manufactured", "custom")
_ORIENTATIONS = ("heavy_on_top", "heavy_below")


@dataclasses.dataclass(frozen=True)
class ScenarioConfig:
    """Initial-data recipe.

    ``amplitude`` is the nominal peak size of the phase perturbation,
    ``mode`` the horizontal wavenumber of its single cosine mode, and
    ``interface_center`` / ``interface_width`` locate the background
    kink (defaults: mid-height, and the linearized decay length of the
    kink); the perturbation envelope follows the kink profile itself.
    ``orientation`` selects which coexistence value sits on top.
    """

    scenario: str = "rayleigh_taylor"
    amplitude: float = 0.05
    mode: int = 1
    interface_center: float | None = None
    interface_width: float | None = None
    orientation: str = "heavy_on_top"

    def __post_init__(self):
        if self.scenario not in _SCENARIOS:
            raise ConfigError(
                f"unknown scenario {self.scenario!r}; expected one of {_SCENARIOS}"
            )
        if self.orientation not in _ORIENTATIONS:
            raise ConfigError(
                f"unknown orientation {self.orientation!r}; "
                f"expected one of {_ORIENTATIONS}"
            )
        if not self.amplitude >= 0.0:
            raise ConfigError(f"amplitude must be nonnegative, got {self.amplitude}")
        if not (isinstance(self.mode, int) and self.mode >= 1):
            raise ConfigError(f"mode must be a positive integer, got {self.mode!r}")
        if self.interface_width is not None and not self.interface_width > 0.0:
            raise ConfigError(
                f"interface_width must be positive, got {self.interface_width}"
            )


def coexistence_value(pot: RegularizedPotential, level: float = 0.0) -> float:
    """Positive root of potential'(r) = level inside the spinodal gap.

    The double well needs theta0 > theta to exist at all; the root is
    bracketed between the positive inflection point and the exterior
    polynomial branch, where the slope is strictly increasing.
    """
    if pot.theta0 <= pot.theta:
        raise ConfigError(
            "potential has a single well (theta0 <= theta); no two-phase "
            "equilibrium exists"
        )
    lo = np.sqrt(1.0 - pot.theta / pot.theta0)
    hi = 4.0

    def f(r):
        return pot.evaluate(r, 1) - level

    if f(lo) >= 0.0 or f(hi) <= 0.0:
        raise ConfigError(
            f"no coexistence value with potential slope {level}; "
            "the level lies outside the double-well range"
        )
    return float(brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16))


def suggested_delta(linf_phi_tot: float) -> float:
    """Regularization margin for a given initial composite amplitude.

    Half the distance between the composite order parameter and the
    saturation value, so the run aborts before the exact potential's
    singularity can be felt.
    """
    if not 0.0 <= linf_phi_tot < 1.0:
        raise ConfigError(
            f"initial composite amplitude must lie in [0, 1), got {linf_phi_tot}"
        )
    return 0.5 * (1.0 - linf_phi_tot)


def _ghost_fill_1d(prof: np.ndarray, bc: str, pinned) -> np.ndarray:
    """Profile on cells extended by two ghost layers per end."""
    n = prof.size
    out = np.empty(n + 2 * G)
    out[G:-G] = prof
    if bc == "neumann0":
        out[1] = prof[0]
        out[0] = prof[1]
        out[-2] = prof[-1]
        out[-1] = prof[-2]
    else:
        a, b = pinned
        out[1] = 2.0 * a - prof[0]
        out[0] = 2.0 * a - prof[1]
        out[-2] = 2.0 * b - prof[-1]
        out[-1] = 2.0 * b - prof[-2]
    return out


def equilibrium_profile(
    grid: Grid,
    p: Params,
    pot: RegularizedPotential,
    bc: str,
    *,
    interface_center: float | None = None,
    interface_width: float | None = None,
    orientation: str = "heavy_on_top",
    mu_level: float = 0.0,
    mu_slope: float = 0.0,
    pinned_values: tuple | None = None,
    newton_tol: float = 1e-11,
    max_newton: int = 60,
) -> Equilibrium:
    """Solve the one-dimensional profile equation and extrude it.

    Damped Newton from a tanh-shaped guess, halving the step up to 30
    times whenever the residual fails to drop or the iterate touches
    the saturation values. Under ``neumann0`` a nonzero potential
    slope is inconsistent with the zero-flux ends and is rejected;
    under ``dirichlet0`` the end values default to the coexistence
    pair but can be pinned explicitly.
    """
    if bc not in ("neumann0", "dirichlet0"):
        raise ConfigError(f"unsupported phase bc {bc!r}")
    if bc == "neumann0" and mu_slope != 0.0:
        raise ConfigError(
            "a potential slope is incompatible with zero-flux ends; "
            "use the essential problem for tilted chemical potential"
        )
    if orientation not in _ORIENTATIONS:
        raise ConfigError(f"unknown orientation {orientation!r}")

    axis = grid.vertical_axis
    n = grid.cells[axis]
    h = grid.spacing[axis]
    height = grid.extents[axis]
    z = (np.arange(n) + 0.5) * h
    center = 0.5 * height if interface_center is None else interface_center

    r_hi = coexistence_value(pot, mu_level)
    r_lo = -coexistence_value(pot, -mu_level)
    if pinned_values is not None:
        lo_val, hi_val = pinned_values
        for v in (lo_val, hi_val):
            if not -1.0 < v < 1.0:
                raise ConfigError(f"pinned profile value {v} outside (-1, 1)")
    else:
        lo_val, hi_val = r_lo, r_hi
    if orientation == "heavy_below":
        lo_val, hi_val = hi_val, lo_val
    pinned = (lo_val, hi_val)

    curv = max(float(pot.evaluate(r_hi, 2)), 1e-8)
    width = interface_width if interface_width is not None else 1.0 / np.sqrt(curv)

    target_mu = mu_level + mu_slope * z
    prof = lo_val + (hi_val - lo_val) * 0.5 * (1.0 + np.tanh((z - center) / width))

    def residual(vals):
        gh = np.empty(n + 2)
        gh[1:-1] = vals
        if bc == "neumann0":
            gh[0] = vals[0]
            gh[-1] = vals[-1]
        else:
            gh[0] = 2.0 * pinned[0] - vals[0]
            gh[-1] = 2.0 * pinned[1] - vals[-1]
        lap = (gh[:-2] - 2.0 * vals + gh[2:]) / (h * h)
        return -lap + pot.evaluate(vals, 1) - target_mu

    res = residual(prof)
    rn = float(np.max(np.abs(res)))
    for it in range(max_newton):
        if rn <= newton_tol:
            break
        ab = np.zeros((3, n))
        ab[0, 1:] = -1.0 / (h * h)
        ab[2, :-1] = -1.0 / (h * h)
        ab[1] = 2.0 / (h * h) + pot.evaluate(prof, 2)
        end_shift = -1.0 if bc == "neumann0" else 1.0
        ab[1, 0] += end_shift / (h * h)
        ab[1, -1] += end_shift / (h * h)
        delta = solve_banded((1, 1), ab, -res)
        step = 1.0
        accepted = False
        for _ in range(31):
            trial = prof + step * delta
            if float(np.max(np.abs(trial))) < 1.0:
                tres = residual(trial)
                tn = float(np.max(np.abs(tres)))
                if tn < rn:
                    prof, res, rn = trial, tres, tn
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            raise SolverFailure(
                f"equilibrium profile Newton stalled at residual {rn:.3e} "
                f"after {it} iterations"
            )
    if rn > newton_tol:
        raise SolverFailure(
            f"equilibrium profile Newton did not reach residual {newton_tol:g} "
            f"in {max_newton} iterations (got {rn:.3e})"
        )
    logger.info("equilibrium profile converged, residual %.3e", rn)

    psi_line = _ghost_fill_1d(prof, bc, pinned)
    p_line = _hydrostatic_pressure(prof, psi_line, h, p)
    return _extrude(grid, psi_line, p_line)


def _hydrostatic_pressure(prof, psi_line, h, p: Params):
    """Cell pressures whose face differences balance the profile forces.

    Integrates minus (face-averaged curvature times face gradient plus
    gravity times face-averaged density) upward from the bottom cell,
    then removes the mean.
    """
    n = prof.size
    lap = (psi_line[1:-3] - 2.0 * prof + psi_line[3:-1]) / (h * h)
    rho = extend_density(prof, 0, p)
    pressure = np.zeros(n)
    for j in range(1, n):
        lap_f = 0.5 * (lap[j] + lap[j - 1])
        grad_f = (prof[j] - prof[j - 1]) / h
        rho_f = 0.5 * (rho[j] + rho[j - 1])
        pressure[j] = pressure[j - 1] - h * (lap_f * grad_f + p.g * rho_f)
    pressure -= pressure.mean()
    out = np.empty(n + 2 * G)
    out[G:-G] = pressure
    out[1] = pressure[0]
    out[0] = pressure[1]
    out[-2] = pressure[-1]
    out[-1] = pressure[-2]
    return out


def _extrude(grid: Grid, psi_line: np.ndarray, p_line: np.ndarray) -> Equilibrium:
    """Broadcast padded vertical lines to full padded fields.

    The profile is constant along every horizontal axis, so the same
    values serve as periodic wraps and reflection ghosts alike.
    """
    nd = grid.dim
    shape = tuple(1 for _ in range(nd - 1)) + (psi_line.size,)
    psi_pad = np.broadcast_to(psi_line.reshape(shape), _pad_shape(grid)).copy()
    p_pad = np.broadcast_to(p_line.reshape(shape), _pad_shape(grid)).copy()
    psi = ScalarField(grid, "none", psi_pad)
    p_star = ScalarField(grid, "neumann0", p_pad)
    return make_equilibrium(psi, p_star)


def _pad_shape(grid: Grid):
    return tuple(n + 2 * G for n in grid.cells)


def uniform_equilibrium(grid: Grid, p: Params, value: float = 0.0) -> Equilibrium:
    """Constant-profile equilibrium with its hydrostatic pressure.

    Any constant inside (-1, 1) is stationary; the matching pressure
    is linear in height with slope minus gravity times the mixture
    density.
    """
    if not -1.0 < value < 1.0:
        raise ConfigError(f"uniform profile value {value} outside (-1, 1)")
    axis = grid.vertical_axis
    n = grid.cells[axis]
    h = grid.spacing[axis]
    prof = np.full(n, float(value))
    psi_line = _ghost_fill_1d(prof, "neumann0", None)
    p_line = _hydrostatic_pressure(prof, psi_line, h, p)
    return _extrude(grid, psi_line, p_line)


def rt_condition_check(eq: Equilibrium):
    """Instability condition: does the profile increase with height?

    Returns ``(flag, height)`` where the flag is true iff the discrete
    vertical derivative is positive at some interior face, and the
    height locates the strongest such face (None when absent). With an
    increasing density interpolant this is exactly the heavy-above-
    light condition.
    """
    grid = eq.psi.grid
    axis = grid.vertical_axis
    grad = eq.grad_psi[axis]
    sl = [slice(None)] * grid.dim
    sl[axis] = slice(1, -1)
    inner = grad[tuple(sl)]
    # profiles that are constant up to solver noise must not register,
    # so positivity is judged against the profile scale
    floor = 1e-10 * max(1.0, eq.psi_linf)
    if inner.size == 0 or float(np.max(inner)) <= floor:
        return False, None
    flat = int(np.argmax(inner))
    j = np.unravel_index(flat, inner.shape)[axis] + 1
    return True, float(j * grid.spacing[axis])


def _horizontal_mode(grid: Grid, mode: int) -> np.ndarray:
    x = grid.cell_centers(0)
    return np.cos(2.0 * np.pi * mode * x / grid.extents[0])


def _rt_shape(grid: Grid, eq: Equilibrium, cfg: ScenarioConfig) -> np.ndarray:
    """Unit-amplitude interface-displacement perturbation on cells.

    The vertical envelope is the normalized derivative of the
    equilibrium profile, so to first order the seed translates the
    interface up and down along the horizontal cosine instead of
    deforming its thickness. A translation is the slowest-relaxing
    deformation of the profile, which is what buoyancy must act on for
    the stratification dichotomy to show within a short horizon. When
    the profile is flat (uniform equilibrium) there is no interface to
    displace and a centered Gaussian of the configured width stands in.
    """
    axis = grid.vertical_axis
    nd = grid.dim
    take = tuple(slice(None) if a == axis else 0 for a in range(nd))
    env = np.gradient(np.asarray(eq.psi.interior[take], dtype=float),
                      grid.spacing[axis])
    peak = float(np.max(np.abs(env)))
    if peak == 0.0:
        height = grid.extents[axis]
        center = (0.5 * height if cfg.interface_center is None
                  else cfg.interface_center)
        width = (0.05 * height if cfg.interface_width is None
                 else cfg.interface_width)
        s = (grid.cell_centers(axis) - center) / width
        env = np.exp(-0.5 * s * s)
        peak = float(np.max(env))
    mode = _horizontal_mode(grid, cfg.mode)
    vals = mode.reshape((-1,) + (1,) * (nd - 1))
    vals = vals * (env / peak).reshape((1,) * (nd - 1) + (-1,))
    return np.broadcast_to(vals, grid.cells).copy()


def rt_initial_data(
    grid: Grid, eq: Equilibrium, cfg: ScenarioConfig, phase_bc: str = "neumann0"
) -> State:
    """Zero velocity and pressure, one interface mode in the phase.

    The perturbation is a single horizontal cosine times the profile's
    vertical derivative, a discrete interface displacement. Its cell
    mean vanishes because the cosine averages to zero over the periodic
    width. The composite order parameter must stay strictly inside
    (-1, 1).
    """
    st = zero_state(grid, phase_bc)
    st.phi.interior[...] = cfg.amplitude * _rt_shape(grid, eq, cfg)
    apply_bc(st.phi)
    _check_composite(st, eq, cfg.amplitude)
    return st


def manufactured_initial_data(
    grid: Grid, eq: Equilibrium, cfg: ScenarioConfig, phase_bc: str = "neumann0"
) -> State:
    """Smooth single-mode state for convergence studies.

    The phase perturbation is a cosine mode under a squared-sine
    vertical envelope (value and slope both vanish at the walls), and
    the velocity is the exact discrete solenoidal projection of a
    matching single-mode field, so the divergence-free constraint
    holds to solver precision from the first step.
    """
    axis = grid.vertical_axis
    height = grid.extents[axis]
    z = grid.cell_centers(axis)
    env = np.sin(np.pi * z / height) ** 2
    nd = grid.dim

    mode = _horizontal_mode(grid, cfg.mode)
    vals = cfg.amplitude * mode.reshape((-1,) + (1,) * (nd - 1))
    vals = vals * env.reshape((1,) * (nd - 1) + (-1,))
    st = zero_state(grid, phase_bc)
    st.phi.interior[...] = np.broadcast_to(vals, grid.cells)
    apply_bc(st.phi)

    m = st.v.interior(0).shape[0]
    xf = np.arange(m) * grid.spacing[0]
    u_mode = np.sin(2.0 * np.pi * cfg.mode * xf / grid.extents[0])
    u_vals = cfg.amplitude * u_mode.reshape((-1,) + (1,) * (nd - 1))
    u_vals = u_vals * env.reshape((1,) * (nd - 1) + (-1,))
    st.v.interior(0)[...] = np.broadcast_to(u_vals, st.v.interior(0).shape)
    apply_bc(st.v)
    st.v, _ = leray_project(st.v)
    _check_composite(st, eq, cfg.amplitude)
    return st


def make_initial_data(
    grid: Grid, eq: Equilibrium, cfg: ScenarioConfig, phase_bc: str = "neumann0"
) -> State:
    if cfg.scenario == "rayleigh_taylor":
        return rt_initial_data(grid, eq, cfg, phase_bc)
    if cfg.scenario == "manufactured":
        return manufactured_initial_data(grid, eq, cfg, phase_bc)
    raise ConfigError(
        "custom scenarios start from a snapshot file supplied to the driver, "
        "not from constructed initial data"
    )


def _check_composite(st: State, eq: Equilibrium, amplitude: float) -> None:
    comp = float(np.max(np.abs(st.phi.interior + eq.psi.interior)))
    if comp >= 1.0:
        raise ConfigError(
            f"amplitude {amplitude} drives the composite order parameter to "
            f"{comp:.6f} >= 1; reduce it or widen the regularization margin"
        )


def amplitude_for_linf(
    grid: Grid,
    eq: Equilibrium,
    cfg: ScenarioConfig,
    target: float,
    phase_bc: str = "neumann0",
) -> float:
    """Amplitude whose initial composite maximum hits the target.

    The composite maximum is continuous and nondecreasing in the
    amplitude, so a bisection between zero and a bracketing upper
    bound converges unconditionally. The target must exceed the
    profile's own maximum.
    """
    if not eq.psi_linf < target < 1.0:
        raise ConfigError(
            f"target {target} must lie strictly between the profile maximum "
            f"{eq.psi_linf:.6f} and 1"
        )
    if cfg.scenario != "rayleigh_taylor":
        raise ConfigError(
            f"amplitude targeting only applies to interface perturbations, "
            f"not scenario {cfg.scenario!r}"
        )
    unit = _rt_shape(grid, eq, cfg)
    peak = float(np.max(np.abs(unit)))
    if peak == 0.0:
        raise ConfigError("perturbation shape is identically zero")
    lo, hi = 0.0, (target + eq.psi_linf) / peak + 1e-6

    def measured(amp):
        return float(np.max(np.abs(amp * unit + eq.psi.interior)))

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if measured(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)
