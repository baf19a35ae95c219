"""Diffuse-interface two-phase flow on staggered grids.

The package advances a perturbation of a stratified two-fluid
equilibrium: an incompressible momentum balance with phase-dependent
density and viscosity, coupled to fourth-order phase dynamics driven
by a regularized logarithmic potential, stepped implicitly with a
per-step fixed-point iteration. Import the pieces from here or run
the ``aggflow`` command line for configured runs, equilibrium output,
and the runtime verification suites.
"""

from .config import (
    RunConfig,
    default_config,
    default_run_dict,
    load_config,
    parse_config,
    serialize_config,
)
from .errors import (
    ConfigError,
    PicardDivergenceError,
    RegimeExcursionError,
    SolverFailure,
)
from .grid import (
    Grid,
    ScalarField,
    Snapshot,
    VectorField,
    apply_bc,
    h1_seminorm,
    h2_seminorm,
    l2_norm,
    linf_norm,
    make_grid,
    read_snapshot,
    write_snapshot,
)
from .materials import (
    Params,
    RegularizedPotential,
    build_regularized_potential,
    extend_density,
    extend_viscosity,
    flory_huggins,
)
from .operators import (
    advect,
    divergence,
    gradient,
    laplacian,
    leray_project,
    stress_div,
    sym_grad,
    tensor_norm,
)
from .picard import (
    PicardConfig,
    State,
    TimeConfig,
    picard_solve,
    time_integrate,
    vstar_seminorm,
    zero_state,
)
from .scenarios import (
    Equilibrium,
    ScenarioConfig,
    amplitude_for_linf,
    equilibrium_profile,
    make_initial_data,
    rt_condition_check,
    uniform_equilibrium,
)
from .solvers import StokesReport, StokesSolveSpec, phase_step, stokes_step
from .spectral import biharmonic_helmholtz_solve, poisson_solve

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Equilibrium",
    "Grid",
    "Params",
    "PicardConfig",
    "PicardDivergenceError",
    "RegimeExcursionError",
    "RegularizedPotential",
    "RunConfig",
    "ScalarField",
    "ScenarioConfig",
    "Snapshot",
    "SolverFailure",
    "State",
    "StokesReport",
    "StokesSolveSpec",
    "TimeConfig",
    "VectorField",
    "advect",
    "amplitude_for_linf",
    "apply_bc",
    "biharmonic_helmholtz_solve",
    "build_regularized_potential",
    "default_config",
    "default_run_dict",
    "divergence",
    "equilibrium_profile",
    "extend_density",
    "extend_viscosity",
    "flory_huggins",
    "gradient",
    "h1_seminorm",
    "h2_seminorm",
    "l2_norm",
    "laplacian",
    "leray_project",
    "linf_norm",
    "load_config",
    "make_grid",
    "make_initial_data",
    "parse_config",
    "phase_step",
    "picard_solve",
    "poisson_solve",
    "read_snapshot",
    "rt_condition_check",
    "serialize_config",
    "stokes_step",
    "stress_div",
    "sym_grad",
    "tensor_norm",
    "time_integrate",
    "uniform_equilibrium",
    "vstar_seminorm",
    "write_snapshot",
    "zero_state",
]
