"""Command-line driver: configuration, orchestration, file output.

Three subcommands cover the artifact surface. ``run`` integrates a
configured scenario and writes the diagnostics series plus total
order-parameter snapshots. ``equilibrium`` builds only the background
profile and hydrostatic pressure and writes them as snapshots.
``verify`` executes one of the named property suites and reports one
machine-readable PASS/FAIL line per check.

Exit codes are distinct by failure class so batch scripts can branch
on them: 0 clean, 1 unexpected error, 2 configuration rejected,
3 fixed-point divergence, 4 order-parameter regime excursion,
5 inner solver failure.
"""

import argparse
import logging
import pathlib
import sys

from .config import default_config, load_config
from .errors import (
    ConfigError,
    PicardDivergenceError,
    RegimeExcursionError,
    SolverFailure,
)
from .diagnostics import csv_header
from .grid import ScalarField, make_grid, read_snapshot, write_snapshot
from .materials import build_regularized_potential
from .picard import time_integrate, zero_state
from .scenarios import (
    equilibrium_profile,
    make_initial_data,
    rt_condition_check,
    uniform_equilibrium,
)

__all__ = [
    "main",
    "EXIT_OK",
    "EXIT_UNEXPECTED",
    "EXIT_CONFIG",
    "EXIT_PICARD_DIVERGENCE",
    "EXIT_REGIME",
    "EXIT_SOLVER",
]

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_PICARD_DIVERGENCE = 3
EXIT_REGIME = 4
EXIT_SOLVER = 5

# Instrumentation seam: tests and profiling scripts may install a
# callable(step, state, report) here; the run loop invokes it after
# every accepted step. Leave None in production use.
step_instrument = None


def _dispatch_instrument(step, state, report):
    if step_instrument is not None:
        step_instrument(step, state, report)


def _build_equilibrium(grid, cfg, pot):
    if cfg.scenario.scenario == "manufactured":
        return uniform_equilibrium(grid, cfg.params, 0.0)
    return equilibrium_profile(
        grid,
        cfg.params,
        pot,
        cfg.phase_bc,
        interface_center=cfg.scenario.interface_center,
        interface_width=cfg.scenario.interface_width,
        orientation=cfg.scenario.orientation,
        mu_level=cfg.mu_level,
        mu_slope=cfg.mu_slope,
        pinned_values=cfg.pinned_values,
    )


def _build_initial_state(grid, eq, cfg):
    if cfg.scenario.scenario != "custom":
        return make_initial_data(grid, eq, cfg.scenario, cfg.phase_bc)
    try:
        snap = read_snapshot(cfg.initial_snapshot)
    except (OSError, ValueError) as err:
        raise ConfigError(f"initial snapshot: {err}") from err
    if snap.kind != 0:
        raise ConfigError("initial snapshot must hold a scalar field")
    if snap.cells != grid.cells:
        raise ConfigError(
            f"initial snapshot cells {snap.cells} do not match the "
            f"configured grid {grid.cells}"
        )
    state = zero_state(grid, cfg.phase_bc)
    state.phi.interior[...] = snap.arrays[0] - eq.psi.interior
    return state


def _composite_field(state, eq) -> ScalarField:
    """Total order parameter (perturbation plus background) for output."""
    return ScalarField.from_interior(
        state.phi.grid, state.phi.interior + eq.psi.interior, "none"
    )


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    out_dir = pathlib.Path(args.out) if args.out else pathlib.Path(cfg.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise ConfigError(f"cannot create output directory: {err}") from err

    grid = make_grid(cfg.domain_dict())
    pot = build_regularized_potential(cfg.params)
    eq = _build_equilibrium(grid, cfg, pot)
    if cfg.scenario.scenario == "rayleigh_taylor":
        unstable, height = rt_condition_check(eq)
        if unstable:
            logger.info(
                "density gradient opposes gravity near height %.4f; "
                "interface perturbations are expected to grow", height,
            )
        else:
            logger.info("background stratification is stable; interface "
                        "perturbations are expected to decay")
    state = _build_initial_state(grid, eq, cfg)

    series_path = out_dir / "series.csv"
    series_fh = None
    steps_done = 0
    snaps_written = 0

    def record_sink(record):
        if series_fh is not None:
            series_fh.write(record.csv_row() + "\n")

    def snapshot_sink(step, snap_state):
        nonlocal snaps_written
        path = out_dir / f"phi_total_{step:06d}.aggf"
        write_snapshot(path, _composite_field(snap_state, eq))
        snaps_written += 1
        logger.info("wrote %s", path)

    def counting_hook(step, hook_state, report):
        nonlocal steps_done
        steps_done = step
        _dispatch_instrument(step, hook_state, report)

    want_snaps = "aggf" in cfg.formats
    try:
        if "csv" in cfg.formats:
            series_fh = open(series_path, "w", encoding="utf-8", newline="")
            series_fh.write(csv_header() + "\n")
        if want_snaps:
            snapshot_sink(0, state)
        final = time_integrate(
            state, eq, cfg.params, pot, cfg.time, cfg.picard,
            record_sink=record_sink,
            snapshot_sink=snapshot_sink if want_snaps else None,
            step_hook=counting_hook,
        )
    finally:
        if series_fh is not None:
            series_fh.close()

    print(
        f"run complete: {steps_done} steps to t = {final.t:.6g}, "
        f"{snaps_written} snapshots in {out_dir}"
    )
    return EXIT_OK


def _cmd_equilibrium(args) -> int:
    cfg = load_config(args.config)
    out_dir = pathlib.Path(args.out) if args.out else pathlib.Path(cfg.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise ConfigError(f"cannot create output directory: {err}") from err
    grid = make_grid(cfg.domain_dict())
    pot = build_regularized_potential(cfg.params)
    eq = _build_equilibrium(grid, cfg, pot)
    write_snapshot(out_dir / "psi.aggf", eq.psi)
    write_snapshot(out_dir / "p_star.aggf", eq.p_star)
    print(
        f"equilibrium written: psi sup-norm {eq.psi_linf:.6f}, "
        f"files in {out_dir}"
    )
    return EXIT_OK


def _cmd_verify(args) -> int:
    from . import verify

    cfg = load_config(args.config) if args.config else default_config()
    result = verify.run_suite(args.suite, cfg)
    for line in result.lines:
        print(line)
    return EXIT_OK if result.passed else EXIT_UNEXPECTED


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="aggflow",
        description="Two-phase diffuse-interface flow solver "
                    "(perturbation form about a layered equilibrium).",
    )
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="integrate a configured scenario")
    run_p.add_argument("--config", required=True, help="JSON run file")
    run_p.add_argument("--out", default=None,
                       help="output directory (default: output.directory "
                            "from the config)")

    eq_p = sub.add_parser(
        "equilibrium",
        help="build and write only the background profile and pressure",
    )
    eq_p.add_argument("--config", required=True, help="JSON run file")
    eq_p.add_argument("--out", default=None,
                      help="output directory (default: output.directory "
                           "from the config)")

    ver_p = sub.add_parser("verify", help="run a property suite")
    ver_p.add_argument(
        "suite",
        choices=["potential", "operators", "korn", "convergence",
                 "contraction", "conservation"],
    )
    ver_p.add_argument("--config", default=None,
                       help="JSON run file (default: built-in stock setup)")
    return p


def main(argv=None) -> int:
    logging.basicConfig(
        level=logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "equilibrium":
            return _cmd_equilibrium(args)
        return _cmd_verify(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except PicardDivergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PICARD_DIVERGENCE
    except RegimeExcursionError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_REGIME
    except SolverFailure as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SOLVER
    except Exception:
        logger.exception("unexpected failure")
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
