"""Run configuration: strict JSON mapped onto solver types.

A run file has exactly seven sections (domain, physics, time, picard,
solver, scenario, output). Unknown keys anywhere are hard errors so a
typo cannot silently fall back to a default, and parsing a serialized
configuration reproduces it field by field. The phase boundary
condition is chosen by the single letter D or N, mirroring the two
problem variants the solver supports: essential (value and curvature
pinned) versus natural (flux-free) conditions.
"""

import dataclasses
import json

from .errors import ConfigError
from .materials import Params
from .picard import PicardConfig, TimeConfig
from .scenarios import ScenarioConfig

__all__ = [
    "RunConfig",
    "parse_config",
    "load_config",
    "serialize_config",
    "default_run_dict",
    "default_config",
]

_PHASE_BC = {"D": "dirichlet0", "N": "neumann0"}
_PHASE_BC_BACK = {v: k for k, v in _PHASE_BC.items()}
_FORMATS = ("csv", "aggf")


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Validated run description.

    ``phase_bc`` is stored in internal form (``dirichlet0`` or
    ``neumann0``). ``pinned_values``, ``mu_level`` and ``mu_slope``
    feed the background profile builder; ``initial_snapshot`` supplies
    the starting perturbation for the custom scenario.
    """

    extents: tuple
    cells: tuple
    horizontal_bc: tuple
    phase_bc: str
    params: Params
    freeze_velocity: bool
    time: TimeConfig
    picard: PicardConfig
    scenario: ScenarioConfig
    mu_level: float
    mu_slope: float
    pinned_values: tuple | None
    initial_snapshot: str | None
    out_dir: str
    formats: tuple

    def domain_dict(self) -> dict:
        return {
            "extents": list(self.extents),
            "cells": list(self.cells),
            "horizontal_bc": list(self.horizontal_bc),
        }


def _section(raw: dict, name: str, allowed: dict, required: tuple):
    """Extract one section with defaults, rejecting unknown keys."""
    if name not in raw:
        raise ConfigError(f"missing section {name!r}")
    sec = raw[name]
    if not isinstance(sec, dict):
        raise ConfigError(f"section {name!r} must be an object")
    unknown = set(sec) - set(allowed)
    if unknown:
        raise ConfigError(
            f"unknown key {sorted(unknown)[0]!r} in section {name!r}"
        )
    missing = [k for k in required if k not in sec]
    if missing:
        raise ConfigError(f"missing key {missing[0]!r} in section {name!r}")
    out = dict(allowed)
    out.update(sec)
    return out


def _number(val, name, positive=False):
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{name} must be a number, got {val!r}")
    if positive and not val > 0:
        raise ConfigError(f"{name} must be positive, got {val}")
    return float(val)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"configuration is not valid JSON: {err}") from err
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a JSON object")
    unknown = set(raw) - {
        "domain", "physics", "time", "picard", "solver", "scenario", "output"
    }
    if unknown:
        raise ConfigError(f"unknown section {sorted(unknown)[0]!r}")

    dom = _section(raw, "domain", {
        "extents": None, "cells": None, "horizontal_bc": "periodic",
        "phase_bc": None,
    }, required=("extents", "cells", "phase_bc"))
    extents = dom["extents"]
    cells = dom["cells"]
    if not (isinstance(extents, list) and isinstance(cells, list)
            and len(extents) == len(cells) and len(extents) in (2, 3)):
        raise ConfigError("domain extents and cells must be lists of equal "
                          "length 2 or 3")
    extents = tuple(_number(v, "domain.extents entry", positive=True)
                    for v in extents)
    for n in cells:
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ConfigError(f"domain.cells entries must be positive "
                              f"integers, got {n!r}")
    cells = tuple(int(n) for n in cells)
    hbc = dom["horizontal_bc"]
    if isinstance(hbc, str):
        hbc = [hbc] * (len(cells) - 1)
    if not (isinstance(hbc, list) and len(hbc) == len(cells) - 1
            and all(b in ("periodic", "wall") for b in hbc)):
        raise ConfigError("domain.horizontal_bc must be 'periodic' or 'wall' "
                          "(one value, or one per horizontal axis)")
    if dom["phase_bc"] not in _PHASE_BC:
        raise ConfigError(
            f"domain.phase_bc must be 'D' or 'N', got {dom['phase_bc']!r}"
        )
    phase_bc = _PHASE_BC[dom["phase_bc"]]

    phys = _section(raw, "physics", {
        "rho1": None, "rho2": None, "nu1": None, "nu2": None, "g": None,
        "theta": None, "theta0": None, "delta": None,
        "freeze_velocity": False,
    }, required=("rho1", "rho2", "nu1", "nu2", "g", "theta", "theta0",
                 "delta"))
    if not isinstance(phys["freeze_velocity"], bool):
        raise ConfigError("physics.freeze_velocity must be true or false")
    try:
        params = Params(
            rho1=_number(phys["rho1"], "physics.rho1"),
            rho2=_number(phys["rho2"], "physics.rho2"),
            nu1=_number(phys["nu1"], "physics.nu1"),
            nu2=_number(phys["nu2"], "physics.nu2"),
            g=_number(phys["g"], "physics.g"),
            theta=_number(phys["theta"], "physics.theta"),
            theta0=_number(phys["theta0"], "physics.theta0"),
            delta=_number(phys["delta"], "physics.delta"),
        )
    except ValueError as err:
        raise ConfigError(f"physics: {err}") from err

    tim = _section(raw, "time", {
        "dt": None, "t_end": None, "snapshot_every": 0,
    }, required=("dt", "t_end"))
    se = tim["snapshot_every"]
    if isinstance(se, bool) or not isinstance(se, int) or se < 0:
        raise ConfigError("time.snapshot_every must be a nonnegative integer")
    time_cfg = TimeConfig(
        dt=_number(tim["dt"], "time.dt", positive=True),
        t_end=_number(tim["t_end"], "time.t_end", positive=True),
        snapshot_every=se,
    )

    pic = _section(raw, "picard", {
        "tol": 1e-8, "max_iters": 40,
    }, required=())
    sol = _section(raw, "solver", {
        "mom_tol": 1e-9, "div_tol": 1e-9, "max_outer": 200,
    }, required=())
    mi = pic["max_iters"]
    mo = sol["max_outer"]
    for name, val in (("picard.max_iters", mi), ("solver.max_outer", mo)):
        if isinstance(val, bool) or not isinstance(val, int) or val < 1:
            raise ConfigError(f"{name} must be a positive integer")
    picard_cfg = PicardConfig(
        tol=_number(pic["tol"], "picard.tol", positive=True),
        max_iters=mi,
        mom_tol=_number(sol["mom_tol"], "solver.mom_tol", positive=True),
        div_tol=_number(sol["div_tol"], "solver.div_tol", positive=True),
        max_outer=mo,
        freeze_velocity=phys["freeze_velocity"],
    )

    sce = _section(raw, "scenario", {
        "scenario": "rayleigh_taylor", "amplitude": 0.05, "mode": 1,
        "interface_center": None, "interface_width": None,
        "orientation": "heavy_on_top", "mu_level": 0.0, "mu_slope": 0.0,
        "pinned_values": None, "initial_snapshot": None,
    }, required=())
    mode = sce["mode"]
    if isinstance(mode, bool) or not isinstance(mode, int):
        raise ConfigError("scenario.mode must be an integer")
    scenario_cfg = ScenarioConfig(
        scenario=sce["scenario"],
        amplitude=_number(sce["amplitude"], "scenario.amplitude"),
        mode=mode,
        interface_center=(None if sce["interface_center"] is None else
                          _number(sce["interface_center"],
                                  "scenario.interface_center")),
        interface_width=(None if sce["interface_width"] is None else
                         _number(sce["interface_width"],
                                 "scenario.interface_width")),
        orientation=sce["orientation"],
    )
    pv = sce["pinned_values"]
    if pv is not None:
        if not (isinstance(pv, list) and len(pv) == 2):
            raise ConfigError("scenario.pinned_values must be a pair")
        pv = tuple(_number(v, "scenario.pinned_values entry") for v in pv)
    snap = sce["initial_snapshot"]
    if snap is not None and not isinstance(snap, str):
        raise ConfigError("scenario.initial_snapshot must be a path string")
    if scenario_cfg.scenario == "custom" and snap is None:
        raise ConfigError(
            "the custom scenario needs scenario.initial_snapshot"
        )

    out = _section(raw, "output", {
        "directory": "out", "formats": ["csv", "aggf"],
    }, required=())
    if not isinstance(out["directory"], str) or not out["directory"]:
        raise ConfigError("output.directory must be a nonempty string")
    fmts = out["formats"]
    if not (isinstance(fmts, list) and fmts
            and all(f in _FORMATS for f in fmts)):
        raise ConfigError(
            f"output.formats must be a nonempty list drawn from {_FORMATS}"
        )

    return RunConfig(
        extents=extents,
        cells=cells,
        horizontal_bc=tuple(hbc),
        phase_bc=phase_bc,
        params=params,
        freeze_velocity=phys["freeze_velocity"],
        time=time_cfg,
        picard=picard_cfg,
        scenario=scenario_cfg,
        mu_level=_number(sce["mu_level"], "scenario.mu_level"),
        mu_slope=_number(sce["mu_slope"], "scenario.mu_slope"),
        pinned_values=pv,
        initial_snapshot=snap,
        out_dir=out["directory"],
        formats=tuple(dict.fromkeys(fmts)),
    )


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read configuration {path}: {err}") from err
    return parse_config(text)


def serialize_config(cfg: RunConfig) -> str:
    """Emit JSON that parses back to an identical RunConfig."""
    doc = {
        "domain": {
            "extents": list(cfg.extents),
            "cells": list(cfg.cells),
            "horizontal_bc": list(cfg.horizontal_bc),
            "phase_bc": _PHASE_BC_BACK[cfg.phase_bc],
        },
        "physics": {
            "rho1": cfg.params.rho1,
            "rho2": cfg.params.rho2,
            "nu1": cfg.params.nu1,
            "nu2": cfg.params.nu2,
            "g": cfg.params.g,
            "theta": cfg.params.theta,
            "theta0": cfg.params.theta0,
            "delta": cfg.params.delta,
            "freeze_velocity": cfg.freeze_velocity,
        },
        "time": {
            "dt": cfg.time.dt,
            "t_end": cfg.time.t_end,
            "snapshot_every": cfg.time.snapshot_every,
        },
        "picard": {
            "tol": cfg.picard.tol,
            "max_iters": cfg.picard.max_iters,
        },
        "solver": {
            "mom_tol": cfg.picard.mom_tol,
            "div_tol": cfg.picard.div_tol,
            "max_outer": cfg.picard.max_outer,
        },
        "scenario": {
            "scenario": cfg.scenario.scenario,
            "amplitude": cfg.scenario.amplitude,
            "mode": cfg.scenario.mode,
            "interface_center": cfg.scenario.interface_center,
            "interface_width": cfg.scenario.interface_width,
            "orientation": cfg.scenario.orientation,
            "mu_level": cfg.mu_level,
            "mu_slope": cfg.mu_slope,
            "pinned_values": (None if cfg.pinned_values is None
                              else list(cfg.pinned_values)),
            "initial_snapshot": cfg.initial_snapshot,
        },
        "output": {
            "directory": cfg.out_dir,
            "formats": list(cfg.formats),
        },
    }
    return json.dumps(doc, indent=2)


def default_run_dict() -> dict:
    """The stock two-phase overturn setup: a deep double well whose
    kink fits the default box, heavy phase on top, natural phase
    conditions, and snapshots every ten steps. The box is wide relative
    to its height so that the seeded interface mode sits at a low
    wavenumber, where buoyant growth outruns the diffusive relaxation
    of the interface."""
    return {
        "domain": {
            "extents": [4.0, 2.0],
            "cells": [64, 128],
            "horizontal_bc": "periodic",
            "phase_bc": "N",
        },
        "physics": {
            "rho1": 3.0,
            "rho2": 1.0,
            "nu1": 0.01,
            "nu2": 0.005,
            "g": 1000.0,
            "theta": 4.0,
            "theta0": 8.0,
            "delta": 0.02,
        },
        "time": {"dt": 1e-3, "t_end": 0.05, "snapshot_every": 10},
        "picard": {"tol": 1e-8, "max_iters": 40},
        "solver": {"mom_tol": 1e-9, "div_tol": 1e-9, "max_outer": 200},
        "scenario": {"scenario": "rayleigh_taylor", "amplitude": 0.05},
        "output": {"directory": "out", "formats": ["csv", "aggf"]},
    }


def default_config() -> RunConfig:
    return parse_config(json.dumps(default_run_dict()))
