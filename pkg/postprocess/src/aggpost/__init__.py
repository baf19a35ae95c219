"""Post-processing for two-phase flow runs.

The solver communicates with this package through files only: a
diagnostics CSV with a fixed column schema and binary field snapshots
with a fixed byte layout. This package parses both formats
independently, validates them strictly, and turns them into the
standard figures (energy budget, contraction study, interface
rendering). It never imports the solver and never recomputes physics,
so it doubles as an end-to-end check that the published file formats
are complete.
"""

from .aggf import KIND_SCALAR, KIND_VECTOR, MAGIC, VERSION, Snapshot, read_aggf
from .errors import SeriesSchemaError, SnapshotFormatError
from .plots import (contraction_points, plot_contraction, plot_energy,
                    render_snapshot)
from .series import (SCHEMA, SeriesFrame, energy_jumps, energy_tolerance,
                     geometric_mean_ratio, load_series)

__version__ = "0.1.0"

__all__ = [
    "KIND_SCALAR",
    "KIND_VECTOR",
    "MAGIC",
    "SCHEMA",
    "SeriesFrame",
    "SeriesSchemaError",
    "Snapshot",
    "SnapshotFormatError",
    "VERSION",
    "contraction_points",
    "energy_jumps",
    "energy_tolerance",
    "geometric_mean_ratio",
    "load_series",
    "plot_contraction",
    "plot_energy",
    "read_aggf",
    "render_snapshot",
]
