"""Typed access to the solver's diagnostics series.

A run emits one CSV with a fixed eleven-column schema: time, the free
and kinetic energy split and their total, the conserved phase mean,
the worst velocity divergence, the sup-norm of the total order
parameter, and the per-step fixed-point iteration count, contraction
ratio, and final residuals. The column set and order are a published
interface, so the parser rejects any deviation rather than guessing;
downstream plots then never need defensive checks.
"""

import csv
import dataclasses
import math

import numpy as np

from .errors import SeriesSchemaError

SCHEMA = (
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

_INT_COLUMNS = ("picard_iters",)


@dataclasses.dataclass(frozen=True)
class SeriesFrame:
    """One run's diagnostics, one named array per column.

    Rows are time-ordered by construction: a frame with non-increasing
    time stamps is rejected, since every consumer (energy curves,
    contraction aggregation) assumes a single forward-marching run.
    """

    t: np.ndarray
    E_free: np.ndarray
    E_kin: np.ndarray
    E_total: np.ndarray
    mass: np.ndarray
    max_div: np.ndarray
    linf_phi_tot: np.ndarray
    picard_iters: np.ndarray
    picard_ratio_geo: np.ndarray
    mom_residual: np.ndarray
    div_residual: np.ndarray

    def __post_init__(self):
        n = len(self.t)
        if n == 0:
            raise SeriesSchemaError("series has no data rows")
        for name in SCHEMA:
            if len(getattr(self, name)) != n:
                raise SeriesSchemaError(
                    f"column {name!r} has {len(getattr(self, name))} rows, "
                    f"expected {n}")
        if not np.all(np.diff(self.t) > 0.0):
            raise SeriesSchemaError("time stamps must increase strictly")

    @property
    def n_rows(self) -> int:
        return len(self.t)

    def step_size(self) -> float:
        """Time-step size of the run, from the first two rows."""
        if self.n_rows < 2:
            raise SeriesSchemaError("need at least two rows to infer dt")
        return float(self.t[1] - self.t[0])


def load_series(path) -> SeriesFrame:
    """Parse a diagnostics CSV, enforcing the exact column schema."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SeriesSchemaError(f"{path}: empty file") from None
            rows = list(reader)
    except (UnicodeDecodeError, csv.Error):
        raise SeriesSchemaError(
            f"{path}: not a text file; a diagnostics series is "
            f"plain CSV") from None
    if tuple(header) != SCHEMA:
        raise SeriesSchemaError(
            f"{path}: header {header!r} does not match the published "
            f"schema {list(SCHEMA)!r}")
    if not rows:
        raise SeriesSchemaError(f"{path}: no data rows")
    columns = {name: [] for name in SCHEMA}
    for i, row in enumerate(rows, start=2):
        if len(row) != len(SCHEMA):
            raise SeriesSchemaError(
                f"{path}: line {i} has {len(row)} fields, expected "
                f"{len(SCHEMA)}")
        for name, cell in zip(SCHEMA, row):
            try:
                value = int(cell) if name in _INT_COLUMNS else float(cell)
            except ValueError:
                raise SeriesSchemaError(
                    f"{path}: line {i}, column {name!r}: "
                    f"unparseable value {cell!r}") from None
            columns[name].append(value)
    arrays = {
        name: np.asarray(vals,
                         dtype=np.int64 if name in _INT_COLUMNS else float)
        for name, vals in columns.items()
    }
    return SeriesFrame(**arrays)


def energy_tolerance(frame: SeriesFrame) -> float:
    """Allowed numerical wiggle on the total energy, scaled to the run."""
    return 1e-6 * (1.0 + abs(float(frame.E_total[0])))


def energy_jumps(frame: SeriesFrame, tol: float | None = None) -> np.ndarray:
    """Row indices where the total energy rose by more than tol.

    The discrete scheme dissipates the free plus kinetic energy up to
    round-off in force-free runs, so any rise beyond the scaled
    tolerance marks either an instability or external work (a gravity
    release does real work on the flow and legitimately shows up
    here). Returns the indices of the offending rows.
    """
    if tol is None:
        tol = energy_tolerance(frame)
    rises = np.diff(frame.E_total)
    return np.nonzero(rises > tol)[0] + 1


def geometric_mean_ratio(frame: SeriesFrame) -> float:
    """Geometric mean of the per-step contraction ratios of one run.

    The first row describes the initial state and carries no iteration,
    so NaN and non-positive entries are skipped. A run whose remaining
    ratios are all missing has nothing to aggregate and is rejected.
    """
    r = frame.picard_ratio_geo
    good = r[np.isfinite(r) & (r > 0.0)]
    if good.size == 0:
        raise ValueError("series records no usable contraction ratios")
    return float(math.exp(np.mean(np.log(good))))
