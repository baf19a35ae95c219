"""Figures built from run diagnostics and snapshots.

Three views cover the quantities a two-phase run is judged by: the
energy budget over time with any spurious rises flagged, the
fixed-point contraction factor across a family of runs at different
step sizes, and a rendered order-parameter field with the interface
band marked. Everything here consumes the CSV and snapshot readers;
nothing recomputes physics.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .aggf import KIND_SCALAR, read_aggf
from .series import (energy_jumps, energy_tolerance, geometric_mean_ratio,
                     load_series)


def plot_energy(series_path, out_path, tol: float | None = None):
    """Plot the free, kinetic, and total energy of one run.

    Steps where the total energy rises by more than the tolerance are
    marked on the total-energy curve and counted in the title, so a
    non-dissipative step is visible at a glance.
    """
    frame = load_series(series_path)
    if tol is None:
        tol = energy_tolerance(frame)
    jumps = energy_jumps(frame, tol=tol)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(frame.t, frame.E_free, label="free energy")
    ax.plot(frame.t, frame.E_kin, label="kinetic energy")
    ax.plot(frame.t, frame.E_total, label="total", color="black", lw=1.8)
    if jumps.size:
        ax.plot(frame.t[jumps], frame.E_total[jumps], "rv", ms=7,
                label=f"energy rise > {tol:.2e}")
        ax.set_title(f"energy budget ({jumps.size} rise(s) above tolerance)")
    else:
        ax.set_title("energy budget (non-increasing within tolerance)")
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.legend(loc="best")
    fig.tight_layout()
    out_path = pathlib.Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def contraction_points(series_paths):
    """Per-run (dt, geometric-mean contraction ratio), sorted by dt."""
    pairs = []
    for path in series_paths:
        frame = load_series(path)
        pairs.append((frame.step_size(), geometric_mean_ratio(frame)))
    pairs.sort()
    dts = np.asarray([p[0] for p in pairs])
    means = np.asarray([p[1] for p in pairs])
    return dts, means


def plot_contraction(series_paths, out_path):
    """Plot the mean contraction factor against the time-step size.

    The iteration's contraction factor shrinks with the step size, so
    a family of otherwise identical runs should trace a decreasing
    curve on these log axes. The figure states whether the measured
    points actually decrease.
    """
    paths = list(series_paths)
    if len(paths) < 2:
        raise ValueError("contraction plot needs at least two runs")
    dts, means = contraction_points(paths)
    decreasing = bool(np.all(np.diff(means) > 0.0))
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.loglog(dts, means, "o-")
    for dt, mean in zip(dts, means):
        ax.annotate(f"{mean:.3g}", (dt, mean), textcoords="offset points",
                    xytext=(6, 6), fontsize=8)
    verdict = ("contraction improves monotonically with smaller steps"
               if decreasing else
               "contraction is NOT monotone across these runs")
    ax.set_title(verdict)
    ax.set_xlabel("time-step size")
    ax.set_ylabel("geometric mean contraction ratio")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    out_path = pathlib.Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_snapshot(aggf_path, out_path, delta: float = 0.02):
    """Render a scalar 2D snapshot with the phase interface marked.

    The field is shown on the solver's fixed [-1, 1] color scale. The
    order parameter saturates at 1 - delta deep inside each phase, so
    contours at both saturation levels bracket the diffuse interface
    band; each contour is drawn only if the data actually crosses it.
    The snapshot carries no coordinates, so axes are labeled in cells.
    """
    snap = read_aggf(aggf_path)
    if snap.kind != KIND_SCALAR:
        raise ValueError("interface rendering needs a scalar snapshot")
    if snap.ndim != 2:
        raise ValueError("interface rendering is implemented for 2D only")
    arr = snap.fields[0]
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    img = ax.imshow(arr.T, origin="lower", vmin=-1.0, vmax=1.0,
                    cmap="RdBu_r", aspect="auto",
                    extent=(0, arr.shape[0], 0, arr.shape[1]))
    for level in (-(1.0 - delta), 1.0 - delta):
        if arr.min() < level < arr.max():
            ax.contour(np.arange(arr.shape[0]) + 0.5,
                       np.arange(arr.shape[1]) + 0.5,
                       arr.T, levels=[level], colors="black",
                       linewidths=0.9)
    fig.colorbar(img, ax=ax, label="order parameter")
    ax.set_xlabel("cell index (horizontal)")
    ax.set_ylabel("cell index (vertical)")
    ax.set_title(f"phase field, interface band at |value| = {1 - delta:g}")
    fig.tight_layout()
    out_path = pathlib.Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
