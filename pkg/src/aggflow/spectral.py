"""Fast diagonalization of the discrete Laplacian on the box.

Every wall or periodic axis of the grid pairs its ghost convention
with a classical trigonometric basis that diagonalizes the 1D
three-point second-difference operator exactly:

* odd reflection through wall faces (cell samples): sine modes with
  eigenvalues 4 sin^2(pi k / 2n) / h^2 for k = 1..n;
* even reflection (cell samples): cosine modes, k = 0..n-1, with the
  same eigenvalue formula and a zero eigenvalue at k = 0;
* pinned wall nodes (face samples of the wall-normal velocity):
  interior sine modes on the n-1 free faces, k = 1..n-1;
* periodic axes: Fourier modes with eigenvalues 4 sin^2(pi k / n) / h^2.

Because the eigenbasis matches the ghost rules bitwise, applying the
stencil Laplacian to a transform-space solve leaves only rounding
error, which is what lets the projection and phase solves meet their
residual targets without iteration. Multi-axis operators diagonalize
as Kronecker sums of the per-axis tables.

Solvers offered here: the Poisson solve for minus the Laplacian under
either scalar BC flavor (used directly and inside the projection and
pressure updates), and the shifted biharmonic solve
(I + dt Laplacian^2) u = rhs that advances the implicit fourth-order
phase update in one pass. For pure Neumann or periodic layouts the
Poisson problem is singular on constants; the solve enforces the
compatibility condition and returns the zero-mean solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .grid import Grid, ScalarField, apply_bc, l2_norm

__all__ = [
    "EigenSolver",
    "make_eigen_solver",
    "poisson_solve",
    "biharmonic_helmholtz_solve",
]

_WALL_FLAVORS = ("dirichlet0", "neumann0", "dirichlet_node")


def _axis_eigenvalues(flavor: str, n_cells: int, h: float, count: int) -> np.ndarray:
    if flavor == "dirichlet0":
        k = np.arange(1, n_cells + 1)
        return 4.0 * np.sin(np.pi * k / (2.0 * n_cells)) ** 2 / h**2
    if flavor == "neumann0":
        k = np.arange(n_cells)
        return 4.0 * np.sin(np.pi * k / (2.0 * n_cells)) ** 2 / h**2
    if flavor == "dirichlet_node":
        k = np.arange(1, n_cells)
        return 4.0 * np.sin(np.pi * k / (2.0 * n_cells)) ** 2 / h**2
    if flavor == "periodic":
        k = np.arange(count)
        return 4.0 * np.sin(np.pi * k / n_cells) ** 2 / h**2
    raise ValueError(f"unknown transform flavor {flavor!r}")


@dataclass(frozen=True)
class EigenSolver:
    """Per-axis transform plan and eigenvalue tables for one sample layout.

    ``flavors`` names the 1D basis per axis: ``dirichlet0`` and
    ``neumann0`` for cell-centered samples on wall axes,
    ``dirichlet_node`` for the interior face samples of a wall-normal
    velocity component, and ``periodic`` for wrap axes. The sample
    count per axis follows from the flavor: n cells, or n-1 interior
    nodes for ``dirichlet_node``.
    """

    grid: Grid
    flavors: tuple[str, ...]

    def __post_init__(self):
        if len(self.flavors) != self.grid.dim:
            raise ValueError("one transform flavor per axis required")
        for axis, flavor in enumerate(self.flavors):
            if self.grid.periodic[axis] != (flavor == "periodic"):
                raise ValueError(
                    f"axis {axis}: flavor {flavor!r} inconsistent with periodicity"
                )

    @property
    def sample_counts(self) -> tuple[int, ...]:
        out = []
        for axis, flavor in enumerate(self.flavors):
            n = self.grid.cells[axis]
            out.append(n - 1 if flavor == "dirichlet_node" else n)
        return tuple(out)

    @property
    def _periodic_axes(self) -> tuple[int, ...]:
        return tuple(a for a, f in enumerate(self.flavors) if f == "periodic")

    @property
    def _wall_axes(self) -> tuple[int, ...]:
        return tuple(a for a, f in enumerate(self.flavors) if f != "periodic")

    def spectral_shape(self) -> tuple[int, ...]:
        shape = list(self.sample_counts)
        paxes = self._periodic_axes
        if paxes:
            last = paxes[-1]
            shape[last] = shape[last] // 2 + 1
        return tuple(shape)

    def axis_eigenvalues(self, axis: int) -> np.ndarray:
        count = self.spectral_shape()[axis]
        return _axis_eigenvalues(
            self.flavors[axis], self.grid.cells[axis], self.grid.spacing[axis], count
        )

    def laplacian_symbol(self) -> np.ndarray:
        """Kronecker-sum eigenvalues of minus the Laplacian, per mode."""
        shape = self.spectral_shape()
        lam = np.zeros(shape)
        for axis in range(self.grid.dim):
            table = self.axis_eigenvalues(axis)
            view = [1] * self.grid.dim
            view[axis] = table.size
            lam = lam + table.reshape(view)
        return lam

    def forward(self, values: np.ndarray) -> np.ndarray:
        if values.shape != self.sample_counts:
            raise ValueError(
                f"expected shape {self.sample_counts}, got {values.shape}"
            )
        out = values
        for axis in self._wall_axes:
            flavor = self.flavors[axis]
            if flavor == "dirichlet0":
                out = sfft.dst(out, type=2, axis=axis, norm="ortho")
            elif flavor == "neumann0":
                out = sfft.dct(out, type=2, axis=axis, norm="ortho")
            else:
                out = sfft.dst(out, type=1, axis=axis, norm="ortho")
        paxes = self._periodic_axes
        if paxes:
            out = sfft.rfftn(out, axes=paxes, norm="ortho")
        return out

    def inverse(self, coeffs: np.ndarray) -> np.ndarray:
        out = coeffs
        paxes = self._periodic_axes
        if paxes:
            sizes = [self.sample_counts[a] for a in paxes]
            out = sfft.irfftn(out, s=sizes, axes=paxes, norm="ortho")
        for axis in reversed(self._wall_axes):
            flavor = self.flavors[axis]
            if flavor == "dirichlet0":
                out = sfft.idst(out, type=2, axis=axis, norm="ortho")
            elif flavor == "neumann0":
                out = sfft.idct(out, type=2, axis=axis, norm="ortho")
            else:
                out = sfft.idst(out, type=1, axis=axis, norm="ortho")
        return np.ascontiguousarray(out.real if np.iscomplexobj(out) else out)


@lru_cache(maxsize=64)
def make_eigen_solver(grid: Grid, flavors: tuple[str, ...]) -> EigenSolver:
    return EigenSolver(grid, flavors)


@lru_cache(maxsize=64)
def _cached_symbol(grid: Grid, flavors: tuple[str, ...]) -> np.ndarray:
    return make_eigen_solver(grid, flavors).laplacian_symbol()


def scalar_flavors(grid: Grid, bc: str) -> tuple[str, ...]:
    """Transform flavors of a cell-centered scalar with the given BC."""
    if bc not in ("dirichlet0", "neumann0"):
        raise ValueError(f"transform solves need dirichlet0 or neumann0, got {bc!r}")
    return tuple(
        "periodic" if grid.periodic[a] else bc for a in range(grid.dim)
    )


def poisson_solve(rhs: ScalarField, bc: str, check_compatibility: bool = True) -> ScalarField:
    """Solve minus-Laplacian u = rhs with the declared wall BC.

    With ``neumann0`` walls (plus any periodic axes) the operator is
    singular on constants: the right-hand side must have zero discrete
    mean and the returned solution is zero-mean. Callers that project
    out the mean deliberately (the Leray projection) pass
    ``check_compatibility=False`` to skip the error and drop the mean
    mode silently.
    """
    grid = rhs.grid
    flavors = scalar_flavors(grid, bc)
    plan = make_eigen_solver(grid, flavors)
    lam = _cached_symbol(grid, flavors)
    coeffs = plan.forward(np.ascontiguousarray(rhs.interior))
    singular = bool((lam == 0.0).any())
    if singular and check_compatibility:
        mean = float(np.sum(rhs.interior)) * grid.cell_volume
        volume = float(np.prod(grid.extents))
        scale = l2_norm(rhs)
        if abs(mean / volume) > 1e-12 * scale:
            raise ValueError(
                f"incompatible Neumann right-hand side: mean {mean / volume:.3e} "
                f"exceeds 1e-12 of the field scale {scale:.3e}"
            )
    with np.errstate(divide="ignore", invalid="ignore"):
        hat = np.where(lam == 0.0, 0.0, coeffs / np.where(lam == 0.0, 1.0, lam))
    out = ScalarField.from_interior(grid, plan.inverse(hat), bc)
    return apply_bc(out)


def biharmonic_helmholtz_solve(rhs: ScalarField, dt: float, bc: str) -> ScalarField:
    """Solve (I + dt Laplacian^2) u = rhs in the matching eigenbasis.

    The operator is strictly positive for dt >= 0, so no compatibility
    condition arises; the constant mode passes through unchanged,
    which is what preserves the discrete mean under neumann0 walls.
    """
    if dt < 0.0:
        raise ValueError(f"negative time weight {dt}")
    grid = rhs.grid
    if dt == 0.0:
        out = ScalarField.from_interior(grid, rhs.interior.copy(), bc)
        return apply_bc(out)
    flavors = scalar_flavors(grid, bc)
    plan = make_eigen_solver(grid, flavors)
    lam = _cached_symbol(grid, flavors)
    coeffs = plan.forward(np.ascontiguousarray(rhs.interior))
    hat = coeffs / (1.0 + dt * lam * lam)
    out = ScalarField.from_interior(grid, plan.inverse(hat), bc)
    return apply_bc(out)
