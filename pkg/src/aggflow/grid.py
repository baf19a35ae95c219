"""Structured staggered-grid geometry, discrete fields, and snapshot I/O.

The domain is a rectangular box. Scalar quantities (phase field,
pressure-like multipliers, assembled right-hand sides) live at cell
centers; velocity components live on the faces normal to their own
axis in the usual MAC arrangement, so that the discrete divergence of
face fluxes and the discrete gradient of a cell scalar are exact
adjoints of one another. The last axis is vertical (it carries
gravity) and is always wall-bounded; horizontal axes may be periodic
or wall-bounded.

Every stored array carries two ghost layers per side. Two layers are
enough for every stencil in the package: composite second-order
stencils applied to pointwise nonlinear evaluations reach exactly two
cells out, and fourth-order phase operators are never formed as wide
stencils (they are solved in transform space). Boundary conditions
act only by filling ghosts:

* ``dirichlet0`` reflects odd through the wall face, so the linearly
  interpolated wall value vanishes and centered stencils see a field
  whose value and Laplacian vanish on the wall to second order.
* ``neumann0`` reflects even, killing the one-sided normal derivative
  of both the value and the discrete Laplacian.
* periodic axes wrap.
* ``noslip`` velocity pins wall-normal faces to zero on the wall and
  reflects them odd through the wall node; tangential components
  reflect odd through the wall face like ``dirichlet0`` scalars.

Ghost filling runs axis by axis in a fixed order, so corner ghosts are
reflections of reflections (or wraps of reflections). That choice
makes node-averaged quantities near corners symmetric, which the exact
discrete adjointness identities in the operator module rely on.

Wall-plane samples (velocity faces and nodes lying on a wall) carry
one-half quadrature weight per wall they touch, a trapezoidal rule in
each wall direction. The operator and solver modules depend on these
weights for their summation-by-parts identities, so the norms defined
here are the single source of truth for that convention.

Snapshots use a small self-describing binary format: magic ``AGGF``,
version u16, ndim u16, per-axis cell counts u32, field-kind u8
(0 scalar, 1 vector), then the payload as little-endian float64 in row
major order. Vector payloads store one cell-averaged array per
component, concatenated in axis order, so downstream consumers never
need to know the staggering.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GHOST",
    "Grid",
    "ScalarField",
    "VectorField",
    "Snapshot",
    "make_grid",
    "apply_bc",
    "linf_norm",
    "l2_norm",
    "h1_seminorm",
    "h2_seminorm",
    "write_snapshot",
    "read_snapshot",
]

GHOST = 2

_MAGIC = b"AGGF"
_VERSION = 1

_SCALAR_BCS = ("dirichlet0", "neumann0", "none")


@dataclass(frozen=True)
class Grid:
    """Rectangular box geometry with per-axis cell counts and spacings.

    The vertical axis is the last one; it is always wall-bounded.
    ``horizontal_bc`` holds one entry per horizontal axis, each either
    ``"wall"`` or ``"periodic"``.
    """

    extents: tuple[float, ...]
    cells: tuple[int, ...]
    horizontal_bc: tuple[str, ...]
    spacing: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def vertical_axis(self) -> int:
        return self.dim - 1

    @property
    def periodic(self) -> tuple[bool, ...]:
        flags = [bc == "periodic" for bc in self.horizontal_bc]
        flags.append(False)
        return tuple(flags)

    @property
    def cell_volume(self) -> float:
        vol = 1.0
        for h in self.spacing:
            vol *= h
        return vol

    def cell_centers(self, axis: int) -> np.ndarray:
        return (np.arange(self.cells[axis]) + 0.5) * self.spacing[axis]

    def face_positions(self, axis: int) -> np.ndarray:
        n = self.cells[axis]
        count = n if self.periodic[axis] else n + 1
        return np.arange(count) * self.spacing[axis]


def make_grid(domain) -> Grid:
    """Build a Grid from the ``domain`` config section.

    Expects ``extents`` and ``cells`` sequences of equal length 2 or 3,
    and optionally ``horizontal_bc`` as a string or per-axis list
    (default periodic). Extra keys such as the phase BC choice are
    ignored here; strict key validation happens at config level.
    """
    extents = tuple(float(x) for x in domain["extents"])
    cells = tuple(int(n) for n in domain["cells"])
    if len(extents) != len(cells):
        raise ValueError("extents and cells must have the same length")
    dim = len(cells)
    if dim not in (2, 3):
        raise ValueError(f"grid must be 2D or 3D, got {dim} axes")
    for L in extents:
        if not (L > 0.0) or not np.isfinite(L):
            raise ValueError(f"non-positive extent {L}")
    for n in cells:
        if n < 8:
            raise ValueError(f"cell count {n} below the minimum of 8 per axis")
    raw = domain.get("horizontal_bc", "periodic")
    if isinstance(raw, str):
        hbc = (raw,) * (dim - 1)
    else:
        hbc = tuple(str(b) for b in raw)
    if len(hbc) != dim - 1:
        raise ValueError("horizontal_bc needs one entry per horizontal axis")
    for b in hbc:
        if b not in ("wall", "periodic"):
            raise ValueError(f"unknown horizontal bc {b!r}")
    spacing = tuple(L / n for L, n in zip(extents, cells))
    return Grid(extents=extents, cells=cells, horizontal_bc=hbc, spacing=spacing)


def _padded_shape(counts) -> tuple[int, ...]:
    return tuple(int(n) + 2 * GHOST for n in counts)


def _sl(nd: int, axis: int, s: slice) -> tuple:
    idx = [slice(None)] * nd
    idx[axis] = s
    return tuple(idx)


def _interior_slices(counts) -> tuple:
    return tuple(slice(GHOST, GHOST + int(n)) for n in counts)


class ScalarField:
    """Cell-centered scalar with ghost padding and a BC tag.

    ``bc`` is one of ``dirichlet0``, ``neumann0``, ``none``. The tag
    governs wall-axis ghost filling; periodic axes always wrap. Fields
    tagged ``none`` may hold intermediate quantities but are rejected
    by any norm or operator that needs wall ghosts.
    """

    __slots__ = ("grid", "bc", "data")

    def __init__(self, grid: Grid, bc: str, data: np.ndarray | None = None):
        if bc not in _SCALAR_BCS:
            raise ValueError(f"unknown scalar bc {bc!r}")
        shape = _padded_shape(grid.cells)
        if data is None:
            data = np.zeros(shape)
        if data.shape != shape:
            raise ValueError(f"padded storage must have shape {shape}, got {data.shape}")
        self.grid = grid
        self.bc = bc
        self.data = data

    @classmethod
    def from_interior(cls, grid: Grid, values: np.ndarray, bc: str) -> "ScalarField":
        f = cls(grid, bc)
        f.interior[...] = values
        return f

    @property
    def interior(self) -> np.ndarray:
        return self.data[_interior_slices(self.grid.cells)]

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.bc, self.data.copy())


def vector_component_counts(grid: Grid, comp: int) -> tuple[int, ...]:
    """Sample counts of velocity component ``comp`` along each axis.

    Along its own axis a component lives on faces: n+1 of them between
    and on the two walls, or n when the axis is periodic. Along every
    other axis it is cell-centered.
    """
    counts = []
    for axis, n in enumerate(grid.cells):
        if axis == comp and not grid.periodic[axis]:
            counts.append(n + 1)
        else:
            counts.append(n)
    return tuple(counts)


class VectorField:
    """MAC-staggered velocity with one face-centered array per axis."""

    __slots__ = ("grid", "bc", "components")

    def __init__(self, grid: Grid, components=None):
        self.grid = grid
        self.bc = "noslip"
        if components is None:
            components = tuple(
                np.zeros(_padded_shape(vector_component_counts(grid, c)))
                for c in range(grid.dim)
            )
        else:
            components = tuple(components)
            for c, arr in enumerate(components):
                want = _padded_shape(vector_component_counts(grid, c))
                if arr.shape != want:
                    raise ValueError(
                        f"component {c} must have padded shape {want}, got {arr.shape}"
                    )
        self.components = components

    def interior(self, comp: int) -> np.ndarray:
        counts = vector_component_counts(self.grid, comp)
        return self.components[comp][_interior_slices(counts)]

    def copy(self) -> "VectorField":
        return VectorField(self.grid, tuple(a.copy() for a in self.components))


def _fill_periodic(arr: np.ndarray, axis: int, n: int) -> None:
    nd = arr.ndim
    g = GHOST
    arr[_sl(nd, axis, slice(0, g))] = arr[_sl(nd, axis, slice(n, n + g))]
    arr[_sl(nd, axis, slice(g + n, g + n + g))] = arr[_sl(nd, axis, slice(g, 2 * g))]


def _fill_cell_reflect(arr: np.ndarray, axis: int, n: int, sign: float) -> None:
    # reflection through the wall faces for cell-centered samples
    nd = arr.ndim
    g = GHOST
    first = arr[_sl(nd, axis, slice(g, g + 2))]
    arr[_sl(nd, axis, slice(g - 2, g))] = sign * np.flip(first, axis=axis)
    last = arr[_sl(nd, axis, slice(g + n - 2, g + n))]
    arr[_sl(nd, axis, slice(g + n, g + n + 2))] = sign * np.flip(last, axis=axis)


def _fill_face_noslip(arr: np.ndarray, axis: int, n: int) -> None:
    # wall-normal faces: pin the wall values, reflect odd through the wall node
    nd = arr.ndim
    g = GHOST
    arr[_sl(nd, axis, slice(g, g + 1))] = 0.0
    arr[_sl(nd, axis, slice(g + n, g + n + 1))] = 0.0
    first = arr[_sl(nd, axis, slice(g + 1, g + 3))]
    arr[_sl(nd, axis, slice(g - 2, g))] = -np.flip(first, axis=axis)
    last = arr[_sl(nd, axis, slice(g + n - 2, g + n))]
    arr[_sl(nd, axis, slice(g + n + 1, g + n + 3))] = -np.flip(last, axis=axis)


def apply_bc(field):
    """Fill ghost layers according to the field's BC tag; idempotent.

    Returns the same field object. Axes are processed in index order,
    so corner ghosts are deterministic compositions of the per-axis
    rules and a second application reproduces every ghost bitwise.
    """
    grid = field.grid
    if isinstance(field, ScalarField):
        arr = field.data
        for axis in range(grid.dim):
            n = grid.cells[axis]
            if grid.periodic[axis]:
                _fill_periodic(arr, axis, n)
            elif field.bc == "dirichlet0":
                _fill_cell_reflect(arr, axis, n, -1.0)
            elif field.bc == "neumann0":
                _fill_cell_reflect(arr, axis, n, 1.0)
            # bc "none": wall ghosts are the caller's responsibility
        return field
    if isinstance(field, VectorField):
        for comp, arr in enumerate(field.components):
            counts = vector_component_counts(grid, comp)
            for axis in range(grid.dim):
                n = grid.cells[axis]
                if grid.periodic[axis]:
                    _fill_periodic(arr, axis, n)
                elif axis == comp:
                    _fill_face_noslip(arr, axis, counts[axis] - 1)
                else:
                    # tangential velocity vanishes on the wall
                    _fill_cell_reflect(arr, axis, n, -1.0)
        return field
    raise TypeError(f"apply_bc expects ScalarField or VectorField, got {type(field)!r}")


def _require_bc(field: ScalarField, what: str) -> None:
    if field.bc == "none":
        raise ValueError(f"{what} needs wall boundary conditions, field has bc='none'")


def _face_weights(grid: Grid, axis: int, wall_count: bool) -> np.ndarray:
    """Per-sample quadrature weights along one axis of a staggered array.

    ``wall_count`` selects face/node counting (n+1 samples with half
    weights on the walls) versus plain cell counting (n ones).
    """
    n = grid.cells[axis]
    if wall_count and not grid.periodic[axis]:
        w = np.ones(n + 1)
        w[0] = 0.5
        w[-1] = 0.5
        return w
    return np.ones(n)


def _bcast(w: np.ndarray, axis: int, nd: int) -> np.ndarray:
    shape = [1] * nd
    shape[axis] = w.size
    return w.reshape(shape)


def _component_l2_weight(grid: Grid, comp: int) -> np.ndarray | float:
    w = 1.0
    for axis in range(grid.dim):
        if axis == comp and not grid.periodic[axis]:
            w = w * _bcast(_face_weights(grid, axis, True), axis, grid.dim)
    return w


def linf_norm(field) -> float:
    if isinstance(field, ScalarField):
        return float(np.max(np.abs(field.interior)))
    if isinstance(field, VectorField):
        return max(float(np.max(np.abs(field.interior(c)))) for c in range(field.grid.dim))
    raise TypeError(f"unsupported field type {type(field)!r}")


def l2_norm(field) -> float:
    vol = field.grid.cell_volume
    if isinstance(field, ScalarField):
        s = field.interior
        return float(np.sqrt(vol * np.sum(s * s)))
    if isinstance(field, VectorField):
        total = 0.0
        for c in range(field.grid.dim):
            u = field.interior(c)
            w = _component_l2_weight(field.grid, c)
            total += float(np.sum(w * u * u))
        return float(np.sqrt(vol * total))
    raise TypeError(f"unsupported field type {type(field)!r}")


def _scalar_h1_sq(field: ScalarField) -> float:
    grid = field.grid
    arr = field.data
    nd = grid.dim
    g = GHOST
    total = 0.0
    for axis in range(nd):
        n = grid.cells[axis]
        h = grid.spacing[axis]
        if grid.periodic[axis]:
            lo, hi = g - 1, g + n
        else:
            lo, hi = g - 1, g + n + 1
        slab = arr[_sl(nd, axis, slice(lo, hi))]
        other = _interior_slices(grid.cells)
        idx = list(other)
        idx[axis] = slice(None)
        d = np.diff(slab[tuple(idx)], axis=axis) / h
        w = _bcast(_face_weights(grid, axis, True), axis, nd)
        total += float(np.sum(w * d * d))
    return grid.cell_volume * total


def _vector_h1_sq(field: VectorField) -> float:
    grid = field.grid
    nd = grid.dim
    g = GHOST
    total = 0.0
    for comp in range(nd):
        arr = field.components[comp]
        counts = vector_component_counts(grid, comp)
        for axis in range(nd):
            h = grid.spacing[axis]
            idx = []
            weights = []
            for q in range(nd):
                n_q = grid.cells[q]
                if q == axis:
                    if q == comp:
                        # derivative lands at cell centers along q
                        idx.append(slice(g, g + n_q + 1))
                        weights.append(np.ones(n_q))
                    elif grid.periodic[q]:
                        # derivative lands at the n_q periodic nodes
                        idx.append(slice(g - 1, g + n_q))
                        weights.append(np.ones(n_q))
                    else:
                        # derivative lands at the n_q+1 wall-to-wall nodes
                        idx.append(slice(g - 1, g + n_q + 1))
                        weights.append(_face_weights(grid, q, True))
                elif q == comp:
                    idx.append(slice(g, g + counts[q]))
                    weights.append(_face_weights(grid, q, True))
                else:
                    idx.append(slice(g, g + n_q))
                    weights.append(np.ones(n_q))
            d = np.diff(arr[tuple(idx)], axis=axis) / h
            w = 1.0
            for q, wq in enumerate(weights):
                if not np.all(wq == 1.0):
                    w = w * _bcast(wq, q, nd)
            total += float(np.sum(w * d * d))
    return grid.cell_volume * total


def h1_seminorm(field) -> float:
    """Discrete gradient seminorm with trapezoidal wall weighting.

    For scalars this equals the square root of the quadratic form of
    the ghost-filled five-point Laplacian, so Poisson energy identities
    hold exactly. For velocities it sums all component derivatives at
    their natural staggered positions.
    """
    if isinstance(field, ScalarField):
        _require_bc(field, "h1_seminorm")
        apply_bc(field)
        return float(np.sqrt(_scalar_h1_sq(field)))
    if isinstance(field, VectorField):
        apply_bc(field)
        return float(np.sqrt(_vector_h1_sq(field)))
    raise TypeError(f"unsupported field type {type(field)!r}")


def _laplacian_interior(arr: np.ndarray, counts, spacing) -> np.ndarray:
    nd = arr.ndim
    g = GHOST
    inner = _interior_slices(counts)
    out = np.zeros(tuple(int(n) for n in counts))
    for axis in range(nd):
        n = counts[axis]
        h2 = spacing[axis] ** 2
        up = list(inner)
        dn = list(inner)
        up[axis] = slice(g + 1, g + n + 1)
        dn[axis] = slice(g - 1, g + n - 1)
        out += (arr[tuple(up)] - 2.0 * arr[inner] + arr[tuple(dn)]) / h2
    return out


def h2_seminorm(field) -> float:
    """Norm of the discrete Laplacian, the natural H2-level seminorm here."""
    grid = field.grid
    vol = grid.cell_volume
    if isinstance(field, ScalarField):
        _require_bc(field, "h2_seminorm")
        apply_bc(field)
        lap = _laplacian_interior(field.data, grid.cells, grid.spacing)
        return float(np.sqrt(vol * np.sum(lap * lap)))
    if isinstance(field, VectorField):
        apply_bc(field)
        total = 0.0
        for c in range(grid.dim):
            counts = vector_component_counts(grid, c)
            lap = _laplacian_interior(field.components[c], counts, grid.spacing)
            w = _component_l2_weight(grid, c)
            total += float(np.sum(w * lap * lap))
        return float(np.sqrt(vol * total))
    raise TypeError(f"unsupported field type {type(field)!r}")


@dataclass(frozen=True)
class Snapshot:
    """Decoded snapshot payload: per-axis cell counts and cell arrays."""

    cells: tuple[int, ...]
    kind: int
    arrays: tuple[np.ndarray, ...]


def _cell_averaged_component(field: VectorField, comp: int) -> np.ndarray:
    grid = field.grid
    apply_bc(field)
    arr = field.components[comp]
    nd = grid.dim
    g = GHOST
    n = grid.cells[comp]
    idx = list(_interior_slices(grid.cells))
    lo = list(idx)
    hi = list(idx)
    lo[comp] = slice(g, g + n)
    hi[comp] = slice(g + 1, g + n + 1)
    return 0.5 * (arr[tuple(lo)] + arr[tuple(hi)])


def write_snapshot(path, field) -> None:
    """Serialize a field to the binary snapshot format (see module doc)."""
    grid = field.grid
    if isinstance(field, ScalarField):
        kind = 0
        arrays = [np.ascontiguousarray(field.interior)]
    elif isinstance(field, VectorField):
        kind = 1
        arrays = [_cell_averaged_component(field, c) for c in range(grid.dim)]
    else:
        raise TypeError(f"unsupported field type {type(field)!r}")
    header = struct.pack("<4sHH", _MAGIC, _VERSION, grid.dim)
    header += b"".join(struct.pack("<I", n) for n in grid.cells)
    header += struct.pack("<B", kind)
    with open(path, "wb") as fh:
        fh.write(header)
        for a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes(order="C"))


def read_snapshot(path) -> Snapshot:
    """Decode a snapshot file, validating magic, version, and size."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 8 or blob[:4] != _MAGIC:
        raise ValueError("not a snapshot file: bad magic")
    version, ndim = struct.unpack_from("<HH", blob, 4)
    if version != _VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    if ndim not in (2, 3):
        raise ValueError(f"unsupported snapshot dimension {ndim}")
    off = 8
    if len(blob) < off + 4 * ndim + 1:
        raise ValueError("truncated snapshot header")
    cells = struct.unpack_from(f"<{ndim}I", blob, off)
    off += 4 * ndim
    (kind,) = struct.unpack_from("<B", blob, off)
    off += 1
    if kind not in (0, 1):
        raise ValueError(f"unknown field kind {kind}")
    if any(n < 1 for n in cells):
        raise ValueError("snapshot with empty axes")
    count = 1
    for n in cells:
        count *= n
    ncomp = 1 if kind == 0 else ndim
    want = off + 8 * count * ncomp
    if len(blob) != want:
        raise ValueError(f"truncated snapshot payload: {len(blob)} bytes, expected {want}")
    arrays = []
    for c in range(ncomp):
        flat = np.frombuffer(blob, dtype="<f8", count=count, offset=off + 8 * count * c)
        arrays.append(flat.reshape(cells).astype(np.float64))
    return Snapshot(cells=tuple(int(n) for n in cells), kind=kind, arrays=tuple(arrays))
