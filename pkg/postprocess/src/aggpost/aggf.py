"""Reader for the solver's binary snapshot format.

A snapshot file starts with a fixed little-endian header: the four
magic bytes ``AGGF``, a format version, the spatial dimension, one
unsigned cell count per axis, and a payload-kind byte. Kind 0 carries
a single scalar field on cell centers; kind 1 carries the
cell-averaged velocity components, one full field per axis,
concatenated in axis order. The payload is raw float64 in C order
with no compression or padding, so its length is implied exactly by
the header and any mismatch means the file is damaged.

This module decodes that layout from the published byte contract
alone. It shares no code with the solver, which keeps the format an
honest interface: a change on either side breaks the round-trip tests
instead of silently staying in sync.
"""

import dataclasses
import struct

import numpy as np

from .errors import SnapshotFormatError

MAGIC = b"AGGF"
VERSION = 1
KIND_SCALAR = 0
KIND_VECTOR = 1

_HEAD = struct.Struct("<4sHH")
_AXIS = struct.Struct("<I")
_KIND = struct.Struct("<B")


@dataclasses.dataclass(frozen=True)
class Snapshot:
    """Decoded snapshot: cell counts, payload kind, and field arrays.

    ``fields`` holds one array of shape ``cells`` for a scalar
    snapshot and one per axis for a vector snapshot.
    """

    cells: tuple
    kind: int
    fields: tuple

    @property
    def ndim(self) -> int:
        return len(self.cells)


def _take(buf: bytes, offset: int, fmt: struct.Struct, path) -> tuple:
    if offset + fmt.size > len(buf):
        raise SnapshotFormatError(f"{path}: file truncated inside header")
    return fmt.unpack_from(buf, offset), offset + fmt.size


def read_aggf(path) -> Snapshot:
    """Decode one snapshot file, validating every header field."""
    with open(path, "rb") as fh:
        buf = fh.read()
    (magic, version, ndim), offset = _take(buf, 0, _HEAD, path)
    if magic != MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotFormatError(
            f"{path}: unsupported format version {version}")
    if ndim not in (2, 3):
        raise SnapshotFormatError(f"{path}: unsupported dimension {ndim}")
    cells = []
    for _ in range(ndim):
        (n,), offset = _take(buf, offset, _AXIS, path)
        if n == 0:
            raise SnapshotFormatError(f"{path}: zero cells along an axis")
        cells.append(int(n))
    (kind,), offset = _take(buf, offset, _KIND, path)
    if kind not in (KIND_SCALAR, KIND_VECTOR):
        raise SnapshotFormatError(f"{path}: unknown payload kind {kind}")
    cells = tuple(cells)
    n_fields = 1 if kind == KIND_SCALAR else ndim
    n_values = n_fields * int(np.prod(cells))
    expected = offset + 8 * n_values
    if len(buf) != expected:
        raise SnapshotFormatError(
            f"{path}: payload holds {len(buf) - offset} bytes, expected "
            f"{expected - offset}")
    flat = np.frombuffer(buf, dtype="<f8", count=n_values, offset=offset)
    per_field = int(np.prod(cells))
    fields = tuple(
        flat[i * per_field:(i + 1) * per_field].reshape(cells).copy()
        for i in range(n_fields))
    return Snapshot(cells=cells, kind=int(kind), fields=fields)
