"""Builders for synthetic solver output used across the test modules.

Both builders construct files from the published byte and column
contracts directly, never through the solver, so they stay valid
test vectors even if the solver package is absent.
"""

import struct

import numpy as np
import pytest

from aggpost.series import SCHEMA


@pytest.fixture
def pack_aggf():
    """Encode fields into snapshot bytes, with knobs to corrupt them."""

    def _pack(fields, kind, magic=b"AGGF", version=1, ndim=None,
              cells=None, tail=b""):
        fields = [np.asarray(f, dtype=float) for f in fields]
        if cells is None:
            cells = fields[0].shape
        if ndim is None:
            ndim = len(cells)
        blob = struct.pack("<4sHH", magic, version, ndim)
        blob += b"".join(struct.pack("<I", n) for n in cells)
        blob += struct.pack("<B", kind)
        blob += b"".join(f.astype("<f8").tobytes(order="C") for f in fields)
        return blob + tail

    return _pack


@pytest.fixture
def write_series(tmp_path):
    """Write a plausible dissipative diagnostics CSV and return its path.

    ``header`` and ``edit`` let a test deviate from the contract: the
    header replaces the published one verbatim, and ``edit(rows)``
    mutates the list of row lists in place before writing.
    """

    def _write(n=6, header=None, edit=None, name="series.csv"):
        rows = []
        for k in range(n):
            e_free = 1.0 - 0.01 * k
            e_kin = 0.002 / (1.0 + k)
            row = [
                f"{1e-3 * k:.6e}",
                f"{e_free:.12e}",
                f"{e_kin:.12e}",
                f"{e_free + e_kin:.12e}",
                "0.5",
                "1e-15",
                "0.9",
                "0" if k == 0 else "5",
                "nan" if k == 0 else f"{0.1 + 0.01 * k:.4f}",
                "1e-12",
                "1e-13",
            ]
            rows.append(row)
        if edit is not None:
            edit(rows)
        if header is None:
            header = list(SCHEMA)
        path = tmp_path / name
        lines = [",".join(header)] + [",".join(r) for r in rows]
        path.write_text("\n".join(lines) + "\n")
        return path

    return _write
