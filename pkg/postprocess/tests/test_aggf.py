"""Snapshot decoding: bitwise round-trips and header validation."""

import numpy as np
import pytest

from aggpost import (KIND_SCALAR, KIND_VECTOR, SnapshotFormatError, read_aggf)

rng = np.random.default_rng(2214)


def _write(tmp_path, blob, name="snap.aggf"):
    path = tmp_path / name
    path.write_bytes(blob)
    return path


def test_scalar_2d_round_trip_is_bitwise(tmp_path, pack_aggf):
    arr = rng.standard_normal((6, 4))
    snap = read_aggf(_write(tmp_path, pack_aggf([arr], KIND_SCALAR)))
    assert snap.cells == (6, 4)
    assert snap.ndim == 2
    assert snap.kind == KIND_SCALAR
    assert len(snap.fields) == 1
    assert np.array_equal(snap.fields[0], arr)


def test_vector_2d_components_keep_axis_order(tmp_path, pack_aggf):
    u = rng.standard_normal((5, 3))
    w = rng.standard_normal((5, 3))
    snap = read_aggf(_write(tmp_path, pack_aggf([u, w], KIND_VECTOR)))
    assert snap.kind == KIND_VECTOR
    assert len(snap.fields) == 2
    assert np.array_equal(snap.fields[0], u)
    assert np.array_equal(snap.fields[1], w)


def test_scalar_3d_round_trip_is_bitwise(tmp_path, pack_aggf):
    arr = rng.standard_normal((3, 4, 5))
    snap = read_aggf(_write(tmp_path, pack_aggf([arr], KIND_SCALAR)))
    assert snap.cells == (3, 4, 5)
    assert np.array_equal(snap.fields[0], arr)


def test_vector_3d_round_trip_is_bitwise(tmp_path, pack_aggf):
    comps = [rng.standard_normal((3, 4, 5)) for _ in range(3)]
    snap = read_aggf(_write(tmp_path, pack_aggf(comps, KIND_VECTOR)))
    assert len(snap.fields) == 3
    for got, want in zip(snap.fields, comps):
        assert np.array_equal(got, want)


def test_decoded_fields_are_writable_copies(tmp_path, pack_aggf):
    arr = rng.standard_normal((4, 4))
    snap = read_aggf(_write(tmp_path, pack_aggf([arr], KIND_SCALAR)))
    assert snap.fields[0].flags.writeable
    snap.fields[0][0, 0] = 42.0


def test_special_values_survive_the_trip(tmp_path, pack_aggf):
    arr = np.array([[np.nan, np.inf], [-np.inf, -0.0]])
    snap = read_aggf(_write(tmp_path, pack_aggf([arr], KIND_SCALAR)))
    assert snap.fields[0].tobytes() == arr.tobytes()


def test_bad_magic_rejected(tmp_path, pack_aggf):
    blob = pack_aggf([np.zeros((2, 2))], KIND_SCALAR, magic=b"AGGX")
    with pytest.raises(SnapshotFormatError, match="magic"):
        read_aggf(_write(tmp_path, blob))


def test_future_version_rejected(tmp_path, pack_aggf):
    blob = pack_aggf([np.zeros((2, 2))], KIND_SCALAR, version=2)
    with pytest.raises(SnapshotFormatError, match="version"):
        read_aggf(_write(tmp_path, blob))


@pytest.mark.parametrize("shape", [(4,), (2, 2, 2, 2)])
def test_unsupported_dimension_rejected(tmp_path, pack_aggf, shape):
    blob = pack_aggf([np.zeros(shape)], KIND_SCALAR)
    with pytest.raises(SnapshotFormatError, match="dimension"):
        read_aggf(_write(tmp_path, blob))


def test_unknown_payload_kind_rejected(tmp_path, pack_aggf):
    blob = pack_aggf([np.zeros((2, 2))], kind=2)
    with pytest.raises(SnapshotFormatError, match="kind"):
        read_aggf(_write(tmp_path, blob))


def test_zero_cell_axis_rejected(tmp_path, pack_aggf):
    blob = pack_aggf([], KIND_SCALAR, cells=(4, 0), ndim=2)
    with pytest.raises(SnapshotFormatError, match="zero cells"):
        read_aggf(_write(tmp_path, blob))


def test_truncated_header_rejected(tmp_path, pack_aggf):
    blob = pack_aggf([np.zeros((2, 2))], KIND_SCALAR)[:9]
    with pytest.raises(SnapshotFormatError, match="truncated"):
        read_aggf(_write(tmp_path, blob))


def test_truncated_payload_rejected(tmp_path, pack_aggf):
    blob = pack_aggf([np.ones((3, 3))], KIND_SCALAR)[:-8]
    with pytest.raises(SnapshotFormatError, match="payload"):
        read_aggf(_write(tmp_path, blob))


def test_trailing_bytes_rejected(tmp_path, pack_aggf):
    blob = pack_aggf([np.ones((3, 3))], KIND_SCALAR, tail=b"\x00")
    with pytest.raises(SnapshotFormatError, match="payload"):
        read_aggf(_write(tmp_path, blob))


def test_vector_missing_one_component_rejected(tmp_path, pack_aggf):
    u = rng.standard_normal((4, 4))
    blob = pack_aggf([u], KIND_VECTOR)
    with pytest.raises(SnapshotFormatError, match="payload"):
        read_aggf(_write(tmp_path, blob))
