import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st

from coupled_msr.code import NodeId, derive_params
from coupled_msr.shardfile import (
    HEADER,
    MAGIC,
    ShardFormatError,
    ShardHeader,
    bytes_to_symbols,
    make_header,
    pack_shard,
    read_shard,
    shard_name,
    symbols_to_bytes,
)


def test_header_layout_is_fixed():
    assert HEADER.size == 4 + 2 * 3 + 1 + 4 + 2 * 3 + 4 + 8 + 8 == 41
    p = derive_params(2, 3)
    h = make_header(p, NodeId(3, 2), chunk_count=5, file_length=1234)
    raw = h.pack()
    assert raw[:4] == MAGIC
    assert struct.unpack_from("<H", raw, 4)[0] == 1  # version
    assert struct.unpack_from("<I", raw, 11)[0] == 0x11D  # reduction polynomial
    assert struct.unpack_from("<Q", raw, 33)[0] == 5 * p.alpha
    assert ShardHeader.unpack(raw) == h


def test_shard_name():
    assert shard_name(NodeId(3, 2)) == "shard_y2_x3.msr"


def test_pack_read_roundtrip(tmp_path, p23):
    rng = np.random.default_rng(0)
    free = p23.field.random((p23.alpha, 3), rng)
    h = make_header(p23, NodeId(1, 3), 3, 700)
    path = tmp_path / "s.msr"
    path.write_bytes(pack_shard(h, free, p23))
    h2, sym, p2 = read_shard(path)
    assert h2 == h and p2 == p23 and np.array_equal(sym, free)
    # chunk-major payload: the first alpha bytes are chunk 0
    assert path.read_bytes()[HEADER.size:HEADER.size + p23.alpha] == free[:, 0].tobytes()


@pytest.mark.parametrize("mutate, message", [
    (lambda b: b"XXXX" + b[4:], "magic"),
    (lambda b: b[:4] + b"\x09\x00" + b[6:], "version"),
    (lambda b: b[:-1], "payload"),
    (lambda b: b[:20], "truncated"),
])
def test_read_rejects_corrupt(tmp_path, p22, mutate, message):
    h = make_header(p22, NodeId(0, 1), 1, 10)
    raw = pack_shard(h, np.zeros((p22.alpha, 1), dtype=np.uint8), p22)
    path = tmp_path / "bad.msr"
    path.write_bytes(mutate(raw))
    with pytest.raises(ShardFormatError, match=message):
        read_shard(path)


def test_read_rejects_out_of_range_node(tmp_path, p22):
    h = make_header(p22, NodeId(0, 1), 0, 0)
    bad = ShardHeader(**{**h.__dict__, "node_x": 7})
    path = tmp_path / "bad.msr"
    path.write_bytes(bad.pack())
    with pytest.raises(ShardFormatError, match="range"):
        read_shard(path)


@given(st.binary(max_size=64).filter(lambda b: len(b) % 2 == 0))
def test_sixteen_bit_symbols_little_endian(raw):
    p = derive_params(2, 64)
    sym = bytes_to_symbols(raw, p)
    assert sym.dtype == np.uint16
    assert symbols_to_bytes(sym, p) == raw
    if raw:
        assert int(sym[0]) == raw[0] | (raw[1] << 8)
