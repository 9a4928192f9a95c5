"""On-disk shard format: a fixed little-endian header followed by alpha symbols per chunk."""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .code import CodeParams, NodeId, derive_params

MAGIC = b"MSRC"
FORMAT_VERSION = 1
# magic, version, q, t, m, poly, u, x, y, chunk_count, file length, payload length
HEADER = struct.Struct("<4sHHHBIHHHIQQ")


class ShardFormatError(ValueError):
    pass


@dataclass(frozen=True)
class ShardHeader:
    q: int
    t: int
    field_m: int
    reduction_poly: int
    u_element: int
    node_x: int
    node_y: int
    chunk_count: int
    original_file_length: int
    payload_length: int
    format_version: int = FORMAT_VERSION

    @property
    def node(self) -> NodeId:
        return NodeId(self.node_x, self.node_y)

    def code_key(self) -> tuple:
        """Fields that every shard of one encoding must agree on."""
        return (self.format_version, self.q, self.t, self.field_m, self.reduction_poly,
                self.u_element, self.chunk_count, self.original_file_length, self.payload_length)

    def pack(self) -> bytes:
        return HEADER.pack(
            MAGIC, self.format_version, self.q, self.t, self.field_m, self.reduction_poly,
            self.u_element, self.node_x, self.node_y, self.chunk_count,
            self.original_file_length, self.payload_length,
        )

    @classmethod
    def unpack(cls, raw: bytes) -> "ShardHeader":
        if len(raw) < HEADER.size:
            raise ShardFormatError("truncated header")
        (magic, version, q, t, m, poly, u, x, y, chunks, length, payload) = HEADER.unpack(raw[: HEADER.size])
        if magic != MAGIC:
            raise ShardFormatError(f"bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise ShardFormatError(f"unsupported format version {version}")
        return cls(q, t, m, poly, u, x, y, chunks, length, payload, version)


def shard_name(node: NodeId) -> str:
    return f"shard_y{node.y}_x{node.x}.msr"


def symbol_bytes(params: CodeParams) -> int:
    return params.field.m // 8


def bytes_to_symbols(raw: bytes, params: CodeParams) -> np.ndarray:
    dt = np.dtype("<u1") if params.field.m == 8 else np.dtype("<u2")
    return np.frombuffer(raw, dtype=dt).astype(params.field.dtype)


def symbols_to_bytes(symbols: np.ndarray, params: CodeParams) -> bytes:
    dt = np.dtype("<u1") if params.field.m == 8 else np.dtype("<u2")
    return np.ascontiguousarray(symbols, dtype=dt).tobytes()


def make_header(params: CodeParams, node: NodeId, chunk_count: int, file_length: int) -> ShardHeader:
    return ShardHeader(
        q=params.q, t=params.t, field_m=params.field.m,
        reduction_poly=params.field.reduction_polynomial, u_element=params.u,
        node_x=node.x, node_y=node.y, chunk_count=chunk_count,
        original_file_length=file_length,
        payload_length=chunk_count * params.alpha * symbol_bytes(params),
    )


def pack_shard(header: ShardHeader, free: np.ndarray, params: CodeParams) -> bytes:
    """``free`` is (alpha, chunk_count); the payload is chunk-major."""
    return header.pack() + symbols_to_bytes(np.asarray(free).T, params)


def params_for(header: ShardHeader) -> CodeParams:
    params = derive_params(header.q, header.t, header.field_m)
    if params.field.reduction_polynomial != header.reduction_poly or params.u != header.u_element:
        raise ShardFormatError("shard uses a field or coupling coefficient this build does not support")
    return params


def read_shard(path: Path) -> tuple[ShardHeader, np.ndarray, CodeParams]:
    raw = Path(path).read_bytes()
    header = ShardHeader.unpack(raw)
    params = params_for(header)
    payload = raw[HEADER.size :]
    if len(payload) != header.payload_length:
        raise ShardFormatError(f"{path}: payload is {len(payload)} bytes, header says {header.payload_length}")
    expected = header.chunk_count * params.alpha * symbol_bytes(params)
    if header.payload_length != expected:
        raise ShardFormatError(f"{path}: payload length inconsistent with chunk count")
    if not (0 <= header.node_x < params.width and 1 <= header.node_y <= params.t):
        raise ShardFormatError(f"{path}: node coordinates out of range")
    sym = bytes_to_symbols(payload, params).reshape(header.chunk_count, params.alpha).T
    return header, sym, params
