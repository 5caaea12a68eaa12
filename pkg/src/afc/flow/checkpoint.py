"""Versioned binary checkpoints of the flow state.

Layout (all little-endian): magic "AFCS", version u16, nx u32, ny u32,
t f64, then the u, v, p arrays as f64 row-major. Round trips are bit-exact.
"""

from __future__ import annotations

import struct

import numpy as np

from afc.errors import CorruptPayloadError, ShapeMismatchError, VersionMismatchError
from afc.flow.solver import FlowField

MAGIC = b"AFCS"
VERSION = 1
_HEADER = struct.Struct("<4sHIId")


def save_checkpoint(field: FlowField) -> bytes:
    head = _HEADER.pack(MAGIC, VERSION, field.nx, field.ny, field.t)
    parts = [head]
    for arr in (field.u, field.v, field.p):
        parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return b"".join(parts)


def load_checkpoint(data: bytes, nx: int | None = None, ny: int | None = None) -> FlowField:
    """Decode a checkpoint; optional nx/ny assert the expected grid."""
    if len(data) < _HEADER.size:
        raise CorruptPayloadError(f"checkpoint truncated: {len(data)} bytes")
    magic, version, cnx, cny, t = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise VersionMismatchError(f"bad checkpoint magic {magic!r}")
    if version != VERSION:
        raise VersionMismatchError(f"unsupported checkpoint version {version}")
    if nx is not None and ny is not None and (cnx, cny) != (nx, ny):
        raise ShapeMismatchError(f"checkpoint grid {cnx}x{cny} does not match {nx}x{ny}")
    sizes = ((cnx + 1) * cny, cnx * (cny + 1), cnx * cny)
    expected = _HEADER.size + 8 * sum(sizes)
    if len(data) != expected:
        raise CorruptPayloadError(
            f"checkpoint payload is {len(data)} bytes, expected {expected}"
        )
    offset = _HEADER.size
    arrays = []
    for count, shape in zip(sizes, ((cnx + 1, cny), (cnx, cny + 1), (cnx, cny))):
        flat = np.frombuffer(data, dtype="<f8", count=count, offset=offset)
        arrays.append(flat.reshape(shape).astype(np.float64))
        offset += 8 * count
    u, v, p = arrays
    return FlowField(nx=cnx, ny=cny, t=t, u=u, v=v, p=p)
