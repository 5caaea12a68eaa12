"""Versioned binary model files for evaluation-only runs.

Layout (little-endian): magic "AFCP", version u16, obs_dim u32, hidden u32,
then every parameter array in canonical order (actor layers, critic layers,
log-std) as float32.
"""

from __future__ import annotations

import struct

import numpy as np

from afc.agent.network import ActorCritic
from afc.errors import CorruptPayloadError, VersionMismatchError

MAGIC = b"AFCP"
VERSION = 1
_HEADER = struct.Struct("<4sHII")


def save_model(ac: ActorCritic) -> bytes:
    parts = [_HEADER.pack(MAGIC, VERSION, ac.obs_dim, ac.hidden)]
    for p in ac.parameters():
        parts.append(np.ascontiguousarray(p, dtype="<f4").tobytes())
    return b"".join(parts)


def load_model(data: bytes, dtype=np.float32) -> ActorCritic:
    if len(data) < _HEADER.size:
        raise CorruptPayloadError(f"model file truncated: {len(data)} bytes")
    magic, version, obs_dim, hidden = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise VersionMismatchError(f"bad model magic {magic!r}")
    if version != VERSION:
        raise VersionMismatchError(f"unsupported model version {version}")
    ac = ActorCritic(obs_dim, hidden, np.random.default_rng(0), dtype=dtype)
    offset = _HEADER.size
    for p in ac.parameters():
        end = offset + 4 * p.size
        if end > len(data):
            raise CorruptPayloadError("model file truncated inside parameter block")
        flat = np.frombuffer(data, dtype="<f4", count=p.size, offset=offset)
        p[...] = flat.reshape(p.shape).astype(dtype)
        offset = end
    if offset != len(data):
        raise CorruptPayloadError(
            f"model file has {len(data) - offset} trailing bytes"
        )
    return ac
