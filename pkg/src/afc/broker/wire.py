"""Binary wire format of the tensor broker.

Every frame, request or response, starts with the same header:

    magic   4 bytes  "AFCB"
    version u8       1
    opcode  u8
    keylen  u16 LE
    key     keylen bytes of UTF-8

followed by an opcode-specific payload, all little-endian:

    PUT, TENSOR   dtype u8 (1=f32, 2=f64, 3=i64), ndim u8,
                  ndim * u64 dims, then raw row-major element bytes
    GET           timeout_ms u32
    ERR           msglen u16, UTF-8 message
    DEL, PING, OK, NOT_FOUND   (empty)

Responses echo the request key (empty for PING). DEL removes every key with
the given prefix, which is how episode-scoped keys are garbage collected.
"""

from __future__ import annotations

import enum
import socket
import struct
from dataclasses import dataclass

import numpy as np

from afc.errors import ConnectivityError

MAGIC = b"AFCB"
VERSION = 1
MAX_KEY_BYTES = 65535

_HEADER = struct.Struct("<4sBBH")


class Opcode(enum.IntEnum):
    PUT = 1
    GET = 2
    DEL = 3
    PING = 4
    OK = 128
    TENSOR = 129
    NOT_FOUND = 130
    ERR = 131


DTYPE_CODES = {1: np.dtype("<f4"), 2: np.dtype("<f8"), 3: np.dtype("<i8")}
CODES_BY_KIND = {"<f4": 1, "<f8": 2, "<i8": 3}


def dtype_code(dtype: np.dtype) -> int:
    key = np.dtype(dtype).newbyteorder("<").str
    if key not in CODES_BY_KIND:
        raise ValueError(f"unsupported tensor dtype {dtype}")
    return CODES_BY_KIND[key]


@dataclass
class Frame:
    opcode: Opcode
    key: str = ""
    # PUT / TENSOR payload
    dtype: int = 0
    dims: tuple[int, ...] = ()
    data: bytes = b""
    # GET payload
    timeout_ms: int = 0
    # ERR payload
    message: str = ""

    def tensor(self) -> np.ndarray:
        dt = DTYPE_CODES[self.dtype]
        return np.frombuffer(self.data, dtype=dt).reshape(self.dims)


class ProtocolError(ConnectivityError):
    """Malformed frame on the wire."""


def tensor_frame(opcode: Opcode, key: str, array: np.ndarray) -> Frame:
    arr = np.asarray(array)
    shape = arr.shape  # before ascontiguousarray, which promotes 0-d to 1-d
    code = dtype_code(arr.dtype)
    data = np.ascontiguousarray(arr).astype(DTYPE_CODES[code], copy=False).tobytes()
    return Frame(opcode=opcode, key=key, dtype=code, dims=shape, data=data)


def encode_frame(frame: Frame) -> bytes:
    key = frame.key.encode("utf-8")
    if len(key) > MAX_KEY_BYTES:
        raise ValueError(f"key too long: {len(key)} bytes")
    parts = [_HEADER.pack(MAGIC, VERSION, int(frame.opcode), len(key)), key]
    if frame.opcode in (Opcode.PUT, Opcode.TENSOR):
        if len(frame.data) != _payload_size(frame.dtype, frame.dims):
            raise ValueError("tensor payload size does not match dims")
        parts.append(struct.pack("<BB", frame.dtype, len(frame.dims)))
        for d in frame.dims:
            parts.append(struct.pack("<Q", d))
        parts.append(frame.data)
    elif frame.opcode == Opcode.GET:
        parts.append(struct.pack("<I", frame.timeout_ms))
    elif frame.opcode == Opcode.ERR:
        msg = frame.message.encode("utf-8")
        parts.append(struct.pack("<H", len(msg)))
        parts.append(msg)
    return b"".join(parts)


def _payload_size(dtype: int, dims) -> int:
    if dtype not in DTYPE_CODES:
        raise ProtocolError(f"unknown dtype code {dtype}")
    n = 1
    for d in dims:
        n *= d
    return DTYPE_CODES[dtype].itemsize * n


def decode_frame(data: bytes) -> tuple[Frame, int]:
    """Decode one frame from a buffer; returns (frame, bytes consumed)."""
    if len(data) < _HEADER.size:
        raise ProtocolError("short frame header")
    magic, version, op, keylen = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ProtocolError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ProtocolError(f"unsupported protocol version {version}")
    try:
        opcode = Opcode(op)
    except ValueError as exc:
        raise ProtocolError(f"unknown opcode {op}") from exc
    pos = _HEADER.size
    if len(data) < pos + keylen:
        raise ProtocolError("truncated key")
    key = data[pos : pos + keylen].decode("utf-8")
    pos += keylen
    frame = Frame(opcode=opcode, key=key)
    if opcode in (Opcode.PUT, Opcode.TENSOR):
        if len(data) < pos + 2:
            raise ProtocolError("truncated tensor header")
        frame.dtype, ndim = struct.unpack_from("<BB", data, pos)
        pos += 2
        if len(data) < pos + 8 * ndim:
            raise ProtocolError("truncated tensor dims")
        frame.dims = tuple(
            struct.unpack_from("<Q", data, pos + 8 * k)[0] for k in range(ndim)
        )
        pos += 8 * ndim
        size = _payload_size(frame.dtype, frame.dims)
        if len(data) < pos + size:
            raise ProtocolError("truncated tensor payload")
        frame.data = data[pos : pos + size]
        pos += size
    elif opcode == Opcode.GET:
        if len(data) < pos + 4:
            raise ProtocolError("truncated GET timeout")
        frame.timeout_ms = struct.unpack_from("<I", data, pos)[0]
        pos += 4
    elif opcode == Opcode.ERR:
        if len(data) < pos + 2:
            raise ProtocolError("truncated ERR header")
        (msglen,) = struct.unpack_from("<H", data, pos)
        pos += 2
        if len(data) < pos + msglen:
            raise ProtocolError("truncated ERR message")
        frame.message = data[pos : pos + msglen].decode("utf-8")
        pos += msglen
    return frame, pos


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("connection closed mid-frame")
        buf.extend(chunk)
    return bytes(buf)


def read_frame(sock: socket.socket) -> Frame | None:
    """Read one frame from a socket; None on clean EOF at a frame boundary."""
    try:
        head = sock.recv(_HEADER.size)
    except socket.timeout:
        raise
    if not head:
        return None
    while len(head) < _HEADER.size:
        chunk = sock.recv(_HEADER.size - len(head))
        if not chunk:
            raise ConnectionError("connection closed mid-header")
        head += chunk
    magic, version, op, keylen = _HEADER.unpack(head)
    if magic != MAGIC:
        raise ProtocolError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ProtocolError(f"unsupported protocol version {version}")
    try:
        opcode = Opcode(op)
    except ValueError as exc:
        raise ProtocolError(f"unknown opcode {op}") from exc
    body = bytearray(_recv_exact(sock, keylen))
    if opcode in (Opcode.PUT, Opcode.TENSOR):
        th = _recv_exact(sock, 2)
        body.extend(th)
        _, ndim = struct.unpack("<BB", th)
        dims_raw = _recv_exact(sock, 8 * ndim)
        body.extend(dims_raw)
        dims = struct.unpack(f"<{ndim}Q", dims_raw) if ndim else ()
        body.extend(_recv_exact(sock, _payload_size(th[0], dims)))
    elif opcode == Opcode.GET:
        body.extend(_recv_exact(sock, 4))
    elif opcode == Opcode.ERR:
        mh = _recv_exact(sock, 2)
        body.extend(mh)
        body.extend(_recv_exact(sock, struct.unpack("<H", mh)[0]))
    frame, _ = decode_frame(head + bytes(body))
    return frame
