"""Blocking single-connection broker client.

Transport failures raise ConnectivityError (retryable); a GET that times out
returns None, which is a normal outcome, not an error. One client instance
must not be shared between threads.
"""

from __future__ import annotations

import socket

import numpy as np

from afc.errors import ConnectivityError
from afc.broker.wire import Frame, Opcode, encode_frame, read_frame, tensor_frame


class BrokerClient:
    def __init__(self, address: str, connect_timeout: float = 10.0):
        host, _, port = address.rpartition(":")
        if not host or not port.isdigit():
            raise ConnectivityError(f"bad broker address {address!r} (expected HOST:PORT)")
        self.address = address
        try:
            self._sock = socket.create_connection((host, int(port)), timeout=connect_timeout)
        except OSError as exc:
            raise ConnectivityError(f"cannot connect to broker at {address}: {exc}") from exc
        self._sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._sock.settimeout(None)

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass

    def __enter__(self) -> "BrokerClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def _roundtrip(self, frame: Frame, timeout: float | None = None) -> Frame:
        try:
            self._sock.settimeout(timeout)
            self._sock.sendall(encode_frame(frame))
            reply = read_frame(self._sock)
        except (OSError, ConnectionError) as exc:
            raise ConnectivityError(f"broker transport failure: {exc}") from exc
        finally:
            try:
                self._sock.settimeout(None)
            except OSError:
                pass
        if reply is None:
            raise ConnectivityError("broker closed the connection")
        if reply.opcode == Opcode.ERR:
            raise ConnectivityError(f"broker error: {reply.message}")
        return reply

    def ping(self) -> None:
        self._roundtrip(Frame(opcode=Opcode.PING))

    def put_tensor(self, key: str, array: np.ndarray) -> None:
        self._roundtrip(tensor_frame(Opcode.PUT, key, array))

    def get_tensor(self, key: str, timeout_ms: int) -> np.ndarray | None:
        """Block until the key exists or the timeout elapses (then None)."""
        frame = Frame(opcode=Opcode.GET, key=key, timeout_ms=timeout_ms)
        # Socket deadline comfortably beyond the store-side timeout.
        reply = self._roundtrip(frame, timeout=timeout_ms / 1000.0 + 30.0)
        if reply.opcode == Opcode.NOT_FOUND:
            return None
        if reply.opcode != Opcode.TENSOR:
            raise ConnectivityError(f"unexpected reply opcode {reply.opcode}")
        return reply.tensor()

    def delete(self, prefix: str) -> None:
        """Remove every key starting with prefix; idempotent."""
        self._roundtrip(Frame(opcode=Opcode.DEL, key=prefix))
