"""Threaded broker service: last-write-wins tensor store with blocking GETs."""

from __future__ import annotations

import logging
import socket
import threading
import time

from afc.errors import ConnectivityError
from afc.broker.wire import Frame, Opcode, ProtocolError, encode_frame, read_frame

log = logging.getLogger(__name__)


class BrokerServer:
    """Accepts concurrent clients; per-key operations are linearizable.

    Values are stored as immutable (dtype, dims, bytes) triples, so a reader
    can never observe a torn write. A PUT that would push the store past the
    capacity limit is answered with ERR and changes nothing.
    """

    def __init__(self, host: str = "127.0.0.1", port: int = 0, capacity_mb: float = 256.0):
        self._store: dict[str, tuple[int, tuple[int, ...], bytes]] = {}
        self._lock = threading.Lock()
        self._changed = threading.Condition(self._lock)
        self._bytes_used = 0
        self._capacity = int(capacity_mb * 1024 * 1024)
        self._stopping = threading.Event()
        self._threads: list[threading.Thread] = []
        try:
            self._sock = socket.create_server((host, port))
        except OSError as exc:
            raise ConnectivityError(f"cannot bind broker to {host}:{port}: {exc}") from exc
        self.host, self.port = self._sock.getsockname()[:2]
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)

    @property
    def address(self) -> str:
        return f"{self.host}:{self.port}"

    def start(self) -> "BrokerServer":
        self._accept_thread.start()
        return self

    def stop(self) -> None:
        self._stopping.set()
        try:
            self._sock.close()
        except OSError:
            pass
        with self._changed:
            self._changed.notify_all()

    def serve_forever(self) -> None:
        self.start()
        try:
            while not self._stopping.is_set():
                time.sleep(0.2)
        except KeyboardInterrupt:
            self.stop()

    def __enter__(self) -> "BrokerServer":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.stop()

    # --- internals -----------------------------------------------------------

    def _accept_loop(self) -> None:
        while not self._stopping.is_set():
            try:
                conn, addr = self._sock.accept()
            except OSError:
                return
            t = threading.Thread(target=self._serve_client, args=(conn, addr), daemon=True)
            t.start()
            self._threads.append(t)

    def _serve_client(self, conn: socket.socket, addr) -> None:
        conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        try:
            while not self._stopping.is_set():
                try:
                    frame = read_frame(conn)
                except (ProtocolError, UnicodeDecodeError) as exc:
                    log.warning("protocol violation from %s: %s", addr, exc)
                    self._send(conn, Frame(opcode=Opcode.ERR, message=str(exc)))
                    return
                if frame is None:
                    return
                reply = self._handle(frame)
                self._send(conn, reply)
        except (ConnectionError, OSError):
            return
        finally:
            try:
                conn.close()
            except OSError:
                pass

    @staticmethod
    def _send(conn: socket.socket, frame: Frame) -> None:
        try:
            conn.sendall(encode_frame(frame))
        except OSError:
            pass

    def _handle(self, frame: Frame) -> Frame:
        op = frame.opcode
        if op == Opcode.PING:
            return Frame(opcode=Opcode.OK)
        if op == Opcode.PUT:
            if not frame.key:
                return Frame(opcode=Opcode.ERR, message="empty key")
            with self._lock:
                old = self._store.get(frame.key)
                delta = len(frame.data) - (len(old[2]) if old else 0)
                if self._bytes_used + delta > self._capacity:
                    return Frame(
                        opcode=Opcode.ERR,
                        key=frame.key,
                        message=f"capacity exceeded ({self._capacity} bytes)",
                    )
                self._store[frame.key] = (frame.dtype, frame.dims, frame.data)
                self._bytes_used += delta
                self._changed.notify_all()
            return Frame(opcode=Opcode.OK, key=frame.key)
        if op == Opcode.GET:
            deadline = time.monotonic() + frame.timeout_ms / 1000.0
            with self._lock:
                while True:
                    hit = self._store.get(frame.key)
                    if hit is not None:
                        dtype, dims, data = hit
                        return Frame(
                            opcode=Opcode.TENSOR, key=frame.key,
                            dtype=dtype, dims=dims, data=data,
                        )
                    remaining = deadline - time.monotonic()
                    if remaining <= 0 or self._stopping.is_set():
                        return Frame(opcode=Opcode.NOT_FOUND, key=frame.key)
                    self._changed.wait(remaining)
        if op == Opcode.DEL:
            with self._lock:
                doomed = [k for k in self._store if k.startswith(frame.key)]
                for k in doomed:
                    self._bytes_used -= len(self._store.pop(k)[2])
            return Frame(opcode=Opcode.OK, key=frame.key)
        return Frame(opcode=Opcode.ERR, key=frame.key, message=f"bad request opcode {op}")
