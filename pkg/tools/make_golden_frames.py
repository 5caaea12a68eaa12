#!/usr/bin/env python3
"""Generate the golden wire-format corpus consumed by the client conformance
tests (client-ts/test/golden). Frame values use exact binary fractions so a
JSON manifest can describe them losslessly in any language.

Usage: python3 tools/make_golden_frames.py [out_dir]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from afc.broker.wire import Frame, Opcode, encode_frame, tensor_frame


def spec_entries():
    yield "ping", Frame(opcode=Opcode.PING), {}
    yield "ok_bare", Frame(opcode=Opcode.OK), {}
    yield "ok_key", Frame(opcode=Opcode.OK, key="ep0.env1.pe2.action.3"), {}
    yield "not_found", Frame(opcode=Opcode.NOT_FOUND, key="missing.key"), {}
    yield "err_message", Frame(opcode=Opcode.ERR, key="bad.key",
                               message="capacity exceeded (268435456 bytes)"), {}
    yield "get_timeout", Frame(opcode=Opcode.GET, key="ep0.env0.pe0.action.0",
                               timeout_ms=1500), {"timeout_ms": 1500}
    yield "del_prefix", Frame(opcode=Opcode.DEL, key="ep0."), {}

    f32 = np.array([[1.5, -2.25, 0.0], [1024.0, -0.5, 7.75]], dtype="<f4")
    yield "put_f32_2x3", tensor_frame(Opcode.PUT, "state.grid", f32), {
        "dtype": "f32", "dims": [2, 3], "values": f32.ravel().tolist()}

    f64 = np.array([0.125 * k - 3.0 for k in range(85)], dtype="<f8")
    yield "put_f64_85", tensor_frame(Opcode.PUT, "ep2.env0.pe4.state.17", f64), {
        "dtype": "f64", "dims": [85], "values": f64.tolist()}

    i64 = np.array([-(2**40), -1, 0, 2**52], dtype="<i8")
    yield "put_i64_4", tensor_frame(Opcode.PUT, "counters", i64), {
        "dtype": "i64", "dims": [4], "values": [int(v) for v in i64]}

    empty = np.zeros((0,), dtype="<f8")
    yield "put_f64_empty", tensor_frame(Opcode.PUT, "empty.dims0", empty), {
        "dtype": "f64", "dims": [0], "values": []}

    scalar = np.array(42.5, dtype="<f8")
    yield "put_f64_scalar", tensor_frame(Opcode.PUT, "just.one", scalar), {
        "dtype": "f64", "dims": [], "values": [42.5]}

    uni = np.array([3.5], dtype="<f4")
    yield "put_unicode_key", tensor_frame(Opcode.PUT, "ключ.θ", uni), {
        "dtype": "f32", "dims": [1], "values": [3.5]}

    resp = np.array([0.25, -8.0, 655360.0], dtype="<f4")
    yield "tensor_response", tensor_frame(Opcode.TENSOR, "reply.key", resp), {
        "dtype": "f32", "dims": [3], "values": resp.tolist()}


def main(out_dir: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for name, frame, extra in spec_entries():
        blob = encode_frame(frame)
        (out / f"{name}.bin").write_bytes(blob)
        entry = {
            "file": f"{name}.bin",
            "opcode": frame.opcode.name,
            "key": frame.key,
            "bytes": len(blob),
        }
        if frame.opcode == Opcode.ERR:
            entry["message"] = frame.message
        entry.update(extra)
        manifest.append(entry)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n")
    print(f"wrote {len(manifest)} golden frames to {out}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "client-ts/test/golden")
