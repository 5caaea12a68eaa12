"""The committed golden corpus must match the current encoder bit for bit."""

import json
from pathlib import Path

import pytest

from afc.broker.wire import decode_frame, encode_frame
from tools.make_golden_frames import spec_entries

GOLDEN = Path(__file__).resolve().parent.parent / "client-ts" / "test" / "golden"


@pytest.mark.skipif(not GOLDEN.exists(), reason="golden corpus not generated")
def test_corpus_matches_encoder():
    manifest = {e["file"]: e for e in json.loads((GOLDEN / "manifest.json").read_text())}
    names = set()
    for name, frame, _extra in spec_entries():
        blob = (GOLDEN / f"{name}.bin").read_bytes()
        assert encode_frame(frame) == blob, f"{name} drifted from the committed corpus"
        decoded, used = decode_frame(blob)
        assert used == len(blob)
        assert decoded.opcode == frame.opcode and decoded.key == frame.key
        assert manifest[f"{name}.bin"]["bytes"] == len(blob)
        names.add(f"{name}.bin")
    assert names == set(manifest)
