import numpy as np
import pytest

from afc.errors import CorruptPayloadError, ShapeMismatchError, VersionMismatchError
from afc.flow.checkpoint import load_checkpoint, save_checkpoint
from afc.flow.solver import CylinderFlow


def test_roundtrip_bit_exact(tiny_sim):
    flow = CylinderFlow(tiny_sim)
    for _ in range(20):
        flow.step(flow.stable_dt(), q=0.03)
    field = flow.field()
    blob = save_checkpoint(field)
    back = load_checkpoint(blob)
    assert back.t == field.t
    assert np.array_equal(back.u, field.u)
    assert np.array_equal(back.v, field.v)
    assert np.array_equal(back.p, field.p)
    # restoring and re-saving reproduces the same bytes
    flow2 = CylinderFlow(tiny_sim)
    flow2.restore(back)
    assert save_checkpoint(flow2.field()) == blob


def test_truncated_payload_rejected(tiny_sim):
    blob = save_checkpoint(CylinderFlow(tiny_sim).field())
    with pytest.raises(CorruptPayloadError):
        load_checkpoint(blob[: len(blob) // 2])
    with pytest.raises(CorruptPayloadError):
        load_checkpoint(blob + b"\x00")
    with pytest.raises(CorruptPayloadError):
        load_checkpoint(b"AF")


def test_bad_magic_and_version(tiny_sim):
    blob = save_checkpoint(CylinderFlow(tiny_sim).field())
    with pytest.raises(VersionMismatchError):
        load_checkpoint(b"XXXX" + blob[4:])
    with pytest.raises(VersionMismatchError):
        load_checkpoint(blob[:4] + b"\x63\x00" + blob[6:])


def test_grid_shape_mismatch(tiny_sim):
    blob = save_checkpoint(CylinderFlow(tiny_sim).field())
    with pytest.raises(ShapeMismatchError):
        load_checkpoint(blob, nx=999, ny=111)


def test_restore_rejects_other_grid(tiny_sim):
    from afc.flow.config import SimConfig

    other = SimConfig(lx=10.0, ly=6.0, cylinder_center=(3.0, 3.0), h=0.1)
    blob = save_checkpoint(CylinderFlow(other).field())
    flow = CylinderFlow(tiny_sim)
    with pytest.raises(ShapeMismatchError):
        flow.restore(load_checkpoint(blob, tiny_sim.nx, tiny_sim.ny))
