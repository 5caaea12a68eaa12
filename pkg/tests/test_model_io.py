import numpy as np
import pytest

from afc.agent.model_io import load_model, save_model
from afc.agent.network import ActorCritic
from afc.agent.policy import act
from afc.errors import CorruptPayloadError, VersionMismatchError


def test_roundtrip_preserves_actions(rng):
    ac = ActorCritic(30, 16, rng, log_std_init=-1.0)
    ac.set_flat_parameters(rng.normal(size=ac.flat_parameters().size).astype(np.float32))
    blob = save_model(ac)
    back = load_model(blob)
    obs = rng.normal(size=(5, 30)).astype(np.float32)
    q1, _, _, v1 = act(ac, obs, 0.176, deterministic=True)
    q2, _, _, v2 = act(back, obs, 0.176, deterministic=True)
    np.testing.assert_array_equal(q1, q2)
    np.testing.assert_array_equal(v1, v2)


def test_bad_magic_rejected(rng):
    blob = save_model(ActorCritic(10, 4, rng))
    with pytest.raises(VersionMismatchError):
        load_model(b"NOPE" + blob[4:])


def test_truncation_rejected(rng):
    blob = save_model(ActorCritic(10, 4, rng))
    with pytest.raises(CorruptPayloadError):
        load_model(blob[:-3])
    with pytest.raises(CorruptPayloadError):
        load_model(blob + b"\x00\x00")
