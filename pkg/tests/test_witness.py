import numpy as np

from afc.flow.config import SimConfig
from afc.flow.domain import build_witness_layout
from afc.flow.solver import CylinderFlow
from afc.flow.witness import sample_witness, witness_cp


def test_uniform_pressure_gives_zero_observation(tiny_sim):
    flow = CylinderFlow(tiny_sim)
    flow._p[:, :] = 0.42
    layout = build_witness_layout(tiny_sim)
    obs = sample_witness(flow, layout)
    assert obs.shape == (2, 255)
    np.testing.assert_allclose(obs, 0.0, atol=1e-12)


def test_single_pseudo_env_neighbors_are_self(tiny_sim):
    cfg = SimConfig(lx=12.0, ly=8.0, cylinder_center=(4.0, 4.0), h=0.1, n_pe=1)
    flow = CylinderFlow(cfg)
    for _ in range(30):
        flow.step(flow.stable_dt())
    layout = build_witness_layout(cfg)
    obs = sample_witness(flow, layout)
    assert obs.shape == (1, 255)
    np.testing.assert_array_equal(obs[0, :85], obs[0, 85:170])
    np.testing.assert_array_equal(obs[0, 85:170], obs[0, 170:])


def test_replicated_envs_identical_and_consistent(tiny_sim):
    flow = CylinderFlow(tiny_sim)
    for _ in range(30):
        flow.step(flow.stable_dt())
    layout = build_witness_layout(tiny_sim)
    base = witness_cp(flow, layout)
    obs = sample_witness(flow, layout, n_pe=10)
    assert obs.shape == (10, 255)
    for j in range(10):
        # neighbors of pseudo-env j are (j-1) % 10 and (j+1) % 10; replicated
        # slices make all three blocks equal to the local probe vector.
        np.testing.assert_array_equal(obs[j, 85:170], base)
        np.testing.assert_array_equal(obs[j], obs[0])
