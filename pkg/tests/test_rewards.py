import numpy as np
import pytest

from afc.orchestrator.rewards import aggregate_reward, local_reward


def test_table_values_arithmetic():
    r = local_reward(1.409, 1.278, 0.029, alpha=0.3)
    assert r == pytest.approx(0.131 - 0.0087, abs=1e-12)
    assert r == pytest.approx(0.1223, abs=1e-12)


def test_baseline_drag_zero_lift_gives_zero():
    assert local_reward(1.409, 1.409, 0.0, 0.3) == 0.0


def test_lift_sign_invariance(rng):
    for _ in range(100):
        cdb, cd, cl, a = rng.uniform(0.5, 2.0, 4)
        assert local_reward(cdb, cd, cl, a) == local_reward(cdb, cd, -cl, a)


def test_beta_one_is_identity(rng):
    r = rng.normal(size=6)
    np.testing.assert_array_equal(aggregate_reward(r, beta=1.0), r)


def test_equal_rewards_fixed_point():
    r = np.full(5, 0.37)
    np.testing.assert_allclose(aggregate_reward(r, 0.8), r, rtol=1e-15)


def test_four_jet_example():
    r = np.array([1.0, 0.5, 0.0, 0.5])
    out = aggregate_reward(r, beta=0.8)
    np.testing.assert_allclose(out, [0.9, 0.5, 0.1, 0.5], atol=1e-12)


def test_mean_preservation_property(rng):
    """Convex combination preserves the mean for any beta in [0, 1]."""
    for _ in range(10_000):
        n = int(rng.integers(1, 12))
        r = rng.normal(size=n) * rng.uniform(0.1, 10)
        beta = float(rng.uniform(0.0, 1.0))
        out = aggregate_reward(r, beta)
        assert abs(out.mean() - r.mean()) <= 1e-12 * max(1.0, abs(r.mean()))


def test_argmax_invariance_property(rng):
    for _ in range(10_000):
        n = int(rng.integers(2, 12))
        r = rng.normal(size=n)
        beta = float(rng.uniform(1e-6, 1.0))
        out = aggregate_reward(r, beta)
        assert int(np.argmax(out)) == int(np.argmax(r))


def test_empty_rejected():
    with pytest.raises(ValueError):
        aggregate_reward(np.array([]), 0.8)
