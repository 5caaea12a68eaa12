"""Reward shaping: drag reduction minus a lift penalty, then spanwise mixing."""

from __future__ import annotations

import numpy as np


def local_reward(cd_baseline: float, cd_mean: float, cl_mean: float, alpha: float) -> float:
    """Per-pseudo-environment reward for one action interval.

    cd_mean and cl_mean are time averages over the just-completed interval.
    """
    return (cd_baseline - cd_mean) - alpha * abs(cl_mean)


def aggregate_reward(rewards: np.ndarray, beta: float) -> np.ndarray:
    """Blend each local reward with the mean over all jets of one simulation.

    R_i = beta * r_i + (1 - beta) / n * sum_j r_j. A convex combination, so
    the mean over i is preserved and the argmax is unchanged for beta > 0.
    """
    r = np.asarray(rewards, dtype=np.float64)
    if r.ndim != 1 or r.size < 1:
        raise ValueError("rewards must be a non-empty 1D array")
    return beta * r + (1.0 - beta) / r.size * np.sum(r)
