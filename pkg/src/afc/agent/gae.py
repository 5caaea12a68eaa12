"""Generalized advantage estimation over one trajectory."""

from __future__ import annotations

import numpy as np


def gae(rewards, values, bootstrap_value: float, gamma: float, lam: float):
    """Backward-recursive advantages and returns.

    delta_t = r_t + gamma * v_{t+1} - v_t with v_T = bootstrap_value,
    A_t = delta_t + gamma * lam * A_{t+1}, returns = advantages + values.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if rewards.shape != values.shape or rewards.ndim != 1 or rewards.size < 1:
        raise ValueError("rewards and values must be equal-length 1D arrays")
    n = rewards.size
    adv = np.empty(n)
    last = 0.0
    next_value = bootstrap_value
    for t in range(n - 1, -1, -1):
        delta = rewards[t] + gamma * next_value - values[t]
        last = delta + gamma * lam * last
        adv[t] = last
        next_value = values[t]
    return adv, adv + values
