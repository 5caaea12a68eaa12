"""Sampling and density of the tanh-squashed Gaussian jet policy.

The network emits a raw Gaussian action; the applied mass flow rate is
Q = q_max * tanh(raw), which keeps every emitted action strictly inside the
allowed bounds and keeps log-densities finite at the edges. Stored
log-probabilities are densities of Q and include the change-of-variables
correction (a function of raw only, so it cancels in PPO ratios).
"""

from __future__ import annotations

import numpy as np

from afc.errors import NumericalError

_LOG_2PI = float(np.log(2.0 * np.pi))


def log1m_tanh2(raw: np.ndarray) -> np.ndarray:
    """log(1 - tanh(raw)^2), numerically stable for large |raw|."""
    raw = np.asarray(raw, dtype=np.float64)
    return 2.0 * (np.log(2.0) - raw - np.logaddexp(0.0, -2.0 * raw))


def gaussian_log_pdf(raw, mean, log_std):
    z = (raw - mean) / np.exp(log_std)
    return -0.5 * (z * z + _LOG_2PI) - log_std


def log_prob_raw(raw, mean, log_std, q_max: float):
    """Log-density of the squashed action Q for a stored raw action."""
    return gaussian_log_pdf(raw, mean, log_std) - np.log(q_max) - log1m_tanh2(raw)


def gaussian_entropy(log_std: float) -> float:
    return 0.5 * (1.0 + _LOG_2PI) + log_std


def act(
    ac,
    obs: np.ndarray,
    q_max: float,
    rng: np.random.Generator | None = None,
    deterministic: bool = False,
):
    """Policy step for a batch of observations.

    Returns (q, raw, log_prob, value) as float64 arrays of length N.
    Deterministic mode uses the mean action and needs no rng.
    """
    obs = np.atleast_2d(obs)
    mean, log_std, value = ac.forward(obs)
    mean = mean.astype(np.float64)
    value = value.astype(np.float64)
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(value))):
        raise NumericalError("policy network produced non-finite output")
    if deterministic:
        raw = mean.copy()
    else:
        if rng is None:
            raise ValueError("stochastic mode requires an rng")
        raw = mean + np.exp(log_std) * rng.standard_normal(mean.size)
    q = q_max * np.tanh(raw)
    lp = log_prob_raw(raw, mean, log_std, q_max)
    return q, raw, lp, value
