"""Clipped-surrogate PPO update with hand-computed gradients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from afc.agent.network import ActorCritic, Adam, global_norm_clip
from afc.agent.policy import gaussian_entropy, log1m_tanh2
from afc.errors import ConfigError, NumericalError

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class PpoConfig:
    clip_ratio: float = 0.2
    gamma: float = 0.99
    lam: float = 0.95
    learning_rate: float = 3e-4
    epochs: int = 10
    minibatch_size: int = 480
    entropy_coef: float = 0.005
    value_coef: float = 0.5
    max_grad_norm: float = 0.5
    hidden: int = 128
    log_std_init: float = -2.5
    q_max: float = 0.176

    def __post_init__(self):
        if not 0 < self.clip_ratio < 1:
            raise ConfigError(f"clip_ratio must be in (0,1), got {self.clip_ratio}")
        for name in ("gamma", "lam"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ConfigError(f"{name} must be in (0,1], got {v}")


@dataclass
class TransitionBatch:
    """Pooled trajectories: one row per (env, pseudo-env, action step)."""

    obs: np.ndarray
    raw_action: np.ndarray
    log_prob: np.ndarray
    value: np.ndarray
    reward: np.ndarray
    done: np.ndarray
    env_id: np.ndarray
    pe_id: np.ndarray
    step_id: np.ndarray
    advantage: np.ndarray | None = None
    returns: np.ndarray | None = None

    def __len__(self) -> int:
        return self.raw_action.size


def clipped_surrogate(ratio, advantage, clip_ratio: float):
    """min(ratio * A, clip(ratio, 1-eps, 1+eps) * A), elementwise."""
    ratio = np.asarray(ratio, dtype=np.float64)
    advantage = np.asarray(advantage, dtype=np.float64)
    clipped = np.clip(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio) * advantage
    return np.minimum(ratio * advantage, clipped)


def loss_and_grads(ac: ActorCritic, obs, raw, old_log_prob, advantage, returns,
                   cfg: PpoConfig):
    """Total PPO loss and its gradients w.r.t. every parameter array."""
    n = raw.size
    mean, log_std, value = ac.forward(obs)
    mean = mean.astype(np.float64)
    value = value.astype(np.float64)
    std = np.exp(log_std)

    z = (raw - mean) / std
    log_prob = (
        -0.5 * (z * z + _LOG_2PI) - log_std - np.log(cfg.q_max) - log1m_tanh2(raw)
    )
    ratio = np.exp(log_prob - old_log_prob)
    unclipped = ratio * advantage
    clipped = np.clip(ratio, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio) * advantage
    surrogate = np.minimum(unclipped, clipped)
    entropy = gaussian_entropy(log_std)
    v_err = value - returns
    loss = (
        -float(np.mean(surrogate))
        + cfg.value_coef * float(np.mean(v_err * v_err))
        - cfg.entropy_coef * entropy
    )

    # Gradient of the surrogate flows only through the unclipped branch; inside
    # the clip band both branches coincide, so the tie is harmless.
    active = (unclipped <= clipped).astype(np.float64)
    dlp = -(advantage * active * ratio) / n
    dmean = dlp * (z / std)
    dls = float(np.sum(dlp * (z * z - 1.0))) - cfg.entropy_coef
    dvalue = 2.0 * cfg.value_coef * v_err / n

    aw, ab = ac.actor.backward(dmean[:, None])
    cw, cb = ac.critic.backward(dvalue[:, None])
    grads = []
    for w, b in zip(aw, ab):
        grads.extend([w.astype(np.float64), b.astype(np.float64)])
    for w, b in zip(cw, cb):
        grads.extend([w.astype(np.float64), b.astype(np.float64)])
    grads.append(np.array([dls * ac.log_std_grad_mask()]))

    stats = {
        "surrogate": float(np.mean(surrogate)),
        "value_loss": float(np.mean(v_err * v_err)),
        "entropy": entropy,
        "approx_kl": float(np.mean(old_log_prob - log_prob)),
        "clip_frac": float(np.mean((np.abs(ratio - 1.0) > cfg.clip_ratio).astype(np.float64))),
    }
    return loss, grads, stats


def normalize_advantages(advantage: np.ndarray) -> np.ndarray:
    a = np.asarray(advantage, dtype=np.float64)
    return (a - a.mean()) / (a.std() + 1e-8)


def ppo_update(
    ac: ActorCritic,
    batch: TransitionBatch,
    cfg: PpoConfig,
    rng: np.random.Generator,
    optimizer: Adam | None = None,
):
    """Run the epoch/minibatch gradient-ascent loop in place.

    Returns loss statistics averaged over all minibatches. The optimizer is
    created on first use when not supplied; pass a persistent one to keep
    moment estimates across episodes.
    """
    if len(batch) == 0:
        raise ValueError("empty transition batch")
    if batch.advantage is None or batch.returns is None:
        raise ValueError("batch advantages/returns missing: run gae first")
    optimizer = optimizer or Adam(ac.parameters(), lr=cfg.learning_rate)
    adv = normalize_advantages(batch.advantage)
    obs = batch.obs
    raw = batch.raw_action.astype(np.float64)
    old_lp = batch.log_prob.astype(np.float64)
    ret = batch.returns.astype(np.float64)

    n = len(batch)
    mb = min(cfg.minibatch_size, n)
    agg: dict[str, float] = {}
    count = 0
    for _ in range(cfg.epochs):
        perm = rng.permutation(n)
        for lo in range(0, n, mb):
            idx = perm[lo : lo + mb]
            loss, grads, stats = loss_and_grads(
                ac, obs[idx], raw[idx], old_lp[idx], adv[idx], ret[idx], cfg
            )
            if not np.isfinite(loss):
                raise NumericalError(f"non-finite PPO loss {loss}; update aborted")
            global_norm_clip(grads, cfg.max_grad_norm)
            optimizer.step(ac.parameters(), grads)
            for k, v in stats.items():
                agg[k] = agg.get(k, 0.0) + v
            count += 1
    return {k: v / count for k, v in agg.items()}


def grad_check(ac: ActorCritic, batch: TransitionBatch, cfg: PpoConfig,
               fd_step: float = 1e-5) -> float:
    """Max relative error of analytic vs central-finite-difference gradients.

    Meant for tiny float64 networks; evaluates the full-batch loss twice per
    parameter.
    """
    adv = normalize_advantages(batch.advantage)
    raw = batch.raw_action.astype(np.float64)
    old_lp = batch.log_prob.astype(np.float64)
    ret = batch.returns.astype(np.float64)

    def loss_at(flat: np.ndarray) -> float:
        ac.set_flat_parameters(flat)
        loss, _, _ = loss_and_grads(ac, batch.obs, raw, old_lp, adv, ret, cfg)
        return loss

    flat0 = ac.flat_parameters()
    _, grads, _ = loss_and_grads(ac, batch.obs, raw, old_lp, adv, ret, cfg)
    analytic = np.concatenate([g.ravel() for g in grads])

    worst = 0.0
    work = flat0.copy()
    for i in range(flat0.size):
        work[i] = flat0[i] + fd_step
        f_plus = loss_at(work)
        work[i] = flat0[i] - fd_step
        f_minus = loss_at(work)
        work[i] = flat0[i]
        fd = (f_plus - f_minus) / (2.0 * fd_step)
        denom = max(abs(analytic[i]), abs(fd), 1e-6)
        worst = max(worst, abs(analytic[i] - fd) / denom)
    ac.set_flat_parameters(flat0)
    return worst
