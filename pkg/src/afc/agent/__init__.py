"""PPO actor-critic over the scalar jet mass-flow action."""

from afc.agent.gae import gae
from afc.agent.network import ActorCritic
from afc.agent.policy import act, log_prob_raw
from afc.agent.ppo import PpoConfig, TransitionBatch, grad_check, ppo_update

__all__ = [
    "ActorCritic",
    "PpoConfig",
    "TransitionBatch",
    "act",
    "log_prob_raw",
    "gae",
    "grad_check",
    "ppo_update",
]
