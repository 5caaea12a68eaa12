"""Training and evaluation loops tying solver workers, broker and agent."""

from afc.orchestrator.rewards import aggregate_reward, local_reward
from afc.orchestrator.stats import SignalStats, signal_statistics

__all__ = ["local_reward", "aggregate_reward", "signal_statistics", "SignalStats"]
