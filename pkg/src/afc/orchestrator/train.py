"""Episode-driven PPO training against broker-coupled solver workers."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from afc.agent.gae import gae
from afc.agent.model_io import save_model
from afc.agent.network import ActorCritic, Adam
from afc.agent.policy import act
from afc.agent.ppo import ppo_update
from afc.errors import ConfigError
from afc.orchestrator.csvio import export_action, export_cl_cd, write_csv
from afc.orchestrator.episodes import EpisodeResult, WorkerFailure, run_episode
from afc.runconfig import RunConfig

log = logging.getLogger(__name__)

OBS_DIM = 3 * 85


@dataclass
class TrainOutcome:
    ac: ActorCritic
    reward_rows: list[tuple]
    final_traces: list[np.ndarray]


def _attach_gae(result: EpisodeResult, ac, cfg: RunConfig) -> None:
    """Per-trajectory advantages with a bootstrap value at the horizon.

    Episodes end on a time limit, not a terminal state, so the value of the
    final observation closes the recursion.
    """
    tr = cfg.train
    n_act = tr.actions_per_episode
    n_traj = tr.n_cfd * tr.n_pe
    _, _, _, boot_val = act(ac, result.bootstrap_obs, cfg.jets.q_max, deterministic=True)
    batch = result.batch
    adv = np.empty(len(batch))
    ret = np.empty(len(batch))
    for k in range(n_traj):
        sl = slice(k * n_act, (k + 1) * n_act)
        a, r = gae(batch.reward[sl], batch.value[sl], float(boot_val[k]),
                   cfg.ppo.gamma, cfg.ppo.lam)
        adv[sl] = a
        ret[sl] = r
    batch.advantage = adv
    batch.returns = ret


def snapshot_paths_in(out_dir: Path) -> list[str]:
    paths = sorted(str(p) for p in out_dir.glob("snapshot_*.afcs"))
    if not paths:
        raise ConfigError(
            f"no baseline snapshots in {out_dir}; run the baseline command first"
        )
    return paths


def train(
    cfg: RunConfig,
    config_path: str,
    out_dir: Path,
    broker_addr: str,
    st_baseline: float,
    cd_baseline: float,
) -> TrainOutcome:
    tr = cfg.train
    out_dir.mkdir(parents=True, exist_ok=True)
    snapshots = snapshot_paths_in(out_dir)
    t_action = tr.action_time(st_baseline)
    log.info(
        "training: %d episodes x %d actions, %d sims x %d pseudo-envs, "
        "T_episode=%.3f T_action=%.4f",
        tr.n_episodes, tr.actions_per_episode, tr.n_cfd, tr.n_pe,
        tr.episode_time(st_baseline), t_action,
    )

    init_rng = np.random.default_rng([tr.seed, 0xA11CE])
    ac = ActorCritic(OBS_DIM, cfg.ppo.hidden, init_rng,
                     log_std_init=cfg.ppo.log_std_init)
    optimizer = Adam(ac.parameters(), lr=cfg.ppo.learning_rate)

    reward_rows = []
    final_traces: list[np.ndarray] = []
    for ep in range(tr.n_episodes):
        result = None
        for attempt in range(tr.worker_retries + 1):
            rng = np.random.default_rng([tr.seed, ep, attempt])
            try:
                result = run_episode(
                    ep, ac, cfg, config_path, broker_addr, snapshots,
                    t_action, cd_baseline, rng,
                )
                break
            except WorkerFailure as exc:
                log.warning("episode %d attempt %d failed: %s", ep, attempt, exc)
                if attempt == tr.worker_retries:
                    raise
        _attach_gae(result, ac, cfg)
        update_rng = np.random.default_rng([tr.seed, ep, 0x0DD])
        losses = ppo_update(ac, result.batch, cfg.ppo, update_rng, optimizer)
        s = result.stats
        reward_rows.append((s.episode, s.reward_total, s.drag_term, s.lift_term))
        log.info(
            "episode %02d reward=%+.4f drag=%+.4f lift=%+.4f cd=%.4f |q|=%.4f "
            "kl=%.4f",
            ep, s.reward_total, s.drag_term, s.lift_term, s.mean_cd,
            s.mean_abs_q, losses["approx_kl"],
        )
        (out_dir / f"model_ep{ep:03d}.afcp").write_bytes(save_model(ac))
        final_traces = result.traces

    (out_dir / "model.afcp").write_bytes(save_model(ac))
    write_csv(out_dir / "reward.csv",
              ["episode", "total", "drag_term", "lift_term"], reward_rows)
    _export_trace_csvs(out_dir, final_traces[0], tr.n_pe)
    return TrainOutcome(ac=ac, reward_rows=reward_rows, final_traces=final_traces)


def _export_trace_csvs(out_dir: Path, trace: np.ndarray, n_pe: int) -> None:
    """cl_cd.csv and action.csv from one simulation trace (final episode)."""
    export_cl_cd(out_dir / "cl_cd.csv", trace[:, 0], trace[:, 1], trace[:, 2], n_pe)
    export_action(out_dir / "action.csv", trace[:, 0], trace[:, 5 : 5 + n_pe])
