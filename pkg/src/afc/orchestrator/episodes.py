"""Trainer side of one episode: spawn workers, exchange tensors, pool rewards."""

from __future__ import annotations

import logging
import subprocess
import sys
from dataclasses import dataclass

import numpy as np

from afc.agent.policy import act
from afc.agent.ppo import TransitionBatch
from afc.broker.client import BrokerClient
from afc.errors import ConnectivityError
from afc.orchestrator.rewards import aggregate_reward, local_reward
from afc.runconfig import RunConfig

log = logging.getLogger(__name__)


class WorkerFailure(ConnectivityError):
    """A solver worker timed out or crashed; the episode can be retried."""


@dataclass
class EpisodeStats:
    episode: int
    reward_total: float
    drag_term: float
    lift_term: float
    mean_abs_q: float
    mean_cd: float


@dataclass
class EpisodeResult:
    batch: TransitionBatch
    bootstrap_obs: np.ndarray  # (n_traj, obs_dim) final observations
    stats: EpisodeStats
    traces: list[np.ndarray]   # per simulation: rows (t, cd, cl, cdp, cdv, q...)


def spawn_worker(config_path: str, broker_addr: str, episode: int, env: int,
                 snapshot_path: str, n_actions: int, t_action: float) -> subprocess.Popen:
    cmd = [
        sys.executable, "-m", "afc.worker",
        "--config", str(config_path),
        "--broker", broker_addr,
        "--episode", str(episode),
        "--env", str(env),
        "--snapshot", str(snapshot_path),
        "--actions", str(n_actions),
        "--t-action", f"{t_action!r}",
    ]
    return subprocess.Popen(cmd, stdout=subprocess.DEVNULL, stderr=subprocess.PIPE)


def _cleanup(procs, client: BrokerClient | None, prefix: str) -> None:
    for p in procs:
        if p.poll() is None:
            p.kill()
    for p in procs:
        try:
            p.wait(timeout=10)
        except subprocess.TimeoutExpired:
            pass
    if client is not None:
        try:
            client.delete(prefix)
        except ConnectivityError:
            pass


def run_episode(
    episode_id: int,
    ac,
    cfg: RunConfig,
    config_path: str,
    broker_addr: str,
    snapshot_paths: list[str],
    t_action: float,
    cd_baseline: float,
    rng: np.random.Generator,
    deterministic: bool = False,
) -> EpisodeResult:
    """Drive n_cfd workers through one episode and pool the trajectories.

    Raises WorkerFailure on any worker timeout or crash; the caller retries
    with a fresh rng stream.
    """
    tr = cfg.train
    n_env, n_pe, n_act = tr.n_cfd, tr.n_pe, tr.actions_per_episode
    n_traj = n_env * n_pe
    timeout_ms = int(cfg.get_timeout_s * 1000)
    prefix = f"ep{episode_id}."

    chosen = [snapshot_paths[int(rng.integers(len(snapshot_paths)))] for _ in range(n_env)]
    procs = []
    client = None
    try:
        client = BrokerClient(broker_addr)
        for w in range(n_env):
            procs.append(
                spawn_worker(config_path, broker_addr, episode_id, w,
                             chosen[w], n_act, t_action)
            )

        obs_dim = None
        obs_hist = None
        raw_hist = np.empty((n_act, n_traj))
        lp_hist = np.empty((n_act, n_traj))
        val_hist = np.empty((n_act, n_traj))
        rew_hist = np.empty((n_act, n_traj))
        r_local_hist = np.empty((n_act, n_traj))
        cd_hist = np.empty((n_act, n_env))
        cl_hist = np.empty((n_act, n_env))

        def fetch(key: str) -> np.ndarray:
            arr = client.get_tensor(key, timeout_ms)
            if arr is None:
                dead = [f"env{w} rc={p.poll()}" for w, p in enumerate(procs) if p.poll() not in (None, 0)]
                raise WorkerFailure(
                    f"timed out waiting for {key}" + (f" ({'; '.join(dead)})" if dead else "")
                )
            return arr

        for n in range(n_act):
            rows = []
            for w in range(n_env):
                for j in range(n_pe):
                    rows.append(fetch(f"ep{episode_id}.env{w}.pe{j}.state.{n}").astype(np.float64))
            obs = np.vstack(rows)
            if obs_hist is None:
                obs_dim = obs.shape[1]
                obs_hist = np.empty((n_act, n_traj, obs_dim), dtype=np.float32)
            obs_hist[n] = obs.astype(np.float32)

            q, raw, lp, val = act(ac, obs, cfg.jets.q_max, rng=rng, deterministic=deterministic)
            raw_hist[n], lp_hist[n], val_hist[n] = raw, lp, val
            for w in range(n_env):
                for j in range(n_pe):
                    client.put_tensor(
                        f"ep{episode_id}.env{w}.pe{j}.action.{n}",
                        np.array([q[w * n_pe + j]], dtype="<f8"),
                    )

            for w in range(n_env):
                r_loc = np.empty(n_pe)
                for j in range(n_pe):
                    cd_mean, cl_mean, _t = fetch(f"ep{episode_id}.env{w}.pe{j}.reward.{n}")
                    r_loc[j] = local_reward(cd_baseline, cd_mean, cl_mean, tr.alpha)
                    if j == 0:
                        cd_hist[n, w], cl_hist[n, w] = cd_mean, cl_mean
                r_local_hist[n, w * n_pe : (w + 1) * n_pe] = r_loc
                rew_hist[n, w * n_pe : (w + 1) * n_pe] = aggregate_reward(r_loc, tr.beta)

        boot_rows = []
        for w in range(n_env):
            for j in range(n_pe):
                boot_rows.append(fetch(f"ep{episode_id}.env{w}.pe{j}.state.{n_act}").astype(np.float64))
        bootstrap_obs = np.vstack(boot_rows)
        traces = [fetch(f"ep{episode_id}.env{w}.trace") for w in range(n_env)]

        for w, p in enumerate(procs):
            try:
                rc = p.wait(timeout=60)
            except subprocess.TimeoutExpired as exc:
                raise WorkerFailure(f"worker env{w} did not exit") from exc
            if rc != 0:
                err = p.stderr.read().decode(errors="replace")[-500:] if p.stderr else ""
                raise WorkerFailure(f"worker env{w} exited with {rc}: {err}")

        client.delete(prefix)
    except ConnectivityError:
        _cleanup(procs, client, prefix)
        raise
    finally:
        if client is not None:
            client.close()

    # Pool trajectories: trajectory index k = env * n_pe + pe, steps in order.
    env_id = np.repeat(np.arange(n_env), n_pe)
    pe_id = np.tile(np.arange(n_pe), n_env)
    done = np.zeros((n_act, n_traj), dtype=bool)
    done[-1, :] = True
    batch = TransitionBatch(
        obs=obs_hist.transpose(1, 0, 2).reshape(n_traj * n_act, obs_dim),
        raw_action=raw_hist.T.reshape(-1),
        log_prob=lp_hist.T.reshape(-1),
        value=val_hist.T.reshape(-1),
        reward=rew_hist.T.reshape(-1),
        done=done.T.reshape(-1),
        env_id=np.repeat(env_id, n_act),
        pe_id=np.repeat(pe_id, n_act),
        step_id=np.tile(np.arange(n_act), n_traj),
    )

    drag_term = float(np.mean(cd_baseline - cd_hist))
    lift_term = float(-tr.alpha * np.mean(np.abs(cl_hist)))
    stats = EpisodeStats(
        episode=episode_id,
        reward_total=drag_term + lift_term,
        drag_term=drag_term,
        lift_term=lift_term,
        mean_abs_q=float(np.mean(np.abs(cfg.jets.q_max * np.tanh(raw_hist)))),
        mean_cd=float(np.mean(cd_hist)),
    )
    return EpisodeResult(batch=batch, bootstrap_obs=bootstrap_obs, stats=stats, traces=traces)
