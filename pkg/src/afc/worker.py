"""Solver worker process: one CFD simulation driven over the broker.

Spawned per episode (`python -m afc.worker ...`). Publishes witness states,
blocks on the per-pseudo-environment action keys, advances the flow with the
linearly interpolated spanwise-mean rate, then publishes interval-averaged
force coefficients. Key layout:

    ep{episode}.env{e}.pe{j}.state.{n}    f32[3 * n_witness]
    ep{episode}.env{e}.pe{j}.action.{n}   f64[1]
    ep{episode}.env{e}.pe{j}.reward.{n}   f64[3] = (cd_mean, cl_mean, t_end)
    ep{episode}.env{e}.trace              f64[steps, 5 + n_pe]

The worker holds no random state, so a run is a pure function of the
checkpoint, the config, and the received actions.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from afc.broker.client import BrokerClient
from afc.errors import AfcError, ConfigError, ConnectivityError, NumericalError
from afc.flow.checkpoint import load_checkpoint
from afc.flow.domain import build_witness_layout
from afc.flow.jets import JetAction
from afc.flow.solver import CylinderFlow
from afc.flow.witness import sample_witness
from afc.orchestrator.trace import ForceTrace
from afc.runconfig import load_config

log = logging.getLogger("afc.worker")


def run_worker(
    config_path: str,
    broker_addr: str,
    episode: int,
    env_index: int,
    snapshot_path: str,
    n_actions: int,
    t_action: float,
) -> None:
    cfg = load_config(config_path)
    sim = cfg.sim
    flow = CylinderFlow(sim, cfg.jets)
    snapshot = Path(snapshot_path)
    if not snapshot.exists():
        raise ConfigError(f"snapshot not found: {snapshot}")
    flow.restore(load_checkpoint(snapshot.read_bytes(), sim.nx, sim.ny))
    layout = build_witness_layout(sim)
    n_pe = sim.n_pe
    timeout_ms = int(cfg.get_timeout_s * 1000)
    prefix = f"ep{episode}.env{env_index}"

    trace = ForceTrace(n_pe)
    action = JetAction.constant(np.zeros(n_pe), flow.t)

    def recorder(f, _q):
        trace.record(f, action)

    with BrokerClient(broker_addr) as client:
        for n in range(n_actions):
            obs = sample_witness(flow, layout)
            for j in range(n_pe):
                client.put_tensor(f"{prefix}.pe{j}.state.{n}", obs[j].astype("<f4"))
            q_new = np.empty(n_pe)
            for j in range(n_pe):
                arr = client.get_tensor(f"{prefix}.pe{j}.action.{n}", timeout_ms)
                if arr is None:
                    raise ConnectivityError(
                        f"timed out waiting for {prefix}.pe{j}.action.{n}"
                    )
                q_new[j] = cfg.jets.clamp(float(np.asarray(arr).ravel()[0]))
            t0 = flow.t
            action = action.retarget(q_new, t0, t0 + t_action)
            flow.advance(t_action, action, recorder)
            cd_mean, cl_mean = trace.window_mean(t0, flow.t)
            payload = np.array([cd_mean, cl_mean, flow.t], dtype="<f8")
            for j in range(n_pe):
                client.put_tensor(f"{prefix}.pe{j}.reward.{n}", payload)
            log.debug("episode %d env %d action %d/%d done t=%.3f",
                      episode, env_index, n + 1, n_actions, flow.t)
        obs = sample_witness(flow, layout)
        for j in range(n_pe):
            client.put_tensor(f"{prefix}.pe{j}.state.{n_actions}", obs[j].astype("<f4"))
        client.put_tensor(f"{prefix}.trace", trace.matrix().astype("<f8"))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="afc.worker", description=__doc__)
    parser.add_argument("--config", required=True)
    parser.add_argument("--broker", required=True, help="HOST:PORT of the tensor broker")
    parser.add_argument("--episode", type=int, required=True)
    parser.add_argument("--env", type=int, required=True)
    parser.add_argument("--snapshot", required=True)
    parser.add_argument("--actions", type=int, required=True)
    parser.add_argument("--t-action", type=float, required=True)
    args = parser.parse_args(argv)
    logging.basicConfig(level=os.environ.get("AFC_LOG", "WARNING").upper())
    try:
        run_worker(args.config, args.broker, args.episode, args.env,
                   args.snapshot, args.actions, args.t_action)
    except ConfigError as exc:
        log.error("%s", exc)
        return 2
    except NumericalError as exc:
        log.error("%s", exc)
        return 3
    except (ConnectivityError, AfcError) as exc:
        log.error("%s", exc)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
