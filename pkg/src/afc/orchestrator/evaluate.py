"""Deterministic evaluation of a trained policy, run in-process."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from afc.agent.policy import act
from afc.flow.checkpoint import load_checkpoint
from afc.flow.domain import build_witness_layout
from afc.flow.forces import compute_cp
from afc.flow.jets import JetAction
from afc.flow.solver import CylinderFlow
from afc.flow.witness import sample_witness
from afc.orchestrator.stats import SignalStats, resample_uniform, signal_statistics
from afc.orchestrator.trace import ForceTrace
from afc.runconfig import RunConfig

log = logging.getLogger(__name__)

SAMPLE_DT = 0.02


@dataclass
class EvalResult:
    converged: bool
    onset_t: float
    stats_t0: float
    stats_t1: float
    mean_cd: float
    mean_cd_press: float
    mean_cd_visc: float
    mean_cl: float
    sigma_cl: float
    st_cl: float
    cd_reduction_pct: float
    sigma_cl_reduction_pct: float
    q_stats: SignalStats
    cl_stats: SignalStats
    trace: dict
    cp_theta: np.ndarray
    cp_mean: np.ndarray


def evaluate_deterministic(
    cfg: RunConfig,
    ac,
    snapshot: bytes,
    st_baseline: float,
    cd_baseline: float,
    sigma_cl_baseline: float,
) -> EvalResult:
    """Apply the learnt policy without exploration and report statistics.

    Actuation starts after a configurable onset. Statistics are taken once
    the mean Cd of consecutive non-overlapping two-period windows drifts less
    than the configured fraction ("statistically steady"); if the duration
    cap arrives first, the trailing window is reported flagged unconverged.
    """
    tr = cfg.train
    sim = cfg.sim
    flow = CylinderFlow(sim, cfg.jets)
    flow.restore(load_checkpoint(snapshot, sim.nx, sim.ny))
    layout = build_witness_layout(sim)
    trace = ForceTrace(sim.n_pe)
    period = 1.0 / st_baseline
    t_action = tr.action_time(st_baseline)
    t_cap = flow.t + tr.eval_duration
    window = 2.0 * period
    stats_window = tr.eval_stats_periods * period

    action = JetAction.constant(np.zeros(sim.n_pe), flow.t)

    def recorder(f, _q):
        trace.record(f, action)

    flow.advance(tr.actuation_onset, action, recorder)
    onset_t = flow.t

    cp_profiles: list[tuple[float, np.ndarray]] = []
    cp_theta = None
    next_check = onset_t + 2.0 * window
    last_mean = None
    steady_at = None
    stats_end = None
    while flow.t < t_cap - 1e-9:
        obs = sample_witness(flow, layout)
        q, _raw, _lp, _val = act(ac, obs, cfg.jets.q_max, deterministic=True)
        action = action.retarget(q, flow.t, flow.t + t_action)
        flow.advance(t_action, action, recorder)
        prof = compute_cp(flow)
        cp_theta = prof.theta_deg
        cp_profiles.append((flow.t, prof.cp))
        if steady_at is None and flow.t >= next_check:
            mean_now = trace.window_mean(flow.t - window, flow.t, ("cd",))[0]
            if last_mean is not None and abs(mean_now - last_mean) <= tr.steady_drift_tol * abs(last_mean):
                steady_at = flow.t
                stats_end = steady_at + stats_window
                log.info("statistically steady at t=%.2f", steady_at)
            last_mean = mean_now
            next_check += window
        elif steady_at is not None and flow.t >= stats_end:
            break

    arrays = trace.arrays()
    t_last = float(arrays["t"][-1])
    if steady_at is None or t_last - steady_at < min(2.0 * period, stats_window):
        converged = False
        steady_at = max(onset_t, t_last - stats_window)
        log.warning("evaluation not statistically steady; reporting trailing window")
    else:
        converged = t_last >= stats_end - 1e-9

    mask = arrays["t"] >= steady_at
    t_w = arrays["t"][mask]
    _, cl_u = resample_uniform(t_w, arrays["cl"][mask], SAMPLE_DT)
    _, q_u = resample_uniform(t_w, arrays["q"][mask].mean(axis=1), SAMPLE_DT)
    cl_stats = signal_statistics(cl_u, SAMPLE_DT)
    q_stats = signal_statistics(q_u, SAMPLE_DT)

    cp_sel = [cp for t, cp in cp_profiles if t >= steady_at]
    cp_mean = np.mean(cp_sel, axis=0) if cp_sel else np.zeros(0)

    mean_cd = float(arrays["cd"][mask].mean())
    sigma_cl = float(cl_stats.sigma)
    result = EvalResult(
        converged=converged,
        onset_t=onset_t,
        stats_t0=float(steady_at),
        stats_t1=t_last,
        mean_cd=mean_cd,
        mean_cd_press=float(arrays["cd_press"][mask].mean()),
        mean_cd_visc=float(arrays["cd_visc"][mask].mean()),
        mean_cl=float(cl_stats.mean),
        sigma_cl=sigma_cl,
        st_cl=float(cl_stats.st),
        cd_reduction_pct=100.0 * (cd_baseline - mean_cd) / cd_baseline,
        sigma_cl_reduction_pct=100.0 * (sigma_cl_baseline - sigma_cl) / sigma_cl_baseline,
        q_stats=q_stats,
        cl_stats=cl_stats,
        trace=arrays,
        cp_theta=cp_theta if cp_theta is not None else np.zeros(0),
        cp_mean=cp_mean,
    )
    log.info(
        "evaluation: cd=%.4f (%+.2f%%) sigma_cl=%.4f (%+.2f%%) St_cl=%.4f St_q=%.4f",
        result.mean_cd, -result.cd_reduction_pct, result.sigma_cl,
        -result.sigma_cl_reduction_pct, result.st_cl, result.q_stats.st,
    )
    return result
