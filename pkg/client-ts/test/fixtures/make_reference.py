#!/usr/bin/env python3
"""Build integration fixtures: a flow snapshot plus the uncontrolled
window-averaged force reference the amplitude-0 demo must reproduce.

Usage: make_reference.py OUT_DIR CONFIG STEPS T_ACTION
"""

import sys
from pathlib import Path

import numpy as np

from afc.flow.checkpoint import save_checkpoint
from afc.flow.jets import JetAction
from afc.flow.solver import CylinderFlow
from afc.orchestrator.trace import ForceTrace
from afc.runconfig import load_config


def main() -> None:
    out = Path(sys.argv[1])
    cfg = load_config(sys.argv[2])
    steps = int(sys.argv[3])
    t_action = float(sys.argv[4])

    flow = CylinderFlow(cfg.sim, cfg.jets)
    while flow.t < 20.0 - 1e-12:
        q = 0.1 if 2.0 <= flow.t < 3.0 else 0.0
        flow.step(min(flow.stable_dt(0.1), 20.0 - flow.t), q)
    (out / "snapshot.afcs").write_bytes(save_checkpoint(flow.field()))

    trace = ForceTrace(cfg.sim.n_pe)
    action = JetAction.constant(np.zeros(cfg.sim.n_pe), flow.t)
    rows = []
    for _ in range(steps):
        t0 = flow.t
        flow.advance(t_action, action, lambda f, _q: trace.record(f, action))
        cd, cl = trace.window_mean(t0, flow.t)
        rows.append((flow.t, cd, cl))
    with open(out / "reference.csv", "w") as f:
        f.write("t,cd,cl\n")
        for t, cd, cl in rows:
            f.write(f"{t:.9g},{cd:.9g},{cl:.9g}\n")
    print("fixtures ready")


if __name__ == "__main__":
    main()
