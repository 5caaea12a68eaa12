"""Per-step force/actuation recording shared by workers and evaluation."""

from __future__ import annotations

import numpy as np

from afc.flow.forces import compute_forces
from afc.flow.jets import JetAction


class ForceTrace:
    """Appends one row per solver step: t, forces, per-pe applied rates."""

    def __init__(self, n_pe: int):
        self.n_pe = n_pe
        self.t: list[float] = []
        self.cd: list[float] = []
        self.cl: list[float] = []
        self.cd_press: list[float] = []
        self.cd_visc: list[float] = []
        self.q: list[np.ndarray] = []

    def record(self, flow, action: JetAction | None = None) -> None:
        fr = compute_forces(flow, 1)
        self.t.append(flow.t)
        self.cd.append(float(fr.cd[0]))
        self.cl.append(float(fr.cl[0]))
        self.cd_press.append(float(fr.cd_press[0]))
        self.cd_visc.append(float(fr.cd_visc[0]))
        if action is not None:
            self.q.append(action.value_at(flow.t))
        else:
            self.q.append(np.zeros(self.n_pe))

    def __len__(self) -> int:
        return len(self.t)

    def arrays(self) -> dict[str, np.ndarray]:
        return {
            "t": np.asarray(self.t),
            "cd": np.asarray(self.cd),
            "cl": np.asarray(self.cl),
            "cd_press": np.asarray(self.cd_press),
            "cd_visc": np.asarray(self.cd_visc),
            "q": np.vstack(self.q) if self.q else np.zeros((0, self.n_pe)),
        }

    def window_mean(self, t0: float, t1: float, fields=("cd", "cl")) -> tuple[float, ...]:
        t = np.asarray(self.t)
        mask = (t > t0) & (t <= t1 + 1e-12)
        if not np.any(mask):
            raise ValueError(f"no samples in window ({t0}, {t1}]")
        out = []
        for name in fields:
            out.append(float(np.asarray(getattr(self, name))[mask].mean()))
        return tuple(out)

    def matrix(self) -> np.ndarray:
        """Rows (t, cd, cl, cd_press, cd_visc, q_0..q_{n_pe-1}) for the wire."""
        a = self.arrays()
        return np.column_stack([a["t"], a["cd"], a["cl"], a["cd_press"], a["cd_visc"], a["q"]])
