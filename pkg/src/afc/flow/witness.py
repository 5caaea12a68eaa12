"""Witness-point probing: the pressure-coefficient state fed to the agent."""

from __future__ import annotations

import numpy as np

from afc.flow.domain import WitnessLayout
from afc.flow.forces import inlet_reference_pressure
from afc.flow.kernels import bilinear_sample, face_grid_coords


def witness_cp(flow, layout: WitnessLayout) -> np.ndarray:
    """Local pressure coefficient at each probe, shape (n_points,)."""
    gx, gy = face_grid_coords(layout.x, layout.y, flow.h, "p")
    out = np.empty(layout.n_points)
    bilinear_sample(flow.pressure_ghosted(), gx, gy, out)
    return 2.0 * (out - inlet_reference_pressure(flow))


def sample_witness(flow, layout: WitnessLayout, n_pe: int | None = None) -> np.ndarray:
    """Per-pseudo-environment observations, shape (n_pe, 3 * n_points).

    Each row concatenates [left neighbor, self, right neighbor] with periodic
    spanwise indexing. In 2D mode every pseudo-environment sees the same
    slice, so all rows are identical (and with n_pe = 1 the neighbors are
    copies of self).
    """
    n_pe = n_pe if n_pe is not None else flow.cfg.n_pe
    base = witness_cp(flow, layout)
    rows = np.empty((n_pe, 3 * base.size))
    for j in range(n_pe):
        left = base  # replicated slices: neighbors alias self
        right = base
        rows[j] = np.concatenate([left, base, right])
    return rows
