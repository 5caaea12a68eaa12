"""Synthetic jet velocity profile and time interpolation of commanded rates.

The wall-normal jet profile integrates to exactly the commanded mass flow Q
over its arc: integral of rho * u_r * R dtheta = Q (rho = D = 1). The bottom
jet carries -Q so the instantaneous net injected mass is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from afc.flow.config import JetConfig


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2 * math.pi) - math.pi


def jet_radial_speed(q: float, theta: float, jets: JetConfig) -> float:
    """Signed wall-normal speed at angle theta (radians), positive outward."""
    omega = jets.omega
    for theta0, sign in ((jets.theta_top, 1.0), (jets.theta_bot, -1.0)):
        d = _wrap(theta - theta0)
        if abs(d) <= 0.5 * omega:
            return sign * q * math.pi / omega * math.cos(math.pi / omega * d)
    return 0.0


def jet_velocity(q: float, theta: float, jets: JetConfig) -> tuple[float, float]:
    """Cartesian jet velocity at a wall point; (0, 0) outside both arcs."""
    speed = jet_radial_speed(q, theta, jets)
    return speed * math.cos(theta), speed * math.sin(theta)


def marker_jet_velocity(
    q: float, geometry, jets: JetConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Target velocity on every surface marker for one scalar rate q.

    Non-jet markers get the no-slip target (0, 0); with q = 0 the jet markers
    reduce to no-slip exactly, so an actuated run at Q = 0 is bit-identical to
    an uncontrolled one.
    """
    theta = geometry.marker_theta
    omega = jets.omega
    amp = np.zeros_like(theta)
    for theta0, sign, mask in (
        (jets.theta_top, 1.0, geometry.jet_top_mask),
        (jets.theta_bot, -1.0, geometry.jet_bot_mask),
    ):
        d = np.remainder(theta - theta0 + np.pi, 2 * np.pi) - np.pi
        amp[mask] = sign * q * np.pi / omega * np.cos(np.pi / omega * d[mask])
    return amp * np.cos(theta), amp * np.sin(theta)


@dataclass
class JetAction:
    """Per-pseudo-environment mass flow command, linearly interpolated in time.

    Between t_start and t_end the applied rate ramps from q_start to q_end,
    keeping the boundary condition continuous across action updates.
    """

    q_start: np.ndarray
    q_end: np.ndarray
    t_start: float
    t_end: float

    @classmethod
    def constant(cls, q: np.ndarray, t: float) -> "JetAction":
        q = np.asarray(q, dtype=float)
        return cls(q_start=q.copy(), q_end=q.copy(), t_start=t, t_end=t)

    def retarget(self, q_new: np.ndarray, t_start: float, t_end: float) -> "JetAction":
        """Start a new ramp from the currently applied value toward q_new."""
        return JetAction(
            q_start=self.value_at(t_start),
            q_end=np.asarray(q_new, dtype=float).copy(),
            t_start=t_start,
            t_end=t_end,
        )

    def value_at(self, t: float) -> np.ndarray:
        """Per-pseudo-environment rate at time t (clamped to the ramp ends)."""
        if self.t_end <= self.t_start:
            return self.q_end.copy()
        s = min(max((t - self.t_start) / (self.t_end - self.t_start), 0.0), 1.0)
        return self.q_start + s * (self.q_end - self.q_start)

    def mean_at(self, t: float) -> float:
        """Spanwise-mean rate: what a 2D slice of the cylinder sees."""
        return float(np.mean(self.value_at(t)))
