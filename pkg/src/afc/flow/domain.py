"""Grid and immersed-boundary geometry for the cylinder case."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from afc.errors import ConfigError
from afc.flow.config import JetConfig, SimConfig

#: Lagrangian surface markers on the cylinder wall.
N_MARKERS = 360

#: Offset of the force/pressure sampling circle above the wall, in cells.
#: Keeps the sampling stencil out of the immersed-boundary forcing band.
SURFACE_OFFSET_CELLS = 1.5

#: Witness probes per pseudo-environment: three rings of 24 plus 13 points on
#: the wake centerline.
WITNESS_RING_RADII = (0.6, 0.8, 1.0)
WITNESS_RING_COUNT = 24
WITNESS_WAKE_X = tuple(0.75 + 0.25 * k for k in range(13))
N_WITNESS = len(WITNESS_RING_RADII) * WITNESS_RING_COUNT + len(WITNESS_WAKE_X)


@dataclass(frozen=True)
class DomainGeometry:
    """Derived geometry of one simulation: grid, markers, jet arcs."""

    nx: int
    ny: int
    h: float
    center: tuple[float, float]
    radius: float
    marker_theta: np.ndarray        # standard angle from +x axis, radians
    marker_x: np.ndarray
    marker_y: np.ndarray
    marker_ds: float                # arc length carried by each marker
    jet_top_mask: np.ndarray        # markers inside the top jet arc
    jet_bot_mask: np.ndarray
    sample_x: np.ndarray            # offset sampling circle for forces / Cp
    sample_y: np.ndarray
    sample_theta_front: np.ndarray  # angle from the front stagnation direction
    solid_mask: np.ndarray          # cell centers inside the cylinder, (nx, ny)

    @property
    def n_markers(self) -> int:
        return self.marker_theta.size


def _arc_mask(theta: np.ndarray, theta0: float, omega: float) -> np.ndarray:
    d = np.remainder(theta - theta0 + np.pi, 2 * np.pi) - np.pi
    return np.abs(d) <= 0.5 * omega + 1e-12


def build_domain(config: SimConfig, jets: JetConfig | None = None) -> DomainGeometry:
    """Construct grid metadata, surface markers and jet arc masks.

    Raises ConfigError if the cylinder is not fully inside the domain with the
    required clearance (checked by SimConfig itself).
    """
    jets = jets or JetConfig()
    nx, ny, h = config.nx, config.ny, config.h
    xc, yc = config.cylinder_center
    radius = 0.5 * config.diameter

    theta = 2 * np.pi * np.arange(N_MARKERS) / N_MARKERS
    marker_x = xc + radius * np.cos(theta)
    marker_y = yc + radius * np.sin(theta)
    ds = 2 * np.pi * radius / N_MARKERS

    jet_top = _arc_mask(theta, jets.theta_top, jets.omega)
    jet_bot = _arc_mask(theta, jets.theta_bot, jets.omega)
    if np.any(jet_top & jet_bot):
        raise ConfigError("top and bottom jet arcs overlap")

    r_sample = radius + SURFACE_OFFSET_CELLS * h
    sample_x = xc + r_sample * np.cos(theta)
    sample_y = yc + r_sample * np.sin(theta)
    # Front stagnation points upstream (-x); theta_front = 0 there, growing
    # over the top surface.
    theta_front = np.remainder(np.pi - theta, 2 * np.pi)

    cx = (np.arange(nx) + 0.5) * h
    cy = (np.arange(ny) + 0.5) * h
    solid = (cx[:, None] - xc) ** 2 + (cy[None, :] - yc) ** 2 < radius**2

    return DomainGeometry(
        nx=nx,
        ny=ny,
        h=h,
        center=(xc, yc),
        radius=radius,
        marker_theta=theta,
        marker_x=marker_x,
        marker_y=marker_y,
        marker_ds=ds,
        jet_top_mask=jet_top,
        jet_bot_mask=jet_bot,
        sample_x=sample_x,
        sample_y=sample_y,
        sample_theta_front=theta_front,
        solid_mask=solid,
    )


@dataclass(frozen=True)
class WitnessLayout:
    """Probe locations whose pressure coefficients form the agent state."""

    x: np.ndarray
    y: np.ndarray

    @property
    def n_points(self) -> int:
        return self.x.size


def build_witness_layout(config: SimConfig) -> WitnessLayout:
    """85 probes: rings of 24 at r in {0.6, 0.8, 1.0}D plus 13 wake points."""
    xc, yc = config.cylinder_center
    xs, ys = [], []
    for r in WITNESS_RING_RADII:
        ang = 2 * np.pi * np.arange(WITNESS_RING_COUNT) / WITNESS_RING_COUNT
        xs.append(xc + r * np.cos(ang))
        ys.append(yc + r * np.sin(ang))
    xs.append(xc + np.asarray(WITNESS_WAKE_X))
    ys.append(np.full(len(WITNESS_WAKE_X), yc))
    x = np.concatenate(xs)
    y = np.concatenate(ys)

    radius = 0.5 * config.diameter
    inside_body = np.hypot(x - xc, y - yc) <= radius
    outside_domain = (x <= 0) | (x >= config.lx) | (y <= 0) | (y >= config.ly)
    if np.any(inside_body) or np.any(outside_domain):
        raise ConfigError("witness points must lie in the fluid, outside the cylinder")
    return WitnessLayout(x=x, y=y)
