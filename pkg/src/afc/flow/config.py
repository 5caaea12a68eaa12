"""Simulation and jet configuration records.

Nondimensionalization is fixed throughout: cylinder diameter D = 1, freestream
speed U_inf = 1, density rho = 1, so the kinematic viscosity is 1/Re and time
is measured in units of D/U_inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from afc.errors import ConfigError

#: Required distance between the cylinder surface and every domain boundary,
#: in units of D.
MIN_CLEARANCE = 2.0


@dataclass(frozen=True)
class SimConfig:
    """Grid, domain and fluid parameters of one simulation instance."""

    re: float = 100.0
    lx: float = 30.0
    ly: float = 15.0
    cylinder_center: tuple[float, float] = (7.5, 7.5)
    h: float = 1.0 / 25.0
    cfl: float = 0.4
    n_pe: int = 4
    three_d: bool = False
    u_inf: float = field(default=1.0, init=False)
    rho: float = field(default=1.0, init=False)
    diameter: float = field(default=1.0, init=False)

    def __post_init__(self):
        if self.re <= 0:
            raise ConfigError(f"Reynolds number must be positive, got {self.re}")
        if self.h <= 0:
            raise ConfigError(f"grid spacing must be positive, got {self.h}")
        if not 0 < self.cfl <= 1:
            raise ConfigError(f"cfl must be in (0, 1], got {self.cfl}")
        if self.n_pe < 1:
            raise ConfigError(f"n_pe must be >= 1, got {self.n_pe}")
        for name, extent in (("lx", self.lx), ("ly", self.ly)):
            n = extent / self.h
            if abs(n - round(n)) > 1e-9 * max(1.0, n):
                raise ConfigError(f"{name}={extent} is not an integer multiple of h={self.h}")
        xc, yc = self.cylinder_center
        r = 0.5 * self.diameter
        clearances = (xc - r, self.lx - xc - r, yc - r, self.ly - yc - r)
        if min(clearances) < MIN_CLEARANCE:
            raise ConfigError(
                "cylinder at "
                f"({xc}, {yc}) leaves clearance {min(clearances):.3f}D to the domain "
                f"boundary; at least {MIN_CLEARANCE}D is required on all sides"
            )

    @property
    def nx(self) -> int:
        return round(self.lx / self.h)

    @property
    def ny(self) -> int:
        return round(self.ly / self.h)

    @property
    def nu(self) -> float:
        return 1.0 / self.re


@dataclass(frozen=True)
class JetConfig:
    """Geometry and bounds of the paired synthetic jets.

    One scalar mass flow rate Q per pseudo-environment drives both jets: the
    top jet carries +Q and the bottom jet -Q, so net injected mass is always
    exactly zero.
    """

    theta_top_deg: float = 90.0
    theta_bot_deg: float = 270.0
    omega_deg: float = 10.0
    l_jet: float = 0.4
    q_max: float = 0.176

    def __post_init__(self):
        if not 0 < self.omega_deg < 180:
            raise ConfigError(f"jet width must be in (0, 180) degrees, got {self.omega_deg}")
        if self.q_max <= 0:
            raise ConfigError(f"q_max must be positive, got {self.q_max}")
        if self.l_jet <= 0:
            raise ConfigError(f"l_jet must be positive, got {self.l_jet}")

    @property
    def q_min(self) -> float:
        return -self.q_max

    @property
    def omega(self) -> float:
        """Jet angular width in radians."""
        return math.radians(self.omega_deg)

    @property
    def theta_top(self) -> float:
        return math.radians(self.theta_top_deg)

    @property
    def theta_bot(self) -> float:
        return math.radians(self.theta_bot_deg)

    def clamp(self, q: float) -> float:
        return min(max(q, -self.q_max), self.q_max)
