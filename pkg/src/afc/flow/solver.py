"""Fractional-step incompressible flow solvers on a uniform staggered grid.

CylinderFlow is the production case: inflow/outflow box with free-slip walls
and a direct-forcing immersed cylinder carrying the jet boundary conditions.
PeriodicBox is the doubly periodic twin used for verification against the
Taylor-Green vortex.

Time integration is explicit second-order Adams-Bashforth for advection and
diffusion (plain Euler on the very first step after a restart), followed by a
pressure projection that enforces max |div u| <= DIV_TOL on the new field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from afc.errors import NumericalError, ShapeMismatchError
from afc.flow.config import JetConfig, SimConfig
from afc.flow.domain import DomainGeometry, build_domain
from afc.flow.jets import JetAction, marker_jet_velocity
from afc.flow.kernels import (
    correct_box,
    correct_periodic,
    divergence,
    face_grid_coords,
    ib_interp,
    ib_spread,
    predict_u,
    predict_v,
)
from afc.flow.poisson import BoxPoisson, PeriodicPoisson

#: Post-projection divergence bound, in units of U_inf/D.
DIV_TOL = 1e-5

#: Relative residual target of the pressure solve.
POISSON_REL_TOL = 1e-6

#: Direct-forcing sweeps per step; more sweeps tighten the no-slip error.
IB_SWEEPS = 3

#: Safety factor on the explicit diffusion limit dt <= h^2 / (8 nu).
DIFF_SAFETY = 0.9


@dataclass
class FlowField:
    """Canonical staggered state: boundary-inclusive faces, no ghost cells."""

    nx: int
    ny: int
    t: float
    u: np.ndarray  # (nx+1, ny)
    v: np.ndarray  # (nx, ny+1)
    p: np.ndarray  # (nx, ny)

    def __post_init__(self):
        expect = {"u": (self.nx + 1, self.ny), "v": (self.nx, self.ny + 1), "p": (self.nx, self.ny)}
        for name, shape in expect.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ShapeMismatchError(f"{name} has shape {arr.shape}, expected {shape}")


class _StaggeredBase:
    """State buffers and the shared predictor/projection machinery."""

    def __init__(self, nx: int, ny: int, h: float, nu: float):
        self.nx, self.ny, self.h, self.nu = nx, ny, h, nu
        shape = (nx + 2, ny + 2)
        self._u = np.zeros(shape)
        self._v = np.zeros(shape)
        self._p = np.zeros(shape)
        self._us = np.zeros(shape)
        self._vs = np.zeros(shape)
        self._hu = np.zeros(shape)
        self._hv = np.zeros(shape)
        self._hu_new = np.zeros(shape)
        self._hv_new = np.zeros(shape)
        self._div = np.zeros((nx, ny))
        self._p_int = np.zeros((nx, ny))
        self._have_history = False
        self.t = 0.0
        self.last_max_div = 0.0
        self.last_poisson_iters = 0

    @property
    def dt_diffusive(self) -> float:
        return DIFF_SAFETY * self.h * self.h / (8.0 * self.nu)

    def max_speed(self) -> float:
        nx, ny = self.nx, self.ny
        umax = float(np.max(np.abs(self._u[: nx + 1, 1 : ny + 1])))
        vmax = float(np.max(np.abs(self._v[1 : nx + 1, : ny + 1])))
        return max(umax, vmax)

    def _project_and_swap(self, dt: float, poisson) -> None:
        nx, ny, h = self.nx, self.ny, self.h
        divergence(self._us, self._vs, self._div, h)
        rhs = self._div * (-1.0 / dt)
        p_int, iters, _ = poisson.solve(
            rhs,
            x0=self._p_int,
            rel_tol=POISSON_REL_TOL,
            abs_inf_tol=0.5 * DIV_TOL / dt,
        )
        self._correct(dt, p_int)
        self.last_poisson_iters = iters
        self._p_int = p_int
        self._p[1 : nx + 1, 1 : ny + 1] = p_int
        self._fill_bc_p()
        self._u, self._us = self._us, self._u
        self._v, self._vs = self._vs, self._v
        self._hu, self._hu_new = self._hu_new, self._hu
        self._hv, self._hv_new = self._hv_new, self._hv
        self._have_history = True
        self.t += dt
        self._fill_bc()
        divergence(self._u, self._v, self._div, h)
        self.last_max_div = float(np.max(np.abs(self._div)))
        if not np.isfinite(self.last_max_div) or self.last_max_div > DIV_TOL:
            raise NumericalError(
                f"divergence {self.last_max_div:.3e} exceeds {DIV_TOL} at t={self.t:.4f}"
            )

    def _ab_coeffs(self) -> tuple[float, float]:
        return (1.5, -0.5) if self._have_history else (1.0, 0.0)


class PeriodicBox(_StaggeredBase):
    """Doubly periodic box for solver verification."""

    def __init__(self, nx: int, ny: int, lx: float, nu: float):
        super().__init__(nx, ny, lx / nx, nu)
        self.ly = ny * self.h
        self.poisson = PeriodicPoisson(nx, ny, self.h)
        self._fill_bc()

    def set_velocity(self, fu, fv) -> None:
        """Initialize faces from callables of physical coordinates."""
        nx, ny, h = self.nx, self.ny, self.h
        xi = np.arange(1, nx + 1) * h
        yc = (np.arange(1, ny + 1) - 0.5) * h
        self._u[1 : nx + 1, 1 : ny + 1] = fu(xi[:, None], yc[None, :])
        xc = (np.arange(1, nx + 1) - 0.5) * h
        yj = np.arange(1, ny + 1) * h
        self._v[1 : nx + 1, 1 : ny + 1] = fv(xc[:, None], yj[None, :])
        self._have_history = False
        self._fill_bc()

    def _fill_bc(self) -> None:
        nx, ny = self.nx, self.ny
        for a in (self._u, self._v):
            a[0, :] = a[nx, :]
            a[nx + 1, :] = a[1, :]
            a[:, 0] = a[:, ny]
            a[:, ny + 1] = a[:, 1]

    def _fill_bc_p(self) -> None:
        pass

    def _correct(self, dt: float, p_int: np.ndarray) -> None:
        correct_periodic(self._us, self._vs, p_int, dt, self.h)

    def step(self, dt: float) -> None:
        nx, ny = self.nx, self.ny
        c_new, c_old = self._ab_coeffs()
        predict_u(self._u, self._v, self._hu, self._us, self._hu_new,
                  self.nu, self.h, dt, c_new, c_old, nx + 1, ny + 1)
        predict_v(self._u, self._v, self._hv, self._vs, self._hv_new,
                  self.nu, self.h, dt, c_new, c_old, nx + 1, ny + 1)
        for a in (self._us, self._vs):
            a[0, :] = a[nx, :]
            a[nx + 1, :] = a[1, :]
            a[:, 0] = a[:, ny]
            a[:, ny + 1] = a[:, 1]
        self._project_and_swap(dt, self.poisson)

    def interior(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        nx, ny = self.nx, self.ny
        return (
            self._u[1 : nx + 1, 1 : ny + 1].copy(),
            self._v[1 : nx + 1, 1 : ny + 1].copy(),
            self._p[1 : nx + 1, 1 : ny + 1].copy(),
        )

    def kinetic_energy(self) -> float:
        u, v, _ = self.interior()
        return 0.5 * self.h * self.h * float(np.sum(u * u) + np.sum(v * v))


class CylinderFlow(_StaggeredBase):
    """Flow past the immersed cylinder with paired jet actuators."""

    def __init__(
        self,
        config: SimConfig,
        jets: JetConfig | None = None,
        include_body: bool = True,
        ib_sweeps: int = IB_SWEEPS,
    ):
        super().__init__(config.nx, config.ny, config.h, config.nu)
        self.cfg = config
        self.jets = jets or JetConfig()
        self.ib_sweeps = ib_sweeps
        self.geometry: DomainGeometry | None = (
            build_domain(config, self.jets) if include_body else None
        )
        self.poisson = BoxPoisson(config.nx, config.ny, config.h)
        if self.geometry is not None:
            g = self.geometry
            self._gxu, self._gyu = face_grid_coords(g.marker_x, g.marker_y, self.h, "u")
            self._gxv, self._gyv = face_grid_coords(g.marker_x, g.marker_y, self.h, "v")
            self._mbuf_u = np.zeros(g.n_markers)
            self._mbuf_v = np.zeros(g.n_markers)
            self._spread_scale = g.marker_ds / self.h
        self.reset_uniform()

    def reset_uniform(self) -> None:
        """Impulsive start: freestream everywhere, zero pressure."""
        self._u[:, :] = self.cfg.u_inf
        self._v[:, :] = 0.0
        self._p[:, :] = 0.0
        self._p_int[:, :] = 0.0
        self._have_history = False
        self.t = 0.0
        self._fill_bc()

    def _fill_bc(self) -> None:
        nx, ny = self.nx, self.ny
        u, v = self._u, self._v
        u[0, 1 : ny + 1] = self.cfg.u_inf
        u[nx + 1, :] = u[nx, :]
        u[:, 0] = u[:, 1]
        u[:, ny + 1] = u[:, ny]
        v[1 : nx + 1, 0] = 0.0
        v[1 : nx + 1, ny] = 0.0
        v[:, ny + 1] = v[:, ny]
        v[0, :] = -v[1, :]
        v[nx + 1, :] = v[nx, :]

    def _fill_bc_star(self) -> None:
        nx, ny = self.nx, self.ny
        u, v = self._us, self._vs
        u[0, 1 : ny + 1] = self.cfg.u_inf
        u[nx + 1, :] = u[nx, :]
        u[:, 0] = u[:, 1]
        u[:, ny + 1] = u[:, ny]
        v[1 : nx + 1, 0] = 0.0
        v[1 : nx + 1, ny] = 0.0
        v[:, ny + 1] = v[:, ny]
        v[0, :] = -v[1, :]
        v[nx + 1, :] = v[nx, :]

    def _fill_bc_p(self) -> None:
        nx, ny = self.nx, self.ny
        p = self._p
        p[0, :] = p[1, :]
        p[nx + 1, :] = -p[nx, :]
        p[:, 0] = p[:, 1]
        p[:, ny + 1] = p[:, ny]

    def _correct(self, dt: float, p_int: np.ndarray) -> None:
        correct_box(self._us, self._vs, p_int, dt, self.h)

    def _apply_ib(self, q: float) -> None:
        g = self.geometry
        ub, vb = marker_jet_velocity(q, g, self.jets)
        for _ in range(self.ib_sweeps):
            ib_interp(self._us, self._gxu, self._gyu, self._mbuf_u)
            ib_interp(self._vs, self._gxv, self._gyv, self._mbuf_v)
            du = (ub - self._mbuf_u) * self._spread_scale
            dv = (vb - self._mbuf_v) * self._spread_scale
            ib_spread(self._us, self._gxu, self._gyu, du)
            ib_spread(self._vs, self._gxv, self._gyv, dv)

    def step(self, dt: float, q: float = 0.0) -> None:
        """One fractional-step update with jet rate q applied at the markers."""
        nx, ny, h = self.nx, self.ny, self.h
        c_new, c_old = self._ab_coeffs()
        u_inf = self.cfg.u_inf
        outlet = self._u[nx, 1 : ny + 1] - dt * u_inf / h * (
            self._u[nx, 1 : ny + 1] - self._u[nx - 1, 1 : ny + 1]
        )
        predict_u(self._u, self._v, self._hu, self._us, self._hu_new,
                  self.nu, h, dt, c_new, c_old, nx, ny + 1)
        predict_v(self._u, self._v, self._hv, self._vs, self._hv_new,
                  self.nu, h, dt, c_new, c_old, nx + 1, ny)
        self._us[nx, 1 : ny + 1] = outlet
        self._fill_bc_star()
        if self.geometry is not None:
            self._apply_ib(q)
        self._project_and_swap(dt, self.poisson)

    def stable_dt(self, q_bound: float = 0.0) -> float:
        """CFL-limited step given the current field and a bound on |Q|."""
        jet_speed = abs(q_bound) * np.pi / self.jets.omega
        vmax = max(self.max_speed(), self.cfg.u_inf, jet_speed)
        return min(self.cfg.cfl * self.h / vmax, self.dt_diffusive)

    def advance(self, duration: float, action: JetAction | None = None, recorder=None) -> None:
        """Advance by `duration`, interpolating the jet command linearly.

        The remaining interval is split into equal substeps under the CFL
        bound, so no step degenerates to a sliver (tiny dt makes the
        immersed-boundary pressure contribution spike).
        """
        t_end = self.t + duration
        if action is not None:
            q_bound = float(max(np.max(np.abs(action.q_start)), np.max(np.abs(action.q_end))))
        else:
            q_bound = 0.0
        while self.t < t_end - 1e-12:
            remaining = t_end - self.t
            n_sub = max(1, int(np.ceil(remaining / self.stable_dt(q_bound))))
            dt = remaining / n_sub
            q = action.mean_at(self.t + dt) if action is not None else 0.0
            self.step(dt, q)
            if recorder is not None:
                recorder(self, q)

    # --- state import/export -------------------------------------------------

    def field(self) -> FlowField:
        nx, ny = self.nx, self.ny
        return FlowField(
            nx=nx,
            ny=ny,
            t=self.t,
            u=self._u[: nx + 1, 1 : ny + 1].copy(),
            v=self._v[1 : nx + 1, : ny + 1].copy(),
            p=self._p[1 : nx + 1, 1 : ny + 1].copy(),
        )

    def restore(self, field: FlowField) -> None:
        nx, ny = self.nx, self.ny
        if (field.nx, field.ny) != (nx, ny):
            raise ShapeMismatchError(
                f"checkpoint grid {field.nx}x{field.ny} does not match {nx}x{ny}"
            )
        self._u[: nx + 1, 1 : ny + 1] = field.u
        self._v[1 : nx + 1, : ny + 1] = field.v
        self._p[1 : nx + 1, 1 : ny + 1] = field.p
        self._p_int[:, :] = field.p
        self.t = field.t
        self._have_history = False
        self._fill_bc()
        self._fill_bc_p()

    def pressure_ghosted(self) -> np.ndarray:
        return self._p

    def velocity_ghosted(self) -> tuple[np.ndarray, np.ndarray]:
        return self._u, self._v
