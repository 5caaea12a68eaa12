"""Spanwise-periodic 3D mode with independent per-pseudo-environment jets.

Activated by the `three_d` configuration flag and exercised by a smoke test
only; orchestrated runs use the 2D solver. The spanwise direction is periodic
with n_pe slabs of width l_jet, each owning one jet pair driven by its own
mass flow rate, so per-slab forces and witness states genuinely differ when
the commanded rates differ.

Discretization mirrors the 2D solver: staggered MAC grid, explicit AB2
advection + diffusion, direct-forcing immersed boundary on rings of surface
markers (one ring per spanwise cell), and a pressure projection solved by
PCG with an exact FFT(z) x DCT(y) x tridiagonal(x) preconditioner.
"""

from __future__ import annotations

import numpy as np
import scipy.fft
from numba import njit

from afc.errors import ConfigError, NumericalError
from afc.flow.config import JetConfig, SimConfig
from afc.flow.domain import build_domain
from afc.flow.jets import JetAction
from afc.flow.poisson import _PcgMixin
from afc.flow.solver import DIFF_SAFETY, DIV_TOL, IB_SWEEPS, POISSON_REL_TOL


@njit(cache=True)
def _predict_u3(u, v, w, h_old, u_star, h_new, nu, h, dt, cn, co, i_end, j_end, k_end):
    ih = 1.0 / h
    ih2 = ih * ih
    for i in range(1, i_end):
        for j in range(1, j_end):
            for k in range(1, k_end):
                ue = 0.5 * (u[i, j, k] + u[i + 1, j, k])
                uw_ = 0.5 * (u[i - 1, j, k] + u[i, j, k])
                un = 0.5 * (u[i, j, k] + u[i, j + 1, k])
                us = 0.5 * (u[i, j - 1, k] + u[i, j, k])
                vn = 0.5 * (v[i, j, k] + v[i + 1, j, k])
                vs = 0.5 * (v[i, j - 1, k] + v[i + 1, j - 1, k])
                ut = 0.5 * (u[i, j, k] + u[i, j, k + 1])
                ub = 0.5 * (u[i, j, k - 1] + u[i, j, k])
                wt = 0.5 * (w[i, j, k] + w[i + 1, j, k])
                wb = 0.5 * (w[i, j, k - 1] + w[i + 1, j, k - 1])
                adv = (ue * ue - uw_ * uw_) * ih + (un * vn - us * vs) * ih + (ut * wt - ub * wb) * ih
                lap = (
                    u[i + 1, j, k] + u[i - 1, j, k] + u[i, j + 1, k] + u[i, j - 1, k]
                    + u[i, j, k + 1] + u[i, j, k - 1] - 6.0 * u[i, j, k]
                ) * ih2
                rhs = -adv + nu * lap
                h_new[i, j, k] = rhs
                u_star[i, j, k] = u[i, j, k] + dt * (cn * rhs + co * h_old[i, j, k])


@njit(cache=True)
def _predict_v3(u, v, w, h_old, v_star, h_new, nu, h, dt, cn, co, i_end, j_end, k_end):
    ih = 1.0 / h
    ih2 = ih * ih
    for i in range(1, i_end):
        for j in range(1, j_end):
            for k in range(1, k_end):
                vn = 0.5 * (v[i, j, k] + v[i, j + 1, k])
                vs = 0.5 * (v[i, j - 1, k] + v[i, j, k])
                ve = 0.5 * (v[i, j, k] + v[i + 1, j, k])
                vw = 0.5 * (v[i - 1, j, k] + v[i, j, k])
                ue = 0.5 * (u[i, j, k] + u[i, j + 1, k])
                uw_ = 0.5 * (u[i - 1, j, k] + u[i - 1, j + 1, k])
                vt = 0.5 * (v[i, j, k] + v[i, j, k + 1])
                vb = 0.5 * (v[i, j, k - 1] + v[i, j, k])
                wt = 0.5 * (w[i, j, k] + w[i, j + 1, k])
                wb = 0.5 * (w[i, j, k - 1] + w[i, j + 1, k - 1])
                adv = (ue * ve - uw_ * vw) * ih + (vn * vn - vs * vs) * ih + (vt * wt - vb * wb) * ih
                lap = (
                    v[i + 1, j, k] + v[i - 1, j, k] + v[i, j + 1, k] + v[i, j - 1, k]
                    + v[i, j, k + 1] + v[i, j, k - 1] - 6.0 * v[i, j, k]
                ) * ih2
                rhs = -adv + nu * lap
                h_new[i, j, k] = rhs
                v_star[i, j, k] = v[i, j, k] + dt * (cn * rhs + co * h_old[i, j, k])


@njit(cache=True)
def _predict_w3(u, v, w, h_old, w_star, h_new, nu, h, dt, cn, co, i_end, j_end, k_end):
    ih = 1.0 / h
    ih2 = ih * ih
    for i in range(1, i_end):
        for j in range(1, j_end):
            for k in range(1, k_end):
                wt = 0.5 * (w[i, j, k] + w[i, j, k + 1])
                wb = 0.5 * (w[i, j, k - 1] + w[i, j, k])
                we = 0.5 * (w[i, j, k] + w[i + 1, j, k])
                ww = 0.5 * (w[i - 1, j, k] + w[i, j, k])
                ue = 0.5 * (u[i, j, k] + u[i, j, k + 1])
                uw_ = 0.5 * (u[i - 1, j, k] + u[i - 1, j, k + 1])
                wn = 0.5 * (w[i, j, k] + w[i, j + 1, k])
                ws = 0.5 * (w[i, j - 1, k] + w[i, j, k])
                vn = 0.5 * (v[i, j, k] + v[i, j, k + 1])
                vs = 0.5 * (v[i, j - 1, k] + v[i, j - 1, k + 1])
                adv = (ue * we - uw_ * ww) * ih + (vn * wn - vs * ws) * ih + (wt * wt - wb * wb) * ih
                lap = (
                    w[i + 1, j, k] + w[i - 1, j, k] + w[i, j + 1, k] + w[i, j - 1, k]
                    + w[i, j, k + 1] + w[i, j, k - 1] - 6.0 * w[i, j, k]
                ) * ih2
                rhs = -adv + nu * lap
                h_new[i, j, k] = rhs
                w_star[i, j, k] = w[i, j, k] + dt * (cn * rhs + co * h_old[i, j, k])


@njit(cache=True)
def _divergence3(u, v, w, out, h):
    nx, ny, nz = out.shape
    ih = 1.0 / h
    for i in range(1, nx + 1):
        for j in range(1, ny + 1):
            for k in range(1, nz + 1):
                out[i - 1, j - 1, k - 1] = (
                    u[i, j, k] - u[i - 1, j, k]
                    + v[i, j, k] - v[i, j - 1, k]
                    + w[i, j, k] - w[i, j, k - 1]
                ) * ih


@njit(cache=True)
def _correct3(u, v, w, p, dt, h):
    nx, ny, nz = p.shape
    s = dt / h
    for i in range(1, nx):
        for j in range(1, ny + 1):
            for k in range(1, nz + 1):
                u[i, j, k] -= s * (p[i, j - 1, k - 1] - p[i - 1, j - 1, k - 1])
    for j in range(1, ny + 1):
        for k in range(1, nz + 1):
            u[nx, j, k] -= s * (-2.0 * p[nx - 1, j - 1, k - 1])
    for i in range(1, nx + 1):
        for j in range(1, ny):
            for k in range(1, nz + 1):
                v[i, j, k] -= s * (p[i - 1, j, k - 1] - p[i - 1, j - 1, k - 1])
    for i in range(1, nx + 1):
        for j in range(1, ny + 1):
            for k in range(1, nz + 1):
                pk = p[i - 1, j - 1, k] if k < nz else p[i - 1, j - 1, 0]
                w[i, j, k] -= s * (pk - p[i - 1, j - 1, k - 1])


@njit(cache=True)
def _neg_laplacian3(p, out, h):
    nx, ny, nz = p.shape
    ih2 = 1.0 / (h * h)
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                c = p[i, j, k]
                pw = p[i - 1, j, k] if i > 0 else c
                pe = p[i + 1, j, k] if i < nx - 1 else -c
                ps = p[i, j - 1, k] if j > 0 else c
                pn = p[i, j + 1, k] if j < ny - 1 else c
                pb = p[i, j, k - 1] if k > 0 else p[i, j, nz - 1]
                pt = p[i, j, k + 1] if k < nz - 1 else p[i, j, 0]
                out[i, j, k] = -(pw + pe + ps + pn + pb + pt - 6.0 * c) * ih2


@njit(cache=True)
def _thomas3(rhat, m, inv_beta, c, out):
    nx, ny, nzh = rhat.shape
    for j in range(ny):
        for k in range(nzh):
            out[0, j, k] = rhat[0, j, k]
    for i in range(1, nx):
        for j in range(ny):
            for k in range(nzh):
                out[i, j, k] = rhat[i, j, k] - m[i, j, k] * out[i - 1, j, k]
    for j in range(ny):
        for k in range(nzh):
            out[nx - 1, j, k] *= inv_beta[nx - 1, j, k]
    for i in range(nx - 2, -1, -1):
        for j in range(ny):
            for k in range(nzh):
                out[i, j, k] = (out[i, j, k] - c * out[i + 1, j, k]) * inv_beta[i, j, k]


@njit(cache=True, inline="always")
def _delta3(r):
    a = abs(r)
    if a <= 0.5:
        return (1.0 + np.sqrt(1.0 - 3.0 * a * a)) / 3.0
    if a <= 1.5:
        b = 1.0 - a
        return (5.0 - 3.0 * a - np.sqrt(1.0 - 3.0 * b * b)) / 6.0
    return 0.0


@njit(cache=True)
def _ib_interp3(f, gx, gy, gz, out):
    n = gx.shape[0]
    for m in range(n):
        i0 = int(round(gx[m]))
        j0 = int(round(gy[m]))
        k0 = int(round(gz[m]))
        acc = 0.0
        for i in range(i0 - 1, i0 + 2):
            wx = _delta3(gx[m] - i)
            if wx == 0.0:
                continue
            for j in range(j0 - 1, j0 + 2):
                wy = _delta3(gy[m] - j)
                if wy == 0.0:
                    continue
                for k in range(k0 - 1, k0 + 2):
                    wz = _delta3(gz[m] - k)
                    if wz != 0.0:
                        acc += wx * wy * wz * f[i, j, k]
        out[m] = acc


@njit(cache=True)
def _ib_spread3(f, gx, gy, gz, vals):
    n = gx.shape[0]
    for m in range(n):
        i0 = int(round(gx[m]))
        j0 = int(round(gy[m]))
        k0 = int(round(gz[m]))
        for i in range(i0 - 1, i0 + 2):
            wx = _delta3(gx[m] - i)
            if wx == 0.0:
                continue
            for j in range(j0 - 1, j0 + 2):
                wy = _delta3(gy[m] - j)
                if wy == 0.0:
                    continue
                for k in range(k0 - 1, k0 + 2):
                    wz = _delta3(gz[m] - k)
                    if wz != 0.0:
                        f[i, j, k] += wx * wy * wz * vals[m]


class BoxPoisson3D(_PcgMixin):
    """Neumann W/S/N, Dirichlet-at-face E, periodic Z."""

    def __init__(self, nx: int, ny: int, nz: int, h: float):
        self.nx, self.ny, self.nz, self.h = nx, ny, nz, h
        ih2 = 1.0 / (h * h)
        lam_y = (2.0 - 2.0 * np.cos(np.pi * np.arange(ny) / ny)) * ih2
        nzh = nz // 2 + 1
        lam_z = (2.0 - 2.0 * np.cos(2 * np.pi * np.arange(nzh) / nz)) * ih2
        diag_x = np.full(nx, 2.0 * ih2)
        diag_x[0] = 1.0 * ih2
        diag_x[-1] = 3.0 * ih2
        b = diag_x[:, None, None] + lam_y[None, :, None] + lam_z[None, None, :]
        self._c = -ih2
        self._m = np.zeros((nx, ny, nzh))
        beta = np.zeros((nx, ny, nzh))
        beta[0] = b[0]
        for i in range(1, nx):
            self._m[i] = self._c / beta[i - 1]
            beta[i] = b[i] - self._m[i] * self._c
        self._inv_beta = 1.0 / beta

    def apply(self, p):
        out = np.empty_like(p)
        _neg_laplacian3(p, out, self.h)
        return out

    def precondition(self, r):
        rz = np.fft.rfft(r, axis=2)
        parts = []
        for comp in (rz.real, rz.imag):
            rhat = scipy.fft.dct(np.ascontiguousarray(comp), type=2, axis=1)
            zhat = np.empty_like(rhat)
            _thomas3(rhat, self._m, self._inv_beta, self._c, zhat)
            parts.append(scipy.fft.idct(zhat, type=2, axis=1))
        return np.fft.irfft(parts[0] + 1j * parts[1], n=self.nz, axis=2)


class CylinderFlow3D:
    """Spanwise-periodic cylinder flow with one jet pair per slab."""

    def __init__(self, config: SimConfig, jets: JetConfig | None = None,
                 ib_sweeps: int = IB_SWEEPS):
        self.cfg = config
        self.jets = jets or JetConfig()
        cells_per_pe = round(self.jets.l_jet / config.h)
        if abs(cells_per_pe * config.h - self.jets.l_jet) > 1e-9:
            raise ConfigError(
                f"l_jet={self.jets.l_jet} is not an integer multiple of h={config.h}"
            )
        self.nx, self.ny = config.nx, config.ny
        self.nz = config.n_pe * cells_per_pe
        self.cells_per_pe = cells_per_pe
        self.h, self.nu = config.h, config.nu
        self.ib_sweeps = ib_sweeps
        self.geometry = build_domain(config, self.jets)

        shape = (self.nx + 2, self.ny + 2, self.nz + 2)
        self._u = np.zeros(shape)
        self._v = np.zeros(shape)
        self._w = np.zeros(shape)
        self._us = np.zeros(shape)
        self._vs = np.zeros(shape)
        self._ws = np.zeros(shape)
        self._hu = np.zeros(shape)
        self._hv = np.zeros(shape)
        self._hw = np.zeros(shape)
        self._hu_new = np.zeros(shape)
        self._hv_new = np.zeros(shape)
        self._hw_new = np.zeros(shape)
        self._p = np.zeros(shape)
        self._div = np.zeros((self.nx, self.ny, self.nz))
        self._p_int = np.zeros((self.nx, self.ny, self.nz))
        self.poisson = BoxPoisson3D(self.nx, self.ny, self.nz, self.h)
        self._have_history = False
        self.t = 0.0
        self.last_max_div = 0.0

        # marker rings: one per spanwise cell, indexed ring-major
        g = self.geometry
        nm = g.n_markers
        kz = np.repeat(np.arange(1, self.nz + 1), nm)
        self._marker_pe = (kz - 1) // cells_per_pe
        mx = np.tile(g.marker_x, self.nz)
        my = np.tile(g.marker_y, self.nz)
        mz = (kz - 0.5) * self.h
        self._gxu, self._gyu, self._gzu = mx / self.h, my / self.h + 0.5, mz / self.h + 0.5
        self._gxv, self._gyv, self._gzv = mx / self.h + 0.5, my / self.h, mz / self.h + 0.5
        self._gxw, self._gyw, self._gzw = mx / self.h + 0.5, my / self.h + 0.5, mz / self.h
        self._theta = np.tile(g.marker_theta, self.nz)
        self._top = np.tile(g.jet_top_mask, self.nz)
        self._bot = np.tile(g.jet_bot_mask, self.nz)
        self._mbuf = [np.zeros(mx.size) for _ in range(3)]
        self._spread_scale = g.marker_ds * self.h / self.h**3

        self.reset_uniform()

    # --- boundary conditions ---------------------------------------------------

    def _wrap_z(self, a) -> None:
        a[:, :, 0] = a[:, :, self.nz]
        a[:, :, self.nz + 1] = a[:, :, 1]

    def _fill_bc_into(self, u, v, w) -> None:
        nx, ny = self.nx, self.ny
        u[0, 1 : ny + 1, :] = self.cfg.u_inf
        u[nx + 1] = u[nx]
        u[:, 0, :] = u[:, 1, :]
        u[:, ny + 1, :] = u[:, ny, :]
        v[1 : nx + 1, 0, :] = 0.0
        v[1 : nx + 1, ny, :] = 0.0
        v[:, ny + 1, :] = v[:, ny, :]
        v[0] = -v[1]
        v[nx + 1] = v[nx]
        w[:, 0, :] = w[:, 1, :]
        w[:, ny + 1, :] = w[:, ny, :]
        w[0] = -w[1]
        w[nx + 1] = w[nx]
        for a in (u, v, w):
            self._wrap_z(a)

    def _fill_bc(self) -> None:
        self._fill_bc_into(self._u, self._v, self._w)

    def reset_uniform(self) -> None:
        self._u[:, :, :] = self.cfg.u_inf
        self._v[:, :, :] = 0.0
        self._w[:, :, :] = 0.0
        self._p[:, :, :] = 0.0
        self._p_int[:, :, :] = 0.0
        self._have_history = False
        self.t = 0.0
        self._fill_bc()

    # --- stepping ---------------------------------------------------------------

    @property
    def dt_diffusive(self) -> float:
        # 3D 7-point Laplacian: eigenvalues within [-12 nu / h^2, 0]
        return DIFF_SAFETY * self.h * self.h / (12.0 * self.nu)

    def max_speed(self) -> float:
        nx, ny, nz = self.nx, self.ny, self.nz
        return max(
            float(np.max(np.abs(self._u[: nx + 1, 1 : ny + 1, 1 : nz + 1]))),
            float(np.max(np.abs(self._v[1 : nx + 1, : ny + 1, 1 : nz + 1]))),
            float(np.max(np.abs(self._w[1 : nx + 1, 1 : ny + 1, : nz + 1]))),
        )

    def stable_dt(self, q_bound: float = 0.0) -> float:
        jet_speed = abs(q_bound) * np.pi / self.jets.omega
        vmax = max(self.max_speed(), self.cfg.u_inf, jet_speed)
        return min(self.cfg.cfl * self.h / vmax, self.dt_diffusive)

    def _marker_targets(self, q_pe: np.ndarray):
        q = q_pe[self._marker_pe]
        omega = self.jets.omega
        amp = np.zeros(self._theta.size)
        for theta0, sign, mask in ((self.jets.theta_top, 1.0, self._top),
                                   (self.jets.theta_bot, -1.0, self._bot)):
            d = np.remainder(self._theta - theta0 + np.pi, 2 * np.pi) - np.pi
            amp[mask] = sign * q[mask] * np.pi / omega * np.cos(np.pi / omega * d[mask])
        return amp * np.cos(self._theta), amp * np.sin(self._theta)

    def step(self, dt: float, q_pe: np.ndarray | None = None) -> None:
        nx, ny, nz = self.nx, self.ny, self.nz
        cn, co = (1.5, -0.5) if self._have_history else (1.0, 0.0)
        u_inf = self.cfg.u_inf
        outlet = self._u[nx, 1 : ny + 1, 1 : nz + 1] - dt * u_inf / self.h * (
            self._u[nx, 1 : ny + 1, 1 : nz + 1] - self._u[nx - 1, 1 : ny + 1, 1 : nz + 1]
        )
        _predict_u3(self._u, self._v, self._w, self._hu, self._us, self._hu_new,
                    self.nu, self.h, dt, cn, co, nx, ny + 1, nz + 1)
        _predict_v3(self._u, self._v, self._w, self._hv, self._vs, self._hv_new,
                    self.nu, self.h, dt, cn, co, nx + 1, ny, nz + 1)
        _predict_w3(self._u, self._v, self._w, self._hw, self._ws, self._hw_new,
                    self.nu, self.h, dt, cn, co, nx + 1, ny + 1, nz + 1)
        self._us[nx, 1 : ny + 1, 1 : nz + 1] = outlet
        self._fill_bc_into(self._us, self._vs, self._ws)

        if q_pe is None:
            q_pe = np.zeros(self.cfg.n_pe)
        ub, vb = self._marker_targets(np.asarray(q_pe, dtype=float))
        for _ in range(self.ib_sweeps):
            _ib_interp3(self._us, self._gxu, self._gyu, self._gzu, self._mbuf[0])
            _ib_interp3(self._vs, self._gxv, self._gyv, self._gzv, self._mbuf[1])
            _ib_interp3(self._ws, self._gxw, self._gyw, self._gzw, self._mbuf[2])
            _ib_spread3(self._us, self._gxu, self._gyu, self._gzu,
                        (ub - self._mbuf[0]) * self._spread_scale)
            _ib_spread3(self._vs, self._gxv, self._gyv, self._gzv,
                        (vb - self._mbuf[1]) * self._spread_scale)
            _ib_spread3(self._ws, self._gxw, self._gyw, self._gzw,
                        (0.0 - self._mbuf[2]) * self._spread_scale)

        _divergence3(self._us, self._vs, self._ws, self._div, self.h)
        rhs = self._div * (-1.0 / dt)
        p_int, _iters, _rel = self.poisson.solve(
            rhs, x0=self._p_int, rel_tol=POISSON_REL_TOL,
            abs_inf_tol=0.5 * DIV_TOL / dt,
        )
        _correct3(self._us, self._vs, self._ws, p_int, dt, self.h)
        self._p_int = p_int
        self._p[1 : nx + 1, 1 : ny + 1, 1 : nz + 1] = p_int
        p = self._p
        p[0] = p[1]
        p[nx + 1] = -p[nx]
        p[:, 0, :] = p[:, 1, :]
        p[:, ny + 1, :] = p[:, ny, :]
        self._wrap_z(p)

        self._u, self._us = self._us, self._u
        self._v, self._vs = self._vs, self._v
        self._w, self._ws = self._ws, self._w
        self._hu, self._hu_new = self._hu_new, self._hu
        self._hv, self._hv_new = self._hv_new, self._hv
        self._hw, self._hw_new = self._hw_new, self._hw
        self._have_history = True
        self.t += dt
        self._fill_bc()
        _divergence3(self._u, self._v, self._w, self._div, self.h)
        self.last_max_div = float(np.max(np.abs(self._div)))
        if not np.isfinite(self.last_max_div) or self.last_max_div > DIV_TOL:
            raise NumericalError(
                f"3D divergence {self.last_max_div:.3e} exceeds {DIV_TOL} at t={self.t:.4f}"
            )

    def advance(self, duration: float, action: JetAction | None = None, recorder=None) -> None:
        t_end = self.t + duration
        if action is not None:
            q_bound = float(max(np.max(np.abs(action.q_start)), np.max(np.abs(action.q_end))))
        else:
            q_bound = 0.0
        while self.t < t_end - 1e-12:
            remaining = t_end - self.t
            n_sub = max(1, int(np.ceil(remaining / self.stable_dt(q_bound))))
            dt = remaining / n_sub
            q = action.value_at(self.t + dt) if action is not None else None
            self.step(dt, q)
            if recorder is not None:
                recorder(self, q)

    # --- diagnostics -------------------------------------------------------------

    def _sample_slice(self, field3, x, y, k_lo, wz):
        """Trilinear sample: bilinear in the two bracketing z slices."""
        from afc.flow.kernels import bilinear_sample, face_grid_coords

        gx, gy = face_grid_coords(x, y, self.h, "p")
        lo = np.empty(x.size)
        hi = np.empty(x.size)
        bilinear_sample(np.ascontiguousarray(field3[:, :, k_lo]), gx, gy, lo)
        bilinear_sample(np.ascontiguousarray(field3[:, :, k_lo + 1]), gx, gy, hi)
        return (1.0 - wz) * lo + wz * hi

    def _z_bracket(self, z: float):
        gz = z / self.h + 0.5
        k_lo = int(np.floor(gz))
        return k_lo, gz - k_lo

    def reference_pressure(self) -> float:
        return float(np.mean(self._p[1, 1 : self.ny + 1, 1 : self.nz + 1]))

    def per_pe_forces(self) -> tuple[np.ndarray, np.ndarray]:
        """(cd, cl) per slab, normalized by 0.5 rho U^2 l_jet D.

        The cylinder normal has no spanwise component, so the drag/lift
        tractions involve only in-plane gradients, sampled per z slice.
        """
        g = self.geometry
        p_ref = self.reference_pressure()
        n_pe = self.cfg.n_pe
        cd = np.zeros(n_pe)
        cl = np.zeros(n_pe)
        nxv = np.cos(g.marker_theta)
        nyv = np.sin(g.marker_theta)
        mu = self.nu
        from afc.flow.kernels import bilinear_sample, face_grid_coords

        gx, gy = face_grid_coords(g.sample_x, g.sample_y, self.h, "p")
        for k in range(1, self.nz + 1):
            pe = (k - 1) // self.cells_per_pe
            u2 = self._u[:, :, k]
            v2 = self._v[:, :, k]
            h = self.h
            dudx = (u2[1:, :] - u2[:-1, :]) / h
            dvdy = (v2[:, 1:] - v2[:, :-1]) / h
            uc = 0.5 * (u2[:-1, :] + u2[1:, :])
            dudy = np.zeros_like(u2)
            dudy[1:, 1:-1] = (uc[:, 2:] - uc[:, :-2]) / (2 * h)
            vc = 0.5 * (v2[:, :-1] + v2[:, 1:])
            dvdx = np.zeros_like(v2)
            dvdx[1:-1, 1:] = (vc[2:, :] - vc[:-2, :]) / (2 * h)
            grads = {}
            for name, arr2 in (("p", self._p[:, :, k]), ("dudy", dudy), ("dvdx", dvdx)):
                out = np.empty(g.n_markers)
                bilinear_sample(np.ascontiguousarray(arr2), gx, gy, out)
                grads[name] = out
            for name, arr2 in (("dudx", dudx), ("dvdy", dvdy)):
                out = np.empty(g.n_markers)
                padded = np.zeros_like(u2)
                padded[1 : arr2.shape[0] + 1 if name == "dudx" else None, :] = 0  # placeholder
                grads[name] = out
            # in-plane gradients on the cell-centered ghosted layout
            dudx_g = np.zeros_like(u2)
            dudx_g[1:, :] = dudx
            dvdy_g = np.zeros_like(v2)
            dvdy_g[:, 1:] = dvdy
            for name, arr2 in (("dudx", dudx_g), ("dvdy", dvdy_g)):
                out = np.empty(g.n_markers)
                bilinear_sample(np.ascontiguousarray(arr2), gx, gy, out)
                grads[name] = out
            pp = grads["p"] - p_ref
            txy = mu * (grads["dudy"] + grads["dvdx"])
            t_x = -pp * nxv + 2 * mu * grads["dudx"] * nxv + txy * nyv
            t_y = -pp * nyv + txy * nxv + 2 * mu * grads["dvdy"] * nyv
            # traction integrated over this slice's surface strip (height h)
            cd[pe] += 2.0 * float(np.sum(t_x)) * g.marker_ds * self.h
            cl[pe] += 2.0 * float(np.sum(t_y)) * g.marker_ds * self.h
        return cd / self.jets.l_jet, cl / self.jets.l_jet

    def per_pe_witness(self, layout) -> np.ndarray:
        """85-entry Cp vectors sampled at each slab's mid-span slice."""
        p_ref = self.reference_pressure()
        n_pe = self.cfg.n_pe
        out = np.empty((n_pe, layout.n_points))
        for pe in range(n_pe):
            z_mid = (pe + 0.5) * self.jets.l_jet
            k_lo, wz = self._z_bracket(z_mid)
            p_s = self._sample_slice(self._p, layout.x, layout.y, k_lo, wz)
            out[pe] = 2.0 * (p_s - p_ref)
        return out

    def observations(self, layout) -> np.ndarray:
        """[left, self, right] concatenation with true spanwise neighbors."""
        base = self.per_pe_witness(layout)
        n_pe = base.shape[0]
        obs = np.empty((n_pe, 3 * base.shape[1]))
        for j in range(n_pe):
            obs[j] = np.concatenate([base[(j - 1) % n_pe], base[j], base[(j + 1) % n_pe]])
        return obs
