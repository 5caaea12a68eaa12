"""Numba kernels for the staggered-grid fractional-step update.

Array layout: ghosted (nx+2, ny+2) float64 arrays indexed [i, j] with i along
x. Cell (i, j) for i, j in 1..nx/ny has its center at ((i-0.5)h, (j-0.5)h);
u[i, j] lives on the x-face at (i h, (j-0.5)h) and v[i, j] on the y-face at
((i-0.5)h, j h). Callers fill the ghost/boundary entries before each kernel.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def predict_u(u, v, h_old, u_star, h_new, nu, h, dt, c_new, c_old, i_end, j_end):
    """u* from explicit advection + diffusion; writes the new RHS into h_new."""
    ih = 1.0 / h
    ih2 = ih * ih
    for i in range(1, i_end):
        for j in range(1, j_end):
            ue = 0.5 * (u[i, j] + u[i + 1, j])
            uw = 0.5 * (u[i - 1, j] + u[i, j])
            un = 0.5 * (u[i, j] + u[i, j + 1])
            us = 0.5 * (u[i, j - 1] + u[i, j])
            vn = 0.5 * (v[i, j] + v[i + 1, j])
            vs = 0.5 * (v[i, j - 1] + v[i + 1, j - 1])
            adv = (ue * ue - uw * uw) * ih + (un * vn - us * vs) * ih
            lap = (u[i + 1, j] + u[i - 1, j] + u[i, j + 1] + u[i, j - 1] - 4.0 * u[i, j]) * ih2
            rhs = -adv + nu * lap
            h_new[i, j] = rhs
            u_star[i, j] = u[i, j] + dt * (c_new * rhs + c_old * h_old[i, j])


@njit(cache=True)
def predict_v(u, v, h_old, v_star, h_new, nu, h, dt, c_new, c_old, i_end, j_end):
    ih = 1.0 / h
    ih2 = ih * ih
    for i in range(1, i_end):
        for j in range(1, j_end):
            vn = 0.5 * (v[i, j] + v[i, j + 1])
            vs = 0.5 * (v[i, j - 1] + v[i, j])
            ve = 0.5 * (v[i, j] + v[i + 1, j])
            vw = 0.5 * (v[i - 1, j] + v[i, j])
            ue = 0.5 * (u[i, j] + u[i, j + 1])
            uw = 0.5 * (u[i - 1, j] + u[i - 1, j + 1])
            adv = (ue * ve - uw * vw) * ih + (vn * vn - vs * vs) * ih
            lap = (v[i + 1, j] + v[i - 1, j] + v[i, j + 1] + v[i, j - 1] - 4.0 * v[i, j]) * ih2
            rhs = -adv + nu * lap
            h_new[i, j] = rhs
            v_star[i, j] = v[i, j] + dt * (c_new * rhs + c_old * h_old[i, j])


@njit(cache=True)
def divergence(u, v, out, h):
    """Discrete divergence on interior cells; out has shape (nx, ny)."""
    nx, ny = out.shape
    ih = 1.0 / h
    for i in range(1, nx + 1):
        for j in range(1, ny + 1):
            out[i - 1, j - 1] = (u[i, j] - u[i - 1, j] + v[i, j] - v[i, j - 1]) * ih


@njit(cache=True)
def correct_box(u, v, p, dt, h):
    """Projection update for the inflow/outflow box.

    The inlet face (i = 0) is Dirichlet and untouched; the outlet face uses
    the one-sided gradient consistent with the zero face pressure.
    """
    nx, ny = p.shape
    s = dt / h
    for i in range(1, nx):
        for j in range(1, ny + 1):
            u[i, j] -= s * (p[i, j - 1] - p[i - 1, j - 1])
    for j in range(1, ny + 1):
        u[nx, j] -= s * (-2.0 * p[nx - 1, j - 1])
    for i in range(1, nx + 1):
        for j in range(1, ny):
            v[i, j] -= s * (p[i - 1, j] - p[i - 1, j - 1])


@njit(cache=True)
def correct_periodic(u, v, p, dt, h):
    nx, ny = p.shape
    s = dt / h
    for i in range(1, nx + 1):
        for j in range(1, ny + 1):
            pe = p[i, j - 1] if i < nx else p[0, j - 1]
            u[i, j] -= s * (pe - p[i - 1, j - 1])
            pn = p[i - 1, j] if j < ny else p[i - 1, 0]
            v[i, j] -= s * (pn - p[i - 1, j - 1])


@njit(cache=True)
def max_abs_interior(a, i_end, j_end):
    m = 0.0
    for i in range(i_end):
        for j in range(1, j_end):
            x = abs(a[i, j])
            if x > m:
                m = x
    return m


@njit(cache=True, inline="always")
def _delta3(r):
    """Three-point regularized delta (Roma-Peskin), support |r| <= 1.5."""
    a = abs(r)
    if a <= 0.5:
        return (1.0 + math.sqrt(1.0 - 3.0 * a * a)) / 3.0
    if a <= 1.5:
        b = 1.0 - a
        return (5.0 - 3.0 * a - math.sqrt(1.0 - 3.0 * b * b)) / 6.0
    return 0.0


@njit(cache=True)
def ib_interp(field, gx, gy, out):
    """Sample a face field at marker grid coordinates with the delta kernel."""
    n = gx.shape[0]
    for m in range(n):
        i0 = int(round(gx[m]))
        j0 = int(round(gy[m]))
        acc = 0.0
        for i in range(i0 - 1, i0 + 2):
            wx = _delta3(gx[m] - i)
            if wx == 0.0:
                continue
            for j in range(j0 - 1, j0 + 2):
                wy = _delta3(gy[m] - j)
                if wy != 0.0:
                    acc += wx * wy * field[i, j]
        out[m] = acc


@njit(cache=True)
def ib_spread(field, gx, gy, vals):
    """Scatter marker values (pre-scaled by ds/h) back onto a face field."""
    n = gx.shape[0]
    for m in range(n):
        i0 = int(round(gx[m]))
        j0 = int(round(gy[m]))
        for i in range(i0 - 1, i0 + 2):
            wx = _delta3(gx[m] - i)
            if wx == 0.0:
                continue
            for j in range(j0 - 1, j0 + 2):
                wy = _delta3(gy[m] - j)
                if wy != 0.0:
                    field[i, j] += wx * wy * vals[m]


@njit(cache=True)
def bilinear_sample(field, gx, gy, out):
    """Plain bilinear sampling (used for diagnostics, not for IB forcing)."""
    n = gx.shape[0]
    for m in range(n):
        i0 = int(math.floor(gx[m]))
        j0 = int(math.floor(gy[m]))
        tx = gx[m] - i0
        ty = gy[m] - j0
        out[m] = (
            field[i0, j0] * (1.0 - tx) * (1.0 - ty)
            + field[i0 + 1, j0] * tx * (1.0 - ty)
            + field[i0, j0 + 1] * (1.0 - tx) * ty
            + field[i0 + 1, j0 + 1] * tx * ty
        )


def face_grid_coords(x: np.ndarray, y: np.ndarray, h: float, grid: str):
    """Map physical points to fractional indices of a ghosted face array."""
    if grid == "u":
        return x / h, y / h + 0.5
    if grid == "v":
        return x / h + 0.5, y / h
    if grid == "p":
        return x / h + 0.5, y / h + 0.5
    raise ValueError(f"unknown grid {grid!r}")
