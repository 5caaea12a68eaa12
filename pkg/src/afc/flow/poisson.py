"""Pressure Poisson solvers for the projection step.

Both solvers run preconditioned conjugate gradient on the negated 5-point
Laplacian with the previous pressure as initial guess. The preconditioner is
a fast transform-based solve of the same constant-coefficient operator (DCT
in y with tridiagonal sweeps in x for the inflow/outflow box, FFT for the
doubly periodic box), so PCG typically converges in one or two iterations
while the residual contract stays explicit.

Boundary conditions of the box case: homogeneous Neumann at the inlet and the
free-slip walls (normal velocity is prescribed there), homogeneous Dirichlet
at the outlet face (the zero reference pressure).
"""

from __future__ import annotations

import numpy as np
import scipy.fft
from numba import njit

from afc.errors import NumericalError


@njit(cache=True)
def neg_laplacian_box(p, out, h):
    """out = -lap(p) with Neumann W/S/N and Dirichlet-at-face E folds."""
    nx, ny = p.shape
    ih2 = 1.0 / (h * h)
    for i in range(nx):
        for j in range(ny):
            c = p[i, j]
            pw = p[i - 1, j] if i > 0 else c
            pe = p[i + 1, j] if i < nx - 1 else -c
            ps = p[i, j - 1] if j > 0 else c
            pn = p[i, j + 1] if j < ny - 1 else c
            out[i, j] = -(pw + pe + ps + pn - 4.0 * c) * ih2


@njit(cache=True)
def neg_laplacian_periodic(p, out, h):
    nx, ny = p.shape
    ih2 = 1.0 / (h * h)
    for i in range(nx):
        im = i - 1 if i > 0 else nx - 1
        ip = i + 1 if i < nx - 1 else 0
        for j in range(ny):
            jm = j - 1 if j > 0 else ny - 1
            jp = j + 1 if j < ny - 1 else 0
            out[i, j] = -(p[im, j] + p[ip, j] + p[i, jm] + p[i, jp] - 4.0 * p[i, j]) * ih2


@njit(cache=True)
def _thomas_solve(rhat, m, inv_beta, c, out):
    """Solve the per-mode tridiagonal systems, vectorized over modes."""
    nx, nk = rhat.shape
    for k in range(nk):
        out[0, k] = rhat[0, k]
    for i in range(1, nx):
        for k in range(nk):
            out[i, k] = rhat[i, k] - m[i, k] * out[i - 1, k]
    for k in range(nk):
        out[nx - 1, k] *= inv_beta[nx - 1, k]
    for i in range(nx - 2, -1, -1):
        for k in range(nk):
            out[i, k] = (out[i, k] - c * out[i + 1, k]) * inv_beta[i, k]


class _PcgMixin:
    """Shared PCG loop; subclasses provide apply() and precondition()."""

    def solve(
        self,
        rhs: np.ndarray,
        x0: np.ndarray | None = None,
        rel_tol: float = 1e-6,
        abs_inf_tol: float | None = None,
        max_iter: int = 100,
    ) -> tuple[np.ndarray, int, float]:
        """Return (solution, iterations, relative residual)."""
        b = self._project(rhs)
        x = np.zeros_like(b) if x0 is None else self._project(x0.copy())
        b_norm = np.linalg.norm(b)
        if b_norm == 0.0:
            return x * 0.0, 0, 0.0

        r = b - self.apply(x)
        d = None
        rho_old = 0.0
        for it in range(max_iter + 1):
            r_norm = np.linalg.norm(r)
            rel = r_norm / b_norm
            if rel <= rel_tol and (abs_inf_tol is None or np.max(np.abs(r)) <= abs_inf_tol):
                return x, it, rel
            if it == max_iter:
                break
            z = self.precondition(r)
            rho = float(np.vdot(r, z).real)
            d = z if d is None else z + (rho / rho_old) * d
            rho_old = rho
            q = self.apply(d)
            alpha = rho / float(np.vdot(d, q).real)
            x += alpha * d
            r -= alpha * q
            x = self._project(x)
        raise NumericalError(
            f"pressure solve stalled: relative residual {rel:.3e} after {max_iter} iterations"
        )

    def _project(self, x: np.ndarray) -> np.ndarray:
        return x


class BoxPoisson(_PcgMixin):
    """Inflow/outflow box: Neumann west/south/north, Dirichlet east face."""

    def __init__(self, nx: int, ny: int, h: float):
        self.nx, self.ny, self.h = nx, ny, h
        ih2 = 1.0 / (h * h)
        # Eigenvalues of the Neumann y-part under DCT-II modes.
        k = np.arange(ny)
        lam_y = (2.0 - 2.0 * np.cos(np.pi * k / ny)) * ih2
        # Tridiagonal x-part: diag b_i + lam_y, off-diagonals -1/h^2.
        diag_x = np.full(nx, 2.0 * ih2)
        diag_x[0] = 1.0 * ih2       # Neumann fold
        diag_x[-1] = 3.0 * ih2      # Dirichlet-at-face fold
        b = diag_x[:, None] + lam_y[None, :]
        self._c = -ih2
        self._m = np.zeros((nx, ny))
        beta = np.zeros((nx, ny))
        beta[0] = b[0]
        for i in range(1, nx):
            self._m[i] = self._c / beta[i - 1]
            beta[i] = b[i] - self._m[i] * self._c
        self._inv_beta = 1.0 / beta

    def apply(self, p: np.ndarray) -> np.ndarray:
        out = np.empty_like(p)
        neg_laplacian_box(p, out, self.h)
        return out

    def precondition(self, r: np.ndarray) -> np.ndarray:
        rhat = scipy.fft.dct(r, type=2, axis=1)
        zhat = np.empty_like(rhat)
        _thomas_solve(rhat, self._m, self._inv_beta, self._c, zhat)
        return scipy.fft.idct(zhat, type=2, axis=1)


class PeriodicPoisson(_PcgMixin):
    """Doubly periodic box; the constant null space is pinned to zero mean."""

    def __init__(self, nx: int, ny: int, h: float):
        self.nx, self.ny, self.h = nx, ny, h
        ih2 = 1.0 / (h * h)
        kx = np.arange(nx)
        ky = np.arange(ny // 2 + 1)
        lam_x = (2.0 - 2.0 * np.cos(2 * np.pi * kx / nx)) * ih2
        lam_y = (2.0 - 2.0 * np.cos(2 * np.pi * ky / ny)) * ih2
        denom = lam_x[:, None] + lam_y[None, :]
        denom[0, 0] = 1.0
        self._inv_eig = 1.0 / denom
        self._inv_eig[0, 0] = 0.0

    def apply(self, p: np.ndarray) -> np.ndarray:
        out = np.empty_like(p)
        neg_laplacian_periodic(p, out, self.h)
        return out

    def precondition(self, r: np.ndarray) -> np.ndarray:
        rhat = np.fft.rfft2(r)
        return np.fft.irfft2(rhat * self._inv_eig, s=r.shape)

    def _project(self, x: np.ndarray) -> np.ndarray:
        return x - x.mean()
