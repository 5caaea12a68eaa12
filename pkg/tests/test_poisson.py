import numpy as np
import pytest

from afc.errors import NumericalError
from afc.flow.poisson import (
    BoxPoisson,
    PeriodicPoisson,
    neg_laplacian_box,
    neg_laplacian_periodic,
)


def dense_box_operator(nx, ny, h):
    """Brute-force matrix of the folded Laplacian, for cross-checking."""
    n = nx * ny
    a = np.zeros((n, n))
    ih2 = 1.0 / (h * h)

    def idx(i, j):
        return i * ny + j

    for i in range(nx):
        for j in range(ny):
            row = idx(i, j)
            diag = 4.0
            if i > 0:
                a[row, idx(i - 1, j)] = -ih2
            else:
                diag -= 1.0
            if i < nx - 1:
                a[row, idx(i + 1, j)] = -ih2
            else:
                diag += 1.0  # Dirichlet ghost: -p
            if j > 0:
                a[row, idx(i, j - 1)] = -ih2
            else:
                diag -= 1.0
            if j < ny - 1:
                a[row, idx(i, j + 1)] = -ih2
            else:
                diag -= 1.0
            a[row, row] = diag * ih2
    return a


def test_box_kernel_matches_dense_matrix(rng):
    nx, ny, h = 7, 5, 0.3
    dense = dense_box_operator(nx, ny, h)
    p = rng.normal(size=(nx, ny))
    out = np.empty_like(p)
    neg_laplacian_box(p, out, h)
    np.testing.assert_allclose(out.ravel(), dense @ p.ravel(), rtol=1e-12, atol=1e-12)


def test_box_solver_inverts_operator(rng):
    nx, ny, h = 41, 29, 0.07
    solver = BoxPoisson(nx, ny, h)
    x_true = rng.normal(size=(nx, ny))
    b = solver.apply(x_true)
    x, iters, rel = solver.solve(b, rel_tol=1e-10)
    assert iters <= 3
    assert rel <= 1e-10
    np.testing.assert_allclose(x, x_true, atol=1e-9)


def test_box_solver_warm_start(rng):
    solver = BoxPoisson(16, 16, 0.1)
    x_true = rng.normal(size=(16, 16))
    b = solver.apply(x_true)
    x, _, _ = solver.solve(b, x0=x_true + 1e-8 * rng.normal(size=(16, 16)), rel_tol=1e-12)
    np.testing.assert_allclose(x, x_true, atol=1e-9)


def test_periodic_solver_inverts_operator(rng):
    nx, ny, h = 24, 36, 0.05
    solver = PeriodicPoisson(nx, ny, h)
    x_true = rng.normal(size=(nx, ny))
    x_true -= x_true.mean()
    b = solver.apply(x_true)
    x, _, rel = solver.solve(b, rel_tol=1e-10)
    assert rel <= 1e-10
    np.testing.assert_allclose(x, x_true, atol=1e-9)


def test_periodic_kernel_wraps(rng):
    p = rng.normal(size=(8, 8))
    out = np.empty_like(p)
    neg_laplacian_periodic(p, out, 0.25)
    rolled = -(np.roll(p, 1, 0) + np.roll(p, -1, 0) + np.roll(p, 1, 1) + np.roll(p, -1, 1) - 4 * p) / 0.25**2
    np.testing.assert_allclose(out, rolled, rtol=1e-13)


def test_zero_rhs_returns_zero():
    solver = BoxPoisson(10, 10, 0.1)
    x, iters, rel = solver.solve(np.zeros((10, 10)))
    assert np.all(x == 0.0) and iters == 0 and rel == 0.0


def test_nonconvergence_raises(rng):
    solver = BoxPoisson(12, 12, 0.1)
    b = rng.normal(size=(12, 12))
    with pytest.raises(NumericalError):
        solver.solve(b, rel_tol=1e-30, abs_inf_tol=0.0, max_iter=2)
