import numpy as np
import pytest

from afc.flow.config import SimConfig
from afc.flow.solver import CylinderFlow, PeriodicBox


def taylor_green_box(n: int, nu: float = 0.01) -> PeriodicBox:
    box = PeriodicBox(n, n, 1.0, nu)
    k = 2 * np.pi
    box.set_velocity(
        lambda x, y: np.sin(k * x) * np.cos(k * y),
        lambda x, y: -np.cos(k * x) * np.sin(k * y),
    )
    return box


def run_to(box: PeriodicBox, t_end: float, cfl: float = 0.25) -> float:
    dt = min(cfl * box.h, box.dt_diffusive)
    nsteps = int(np.ceil(t_end / dt))
    dt = t_end / nsteps
    worst_div = 0.0
    for _ in range(nsteps):
        box.step(dt)
        worst_div = max(worst_div, box.last_max_div)
    return worst_div


def tg_field_error(n: int, t_end: float, nu: float = 0.01) -> float:
    box = taylor_green_box(n, nu)
    run_to(box, t_end)
    u, _, _ = box.interior()
    k = 2 * np.pi
    xi = np.arange(1, n + 1) * box.h
    yc = (np.arange(1, n + 1) - 0.5) * box.h
    exact = np.sin(k * xi[:, None]) * np.cos(k * yc[None, :]) * np.exp(-2 * nu * k * k * t_end)
    return float(np.max(np.abs(u - exact)))


def test_taylor_green_energy_decay_within_1pct():
    nu, t_end = 0.01, 1.0
    box = taylor_green_box(64, nu)
    ke0 = box.kinetic_energy()
    worst_div = run_to(box, t_end)
    k = 2 * np.pi
    expected = ke0 * np.exp(-4 * nu * k * k * t_end)
    assert abs(box.kinetic_energy() - expected) / expected < 0.01
    assert worst_div <= 1e-5


def test_spatial_convergence_order():
    e_coarse = tg_field_error(32, 0.5)
    e_fine = tg_field_error(64, 0.5)
    order = np.log2(e_coarse / e_fine)
    assert order >= 1.9


def test_richardson_three_grid_order():
    """Grid-tripling Richardson estimate without the analytic solution."""
    kes = []
    for n in (16, 32, 64):
        box = taylor_green_box(n)
        run_to(box, 0.5)
        kes.append(box.kinetic_energy())
    order = np.log2((kes[0] - kes[1]) / (kes[1] - kes[2]))
    assert order >= 1.9


def test_uniform_flow_is_equilibrium(tiny_sim):
    flow = CylinderFlow(tiny_sim, include_body=False)
    before = flow.field()
    for _ in range(50):
        flow.step(0.02)
    after = flow.field()
    assert np.array_equal(before.u, after.u)
    assert np.array_equal(before.v, after.v)
    assert np.array_equal(before.p, after.p)
    assert after.t == pytest.approx(1.0)


def test_divergence_bound_and_finiteness(tiny_sim):
    flow = CylinderFlow(tiny_sim)
    for _ in range(300):
        flow.step(flow.stable_dt())
        assert flow.last_max_div <= 1e-5
    f = flow.field()
    assert np.all(np.isfinite(f.u)) and np.all(np.isfinite(f.v)) and np.all(np.isfinite(f.p))


def test_zero_actuation_matches_unactuated(tiny_sim):
    """Jets at Q=0 reduce to no-slip: identical fields after 100 steps."""
    a = CylinderFlow(tiny_sim)
    b = CylinderFlow(tiny_sim)
    for _ in range(100):
        dt = a.stable_dt()
        a.step(dt, q=0.0)
        b.step(b.stable_dt())
    fa, fb = a.field(), b.field()
    assert np.max(np.abs(fa.u - fb.u)) <= 1e-10
    assert np.max(np.abs(fa.v - fb.v)) <= 1e-10


def test_determinism_bitwise(tiny_sim):
    def run():
        flow = CylinderFlow(tiny_sim)
        for k in range(60):
            flow.step(flow.stable_dt(), q=0.05 if k > 20 else 0.0)
        return flow.field()

    f1, f2 = run(), run()
    assert np.array_equal(f1.u, f2.u)
    assert np.array_equal(f1.v, f2.v)
    assert np.array_equal(f1.p, f2.p)


def test_advance_hits_interval_end_exactly(tiny_sim):
    flow = CylinderFlow(tiny_sim)
    flow.advance(0.777)
    assert flow.t == pytest.approx(0.777, abs=1e-12)


def test_cfl_precondition_enforced(tiny_sim):
    flow = CylinderFlow(tiny_sim)
    dt = flow.stable_dt()
    assert dt <= tiny_sim.cfl * tiny_sim.h / max(flow.max_speed(), 1.0) + 1e-15
