import numpy as np
import pytest
from scipy.linalg import solve_banded
from scipy.special import erf

import shearmodes as sm
from shearmodes.errors import QuadratureFailure
from shearmodes.heat import HeatFlow, frozen_field, heat_residual_probe, solve_heat
from shearmodes.profiles import build_family


def test_erf_layer_is_self_similar_exact():
    prof = build_family("monotone", {"U0": 1.0})
    y = np.linspace(0, 30, 301)
    ts = np.linspace(0, 0.25, 6)
    field = solve_heat(prof, y, ts)
    for i, t in enumerate(ts):
        exact = erf(y / (2 * np.sqrt(1 + t)))
        assert np.max(np.abs(field.us[i] - exact)) < 1e-10


def test_initial_slice_is_identity(gauss_prof, y_grid):
    field = solve_heat(gauss_prof, y_grid, np.array([0.0, 0.05]))
    exact = gauss_prof.derivs(y_grid)
    for j in range(4):
        got = (field.us, field.dy_us, field.d2y_us, field.d3y_us)[j][0]
        assert np.array_equal(got, exact[j])


def _cn_reference(prof, t_end, Y=38.0, ny=4001, nt=2000):
    y = np.linspace(0, Y, ny)
    dy = y[1] - y[0]
    dt = t_end / nt
    u = prof.derivs(y)[0].copy()
    r = dt / (2 * dy * dy)
    n = ny - 2
    ab = np.zeros((3, n))
    ab[0, 1:] = -r
    ab[1, :] = 1 + 2 * r
    ab[2, :-1] = -r
    for _ in range(nt):
        rhs = u[1:-1] + r * (u[2:] - 2 * u[1:-1] + u[:-2])
        rhs[0] += r * u[0]
        rhs[-1] += r * u[-1]
        u[1:-1] = solve_banded((1, 1), ab, rhs)
    return y, u


def test_kernel_solution_matches_crank_nicolson(gauss_prof):
    t = 0.1
    yr, ur = _cn_reference(gauss_prof, t)
    flow = HeatFlow(gauss_prof)
    sel = yr <= 30.0
    u_kernel = flow.derivs(t, yr[sel], orders=(0,))[0]
    gap = np.max(np.abs(u_kernel - ur[sel]))
    # CN reference error is O(dt^2 + dy^2) ~ 1e-5 at this resolution
    assert gap < 5e-5


def test_pde_residual_probe_small(gauss_field, y_grid):
    r = heat_residual_probe(gauss_field.flow, 0.08, y_grid[::12])
    assert r < 1e-6


def test_pde_residual_probe_small_algebraic(alg4_field, y_grid):
    r = heat_residual_probe(alg4_field.flow, 0.05, y_grid[::12])
    assert r < 1e-6


def test_wall_value_exactly_zero(gauss_field):
    assert np.all(gauss_field.us[:, 0] == 0.0)


def test_far_field_and_max_principle(gauss_field):
    assert np.max(np.abs(gauss_field.us[:, -1] - 1.0)) < 1e-3
    assert gauss_field.max_principle_gap() < 1e-9


def test_dt_equals_d2y_by_construction(gauss_field):
    assert np.array_equal(gauss_field.dt_us, gauss_field.d2y_us)


def test_quadrature_guard_trips_on_tiny_time(gauss_prof, y_grid):
    flow = HeatFlow(gauss_prof, max_nodes=4000)
    with pytest.raises(QuadratureFailure):
        flow.derivs(1e-7, y_grid)


def test_solve_heat_self_check_passes(gauss_prof):
    y = np.linspace(0, 30, 201)
    field = solve_heat(gauss_prof, y, np.linspace(0, 0.1, 3), quad_tol=1e-8)
    assert field.us.shape == (3, 201)


def test_slice_interp_matches_direct_evaluation(gauss_field, y_grid):
    # cubic-in-t interpolation error must stay far below the stepper's
    # O(dt^2) discretization errors (~1e-4 at the defaults)
    t = 0.0733
    us_i, dy_i = gauss_field.slice_interp(t)
    us_d, dy_d = gauss_field.flow.derivs(t, y_grid, orders=(0, 1))
    assert np.max(np.abs(us_i - us_d)) < 2e-6
    assert np.max(np.abs(dy_i - dy_d)) < 2e-5


def test_frozen_field_slices_are_static(gauss_prof, y_grid):
    ff = frozen_field(gauss_prof, y_grid, np.linspace(0, 0.3, 4))
    assert np.array_equal(ff.us[0], ff.us[-1])
    assert np.array_equal(ff.us[0], gauss_prof.derivs(y_grid)[0])


def test_csv_rows_shape(gauss_prof):
    y = np.linspace(0, 30, 11)
    field = solve_heat(gauss_prof, y, np.array([0.0, 0.05]), check=False)
    rows = list(field.to_rows())
    assert len(rows) == 22
    assert len(rows[0]) == 5
