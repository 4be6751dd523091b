import numpy as np
import pytest

import shearmodes as sm

Y_MAX = 30.0
NY = 601
T0 = 0.15
NT = 16


@pytest.fixture(scope="session")
def pair():
    return sm.find_tau(sm.DispersionProblem())


@pytest.fixture(scope="session")
def y_grid():
    return np.linspace(0.0, Y_MAX, NY)


@pytest.fixture(scope="session")
def t_grid():
    return np.linspace(0.0, T0, NT)


@pytest.fixture(scope="session")
def gauss_prof():
    return sm.make_profile("gaussian-bump", {"U0": 1.0, "A": 1.0})


@pytest.fixture(scope="session")
def gauss_flow(gauss_prof):
    return sm.HeatFlow(gauss_prof)


@pytest.fixture(scope="session")
def gauss_field(gauss_prof, y_grid, t_grid):
    return sm.solve_heat(gauss_prof, y_grid, t_grid)


@pytest.fixture(scope="session")
def gauss_path(gauss_flow, gauss_prof):
    return sm.track_critical_point(gauss_flow, gauss_prof.a0, T0)


@pytest.fixture(scope="session")
def gauss_scaled(pair, gauss_path):
    return sm.scale_eigendata(pair, gauss_path)


@pytest.fixture(scope="session")
def alg4_prof():
    return sm.make_profile("algebraic-bump", {"U0": 1.0, "A": 4.0})


@pytest.fixture(scope="session")
def alg4_field(alg4_prof, y_grid, t_grid):
    return sm.solve_heat(alg4_prof, y_grid, t_grid)


@pytest.fixture(scope="session")
def alg4_path(alg4_prof):
    return sm.track_critical_point(sm.HeatFlow(alg4_prof), alg4_prof.a0, T0)


@pytest.fixture(scope="session")
def alg4_scaled(pair, alg4_path):
    return sm.scale_eigendata(pair, alg4_path)
