import numpy as np
import pytest
from scipy.optimize import brentq

import shearmodes as sm
from shearmodes.errors import CurvatureVanished, HorizonExceeded
from shearmodes.heat import HeatFlow
from shearmodes.path import track_critical_point


def test_initial_conditions(gauss_path, gauss_prof):
    assert float(gauss_path.a(0.0)) == pytest.approx(gauss_prof.a0, abs=1e-12)
    assert float(gauss_path.lam(0.0)) == pytest.approx(gauss_prof.curvature,
                                                       rel=1e-10)


def test_path_against_per_slice_root_find(gauss_path, gauss_flow):
    """Independent oracle: bracketed root of d_y u_s at each time slice."""
    for t in np.linspace(0.01, 0.15, 6):
        a_path = float(gauss_path.a(t))

        def slope(yv):
            return gauss_flow.derivs(t, np.array([yv]), orders=(1,))[0][0]

        a_root = brentq(slope, a_path - 0.05, a_path + 0.05, xtol=1e-13)
        assert abs(a_path - a_root) < 1e-8, t


def test_path_stays_on_root_manifold(gauss_path):
    assert gauss_path.root_gap(np.linspace(0, 0.15, 9)) < 1e-9


def test_curvature_negative_and_flattening(gauss_path):
    ts = np.linspace(0, 0.15, 31)
    lam = gauss_path.lam(ts)
    assert np.all(lam < 0)
    # empirical monotone flattening for this family
    assert np.all(np.diff(np.abs(lam)) < 1e-12)


def test_horizon_guard(gauss_path):
    with pytest.raises(HorizonExceeded):
        gauss_path.a(0.2)


def test_shallow_bump_loses_curvature():
    prof = sm.make_profile("gaussian-bump", {"U0": 1.0, "A": 0.62})
    flow = HeatFlow(prof)
    with pytest.raises(CurvatureVanished):
        track_critical_point(flow, prof.a0, 0.15)
    truncated = track_critical_point(flow, prof.a0, 0.15,
                                     allow_truncation=True)
    assert truncated.t0 < 0.15
    # the window closes by near-annihilation of the extremum pair: the
    # curvature has collapsed well below its initial size at the cut
    lam_end = flow.derivs(truncated.t0,
                          np.array([float(truncated.a(truncated.t0))]),
                          orders=(2,))[0][0]
    assert abs(lam_end) <= 0.2 * abs(prof.curvature)


def test_kappa_definition(gauss_path):
    t = 0.05
    assert float(gauss_path.kappa(t)) == pytest.approx(
        np.sqrt(abs(float(gauss_path.lam(t))) / 2.0), rel=1e-12)
