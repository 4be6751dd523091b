"""Tracking the non-degenerate critical point a(t) of u_s(t, .).

a(t) obeys  a' = - d_t d_y u_s(t, a) / d_y^2 u_s(t, a); since u_s solves the
heat equation exactly, d_t d_y u_s = d_y^3 u_s and the right-hand side is a
pointwise kernel evaluation.  The integrator is classic RK4 with a one-step
Newton correction of the root at every node, which keeps d_y u_s(t, a(t))
at root-finder tolerance along the whole path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CurvatureVanished, HorizonExceeded
from .heat import HeatFlow


@dataclass(frozen=True)
class CriticalPath:
    """a(t), lambda(t) = d_y^2 u_s(t, a(t)) and their time derivatives."""

    t_nodes: np.ndarray
    a_nodes: np.ndarray
    lam_nodes: np.ndarray
    adot_nodes: np.ndarray
    lamdot_nodes: np.ndarray
    t0: float                  # validity horizon actually covered
    floor: float               # curvature floor used
    flow: HeatFlow

    def _hermite_eval(self, t, values, slopes):
        """Cubic Hermite interpolation on the uniform node grid."""
        t = np.asarray(t, dtype=float)
        tn = self.t_nodes
        if np.any(t < tn[0] - 1e-12) or np.any(t > self.t0 + 1e-12):
            raise HorizonExceeded(f"t outside [0, {self.t0}]")
        h = tn[1] - tn[0]
        i = np.clip(((t - tn[0]) / h).astype(int), 0, tn.size - 2)
        s = (t - tn[i]) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return (h00 * values[i] + h * h10 * slopes[i]
                + h01 * values[i + 1] + h * h11 * slopes[i + 1])

    def a(self, t):
        return self._hermite_eval(t, self.a_nodes, self.adot_nodes)

    def lam(self, t):
        return self._hermite_eval(t, self.lam_nodes, self.lamdot_nodes)

    def a_dot(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.array([self._rhs(float(tv), float(self.a(tv))) for tv in t])

    def lam_dot(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = []
        for tv in t:
            av = float(self.a(tv))
            d2, d3, d4 = self.flow.derivs(tv, np.array([av]), orders=(2, 3, 4))
            adot = -d3[0] / d2[0]
            out.append(d4[0] + d3[0] * adot)
        return np.array(out)

    def _rhs(self, t: float, a: float) -> float:
        d2, d3 = self.flow.derivs(t, np.array([a]), orders=(2, 3))
        return -d3[0] / d2[0]

    def kappa(self, t):
        """|lambda(t)/2|^{1/2}, the curvature scale along the path."""
        return np.sqrt(np.abs(self.lam(t)) / 2.0)

    def root_gap(self, t) -> float:
        """|d_y u_s(t, a(t))|: how well the path sits on the critical manifold."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        gaps = [abs(self.flow.derivs(float(tv), np.array([float(self.a(tv))]),
                                     orders=(1,))[0][0]) for tv in t]
        return float(max(gaps))


def track_critical_point(flow: HeatFlow, a0: float, t_final: float, *,
                         dt: float = 2e-3, floor_frac: float = 0.1,
                         allow_truncation: bool = False) -> CriticalPath:
    """Integrate the critical path to t_final; raise CurvatureVanished if the
    curvature magnitude hits floor_frac * |lambda(0)| first (or truncate there
    when allow_truncation is set)."""
    lam0 = flow.derivs(0.0, np.array([a0]), orders=(2,))[0][0]
    if lam0 >= 0:
        raise ValueError("curvature at a0 must be negative (maximum expected)")
    floor = floor_frac * abs(lam0)

    n = max(2, int(np.ceil(t_final / dt)) + 1)
    t_nodes = np.linspace(0.0, t_final, n)
    h = t_nodes[1] - t_nodes[0]

    def rhs(t, a):
        d2, d3 = flow.derivs(t, np.array([a]), orders=(2, 3))
        return -d3[0] / d2[0], d2[0], d3[0]

    a_list, lam_list, adot_list, lamdot_list = [], [], [], []
    a = float(a0)
    cut = None
    for i, t in enumerate(t_nodes):
        d1, d2, d3, d4 = flow.derivs(t, np.array([a]), orders=(1, 2, 3, 4))
        # Newton correction keeps the node on the root of d_y u_s
        a = a - d1[0] / d2[0]
        d1, d2, d3, d4 = flow.derivs(t, np.array([a]), orders=(1, 2, 3, 4))
        lam = d2[0]
        adot = -d3[0] / d2[0]
        a_list.append(a)
        lam_list.append(lam)
        adot_list.append(adot)
        lamdot_list.append(d4[0] + d3[0] * adot)
        if abs(lam) < floor or lam >= 0:
            cut = i
            break
        if i + 1 < n:
            k1, *_ = rhs(t, a)
            k2, *_ = rhs(t + h / 2, a + h * k1 / 2)
            k3, *_ = rhs(t + h / 2, a + h * k2 / 2)
            k4, *_ = rhs(t + h, a + h * k3)
            a = a + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)

    if cut is not None:
        if not allow_truncation:
            raise CurvatureVanished(
                f"|lambda| fell to {abs(lam_list[-1]):.3e} (< floor {floor:.3e}) "
                f"at t={t_nodes[cut]:.4f} before t_final={t_final}")
        m = max(cut, 2)
        return CriticalPath(
            t_nodes=t_nodes[:m], a_nodes=np.array(a_list[:m]),
            lam_nodes=np.array(lam_list[:m]), adot_nodes=np.array(adot_list[:m]),
            lamdot_nodes=np.array(lamdot_list[:m]),
            t0=float(t_nodes[m - 1]), floor=floor, flow=flow)

    return CriticalPath(
        t_nodes=t_nodes, a_nodes=np.array(a_list), lam_nodes=np.array(lam_list),
        adot_nodes=np.array(adot_list), lamdot_nodes=np.array(lamdot_list),
        t0=float(t_final), floor=floor, flow=flow)
