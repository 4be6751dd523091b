"""Half-line heat flow u_s(t,y) with Dirichlet wall and free-stream limit U0.

The solve is not a time stepper.  The initial layer splits as

    U_s(y) = U0 erf(y/2) + rem(y),

the ramp evolves in closed form (U0 erf(y / (2 sqrt(1+t)))), and the
remainder evolves by odd extension and exact Gaussian-kernel convolution,
so the wall condition is exact and u_s stays mutually consistent with its
first four y-derivatives at any (t, y).  d_t u_s is d_y^2 u_s by
construction, which is what the mode-residual evaluation needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import erf

from .errors import QuadratureFailure
from .profiles import ShearProfile

SQRT_PI = np.sqrt(np.pi)

# physicists' Hermite polynomials H_0..H_4: d^n/dx^n e^{-x^2} = (-1)^n H_n(x) e^{-x^2}
def _hermite(n: int, x):
    if n == 0:
        return np.ones_like(x)
    if n == 1:
        return 2 * x
    if n == 2:
        return 4 * x * x - 2
    if n == 3:
        return 8 * x**3 - 12 * x
    if n == 4:
        return 16 * x**4 - 48 * x * x + 12
    raise ValueError(n)


class HeatFlow:
    """Continuous evaluator of u_s(t, y) and d_y^j u_s for j <= 4."""

    def __init__(self, profile: ShearProfile, *,
                 panel_factor: float = 0.75,
                 panel_cap: float = 0.6,
                 nodes_per_panel: int = 12,
                 kernel_halfwidth: float = 9.0,
                 max_nodes: int = 60000):
        self.profile = profile
        self.U0 = profile.U0
        self.panel_factor = panel_factor
        self.panel_cap = panel_cap
        self.nodes_per_panel = nodes_per_panel
        self.kernel_halfwidth = kernel_halfwidth
        self.max_nodes = max_nodes
        self._gl = np.polynomial.legendre.leggauss(nodes_per_panel)

    # ---- pieces -----------------------------------------------------------

    def _ramp_derivs(self, t: float, y: np.ndarray, max_order: int):
        s = np.sqrt(1.0 + t)
        x = y / (2.0 * s)
        base = self.U0 * np.exp(-x * x) / SQRT_PI
        out = [self.U0 * erf(x)]
        if max_order >= 1:
            out.append(base / s)
        if max_order >= 2:
            out.append(-x * base / s**2)
        if max_order >= 3:
            out.append((x * x - 0.5) * base / s**3)
        if max_order >= 4:
            out.append((1.5 * x - x**3) * base / s**4)
        return out

    def _remainder(self, eta: np.ndarray) -> np.ndarray:
        """Odd extension of U_s - U0 erf(y/2)."""
        a = np.abs(eta)
        rem = self.profile.derivs(a)[0] - self.U0 * erf(a / 2.0)
        return np.sign(eta) * rem

    def _nodes(self, t: float, y_min: float, y_max: float):
        width = np.sqrt(4.0 * t)
        h = min(self.panel_factor * width, self.panel_cap)
        reach = self.kernel_halfwidth * width
        hi = y_max + reach
        npan = int(np.ceil(hi / h))
        if npan * self.nodes_per_panel > self.max_nodes:
            raise QuadratureFailure(
                f"t={t:g} needs {npan * self.nodes_per_panel} quadrature nodes "
                f"(> {self.max_nodes}); grid too fine for this solver")
        edges = np.linspace(0.0, npan * h, npan + 1)
        gx, gw = self._gl
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * h
        nodes = (mid[:, None] + half * gx[None, :]).ravel()
        wts = np.broadcast_to(half * gw[None, :], (npan, gx.size)).ravel().copy()
        return nodes, wts

    # ---- public -----------------------------------------------------------

    def derivs(self, t: float, y, orders: Sequence[int] = (0, 1, 2, 3, 4)):
        """u_s and requested y-derivatives at one time on an array of y."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        max_order = max(orders)
        if t < 0:
            raise ValueError("t must be >= 0")
        if t == 0.0:
            prof = self.profile.derivs(y)
            return [prof[j] for j in orders]
        ramp = self._ramp_derivs(t, y, max_order)
        nodes, wts = self._nodes(t, float(y.min()), float(y.max()))
        fvals = self._remainder(nodes) * wts
        c = 1.0 / np.sqrt(4.0 * t)
        dm = y[:, None] - nodes[None, :]
        dp = y[:, None] + nodes[None, :]
        km = np.exp(-(c * dm) ** 2) * (c / SQRT_PI)
        kp = np.exp(-(c * dp) ** 2) * (c / SQRT_PI)
        out = []
        for j in orders:
            filt = (-c) ** j
            hm = _hermite(j, c * dm)
            hp = _hermite(j, c * dp)
            val = filt * ((km * hm) @ fvals - (kp * hp) @ fvals)
            out.append(ramp[j] + val)
        return out

    def value(self, t: float, y, order: int = 0) -> np.ndarray:
        return self.derivs(t, y, orders=(order,))[0]

    def quadrature_gap(self, t: float, y) -> float:
        """Self-check: re-evaluate with doubled panel density and compare."""
        ref = self.derivs(t, y, orders=(0, 2))
        finer = HeatFlow(self.profile,
                         panel_factor=self.panel_factor / 2,
                         panel_cap=self.panel_cap / 2,
                         nodes_per_panel=self.nodes_per_panel,
                         kernel_halfwidth=self.kernel_halfwidth + 2.0,
                         max_nodes=2 * self.max_nodes)
        fin = finer.derivs(t, y, orders=(0, 2))
        return float(max(np.max(np.abs(ref[0] - fin[0])),
                         np.max(np.abs(ref[1] - fin[1]))))


@dataclass(frozen=True)
class HeatFlowField:
    """u_s and derivatives sampled on a (t, y) grid, plus the live evaluator."""

    y_grid: np.ndarray
    t_grid: np.ndarray
    us: np.ndarray        # shape (Nt, Ny)
    dy_us: np.ndarray
    d2y_us: np.ndarray
    d3y_us: np.ndarray
    d4y_us: np.ndarray
    dt_us: np.ndarray     # equals d2y_us by construction
    flow: HeatFlow

    @property
    def U0(self) -> float:
        return self.flow.U0

    @property
    def horizon(self) -> float:
        return float(self.t_grid[-1])

    def slice_interp(self, t: float):
        """(u_s, d_y u_s) rows at arbitrary t by cubic interpolation in t."""
        tg = self.t_grid
        if t < tg[0] - 1e-12 or t > tg[-1] + 1e-12:
            raise ValueError(f"t={t} outside field horizon [{tg[0]}, {tg[-1]}]")
        if tg.size < 4:
            i = int(np.argmin(np.abs(tg - t)))
            return self.us[i], self.dy_us[i]
        i = int(np.clip(np.searchsorted(tg, t) - 1, 1, tg.size - 3))
        idx = [i - 1, i, i + 1, i + 2]
        ts = tg[idx]
        w = np.array([np.prod([(t - ts[m]) / (ts[j] - ts[m])
                               for m in range(4) if m != j]) for j in range(4)])
        return w @ self.us[idx], w @ self.dy_us[idx]

    def max_principle_gap(self) -> float:
        """How far u_s escapes [min(0, inf U_s), max(U0, sup U_s)] (0 = holds)."""
        U = self.us[0]
        lo = min(0.0, float(U.min()))
        hi = max(self.U0, float(U.max()))
        return float(max(0.0, np.max(self.us) - hi, lo - np.min(self.us)))

    def to_rows(self):
        """(t, y, u_s, dy u_s, d2y u_s) rows for CSV export."""
        for i, t in enumerate(self.t_grid):
            for j, y in enumerate(self.y_grid):
                yield (float(t), float(y), float(self.us[i, j]),
                       float(self.dy_us[i, j]), float(self.d2y_us[i, j]))


def solve_heat(profile: ShearProfile, y_grid, t_grid, *,
               quad_tol: float = 1e-8, check: bool = True) -> HeatFlowField:
    """Sample the kernel solution on a grid; self-check the quadrature."""
    y = np.asarray(y_grid, dtype=float)
    t = np.asarray(t_grid, dtype=float)
    if y[0] != 0.0:
        raise ValueError("y_grid must start at the wall y=0")
    flow = HeatFlow(profile)
    rows = [flow.derivs(float(tv), y) for tv in t]
    us = np.array([r[0] for r in rows])
    d1 = np.array([r[1] for r in rows])
    d2 = np.array([r[2] for r in rows])
    d3 = np.array([r[3] for r in rows])
    d4 = np.array([r[4] for r in rows])
    if check and t[-1] > 0:
        probe_t = float(t[len(t) // 2] if t[len(t) // 2] > 0 else t[-1])
        probe_y = y[:: max(1, y.size // 24)]
        gap = flow.quadrature_gap(probe_t, probe_y)
        if gap > quad_tol:
            raise QuadratureFailure(
                f"panel-doubling disagreement {gap:.2e} > {quad_tol:.2e}")
    return HeatFlowField(y_grid=y, t_grid=t, us=us, dy_us=d1, d2y_us=d2,
                         d3y_us=d3, d4y_us=d4, dt_us=d2.copy(), flow=flow)


def frozen_field(profile: ShearProfile, y_grid, t_grid) -> HeatFlowField:
    """A field whose every time slice is the initial layer itself; companion
    to the frozen-coefficient mode construction and the inviscid oracle."""
    y = np.asarray(y_grid, dtype=float)
    t = np.asarray(t_grid, dtype=float)
    d = profile.derivs(y)
    tile = lambda row: np.tile(row, (t.size, 1))
    return HeatFlowField(y_grid=y, t_grid=t, us=tile(d[0]), dy_us=tile(d[1]),
                         d2y_us=tile(d[2]), d3y_us=tile(d[3]), d4y_us=tile(d[4]),
                         dt_us=tile(np.zeros_like(d[0])), flow=HeatFlow(profile))


def heat_residual_probe(flow: HeatFlow, t: float, y, dt: float = 1e-4) -> float:
    """sup | d_t u_s - d_y^2 u_s | with d_t from Richardson-extrapolated
    central differences of fresh kernel evaluations (independent of the
    field's stored d_t, which is d_y^2 by definition)."""
    y = np.asarray(y, dtype=float)
    d2 = flow.derivs(t, y, orders=(2,))[0]

    def central(h):
        up = flow.derivs(t + h, y, orders=(0,))[0]
        dn = flow.derivs(max(t - h, 0.0), y, orders=(0,))[0]
        return (up - dn) / ((t + h) - max(t - h, 0.0))

    r1 = central(dt)
    r2 = central(dt / 2)
    dt_rich = (4.0 * r2 - r1) / 3.0
    return float(np.max(np.abs(dt_rich - d2)))
