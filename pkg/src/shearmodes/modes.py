"""Assembly of the growing-mode approximate solutions and their residuals.

A mode at wavenumber n (eps = 1/n) consists of

    U(t,y) = E(t) [ eps vtilde'(y) + i t d_y S(t,y) ],
    V(t,y) = E(t) [ -i vtilde(y) + t/eps S(t,y) ],

with S = v_reg + v_sl the Heaviside regular part plus the truncated
shear-layer profile, E the accumulated complex phase of w_eps(t), and
vtilde the normalized antiderivative of a compactly supported bump f.
The corrector makes the initial tangential data compactly supported, so its
weighted norms are finite for every exponential weight, while the far-field
tail of d_y v_reg still tracks d_y u_s for t > 0.

All derivatives are analytic: kernel-differentiated u_s, closed-form
corrector polynomials, and chain rule through (a(t), lambda(t), phase) for
the shear layer.  The residual splits as R = Rbar + t Rtilde with Rbar the
corrector/regular part and Rtilde the shear-layer part; the split is the
definition of the assembly, and an independent finite-difference application
of the linearized operator reproduces R to discretization accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .eigen import Eigenpair, ScaledEigendata
from .errors import HorizonExceeded, ZeroMass
from .heat import HeatFlowField
from .path import CriticalPath
from .profiles import ShearProfile

_GL8 = np.polynomial.legendre.leggauss(8)


# ---------------------------------------------------------------------------
# corrector: normalized antiderivative of a quintic bump


class BumpCorrector:
    """vtilde(y) = int_0^y f / int_0^inf f for f a quintic bump on [lo, hi].

    f(s) = s^5 (1-s)^5 on the unit interval (C^4 at the endpoints), so
    vtilde rises monotonically from 0 to 1 across the support and all
    derivatives used downstream are exact piecewise polynomials.
    """

    def __init__(self, lo: float, hi: float):
        if not hi > lo >= 0:
            raise ValueError("need 0 <= lo < hi")
        self.lo, self.hi = float(lo), float(hi)
        self.width = self.hi - self.lo
        s = Polynomial([0.0, 1.0])
        self._f = (s**5 * (1 - s) ** 5)
        self._f1 = self._f.deriv()
        self._f2 = self._f1.deriv()
        self._F = self._f.integ()
        self._mass_s = float(self._F(1.0))       # = 1/2772

    def _s(self, y):
        return (np.asarray(y, dtype=float) - self.lo) / self.width

    def _inside(self, y):
        s = self._s(y)
        return (s > 0) & (s < 1), np.clip(s, 0.0, 1.0)

    def f(self, y):
        """Bump normalized to unit mass on [lo, hi]."""
        ins, s = self._inside(y)
        return np.where(ins, self._f(s), 0.0) / (self._mass_s * self.width)

    def f1(self, y):
        ins, s = self._inside(y)
        return np.where(ins, self._f1(s), 0.0) / (self._mass_s * self.width**2)

    def f2(self, y):
        ins, s = self._inside(y)
        return np.where(ins, self._f2(s), 0.0) / (self._mass_s * self.width**3)

    def vtilde(self, y):
        s = np.clip(self._s(y), 0.0, 1.0)
        return self._F(s) / self._mass_s

    # vtilde derivatives: v' = f, v'' = f', v''' = f''
    def v1(self, y):
        return self.f(y)

    def v2(self, y):
        return self.f1(y)

    def v3(self, y):
        return self.f2(y)


def corrector(f_callable, y_grid, *, mass_tol: float = 1e-12):
    """Normalized antiderivative of an arbitrary seed f on a grid.

    Returns (vtilde values, mass).  Raises ZeroMass when int f vanishes.
    Cumulative Simpson on the (assumed uniform) grid.
    """
    from scipy.integrate import cumulative_simpson
    y = np.asarray(y_grid, dtype=float)
    f = np.asarray(f_callable(y) if callable(f_callable) else f_callable,
                   dtype=float)
    cum = cumulative_simpson(f, x=y, initial=0.0)
    mass = cum[-1]
    if abs(mass) < mass_tol:
        raise ZeroMass(f"integral of f is {mass:.2e}; corrector undefined")
    return cum / mass, mass


# ---------------------------------------------------------------------------
# smooth truncation


class Smoothstep:
    """Even cutoff: 1 on |r| <= inner, 0 on |r| >= outer, polynomial blend.

    order 7 gives a C^3 junction (third derivative continuous), which keeps
    the pointwise residual fields continuous across the cutoff shells;
    order 5 (C^2) is available for comparison.
    """

    def __init__(self, inner: float, outer: float, order: int = 7):
        if not 0 < inner < outer:
            raise ValueError("need 0 < inner < outer")
        self.inner, self.outer = float(inner), float(outer)
        self.width = self.outer - self.inner
        if order == 7:
            self._S = Polynomial([0, 0, 0, 0, 35, -84, 70, -20])
        elif order == 5:
            self._S = Polynomial([0, 0, 0, 10, -15, 6])
        else:
            raise ValueError("order must be 5 or 7")
        self.order = order
        self._S1 = self._S.deriv()
        self._S2 = self._S1.deriv()
        self._S3 = self._S2.deriv()

    def derivs(self, r):
        r = np.asarray(r, dtype=float)
        u = (np.abs(r) - self.inner) / self.width
        mid = (u > 0) & (u < 1)
        uc = np.clip(u, 0.0, 1.0)
        sgn = np.sign(r)
        phi = np.where(u <= 0, 1.0, np.where(u >= 1, 0.0, 1.0 - self._S(uc)))
        p1 = np.where(mid, -self._S1(uc) * sgn / self.width, 0.0)
        p2 = np.where(mid, -self._S2(uc) / self.width**2, 0.0)
        p3 = np.where(mid, -self._S3(uc) * sgn / self.width**3, 0.0)
        return phi, p1, p2, p3


# ---------------------------------------------------------------------------
# parameters and scalar bundle


@dataclass(frozen=True)
class ModeParams:
    """Wavenumber and geometry of the truncation / corrector seed."""

    n: int
    phi_inner: float
    phi_outer: float
    f_lo: float
    f_hi: float
    phi_order: int = 7
    frozen: bool = False

    def __post_init__(self):
        if self.n < 1 or int(self.n) != self.n:
            raise ValueError("n must be a positive integer (eps = 1/n)")

    @property
    def eps(self) -> float:
        return 1.0 / self.n

    def cutoff(self) -> Smoothstep:
        return Smoothstep(self.phi_inner, self.phi_outer, self.phi_order)

    def bump(self) -> BumpCorrector:
        return BumpCorrector(self.f_lo, self.f_hi)


def default_params(profile: ShearProfile, n: int, *, frozen: bool = False,
                   f_width: float = 2.0, phi_order: int = 7) -> ModeParams:
    """Cutoff shells at (0.5, 1.0) * min(a0, 1); bump just beyond the outer
    shell.  f_width widens the bump (lower peak) so the growing part
    overtakes the corrector earlier in the smallest-k runs."""
    if profile.a0 is None:
        raise ValueError("profile has no located critical point")
    scale = min(profile.a0, 1.0)
    d2 = 1.0 * scale
    lo = profile.a0 + d2 + 0.5
    return ModeParams(n=n, phi_inner=0.5 * scale, phi_outer=d2,
                      f_lo=lo, f_hi=lo + f_width, phi_order=phi_order,
                      frozen=frozen)


class _Scalars:
    """Per-time scalar bundle: critical point, curvature, scalings, phase."""

    def __init__(self, *, t, a, lam, adot, lamdot, us_a, eps, tau):
        self.t = t
        self.a = a
        self.lam = lam
        self.adot = adot
        self.lamdot = lamdot
        self.kappa = np.sqrt(abs(lam) / 2.0)
        self.kdot = -lamdot / (4.0 * self.kappa)
        self.ell = eps**0.25 * self.kappa**-0.5
        self.elldot = -0.5 * self.ell * self.kdot / self.kappa
        self.w_eps = -us_a + np.sqrt(eps) * self.kappa * tau
        self.eps = eps
        self.tau = tau


def _scalars_path(path: CriticalPath, pair: Eigenpair, eps: float,
                  t: float) -> _Scalars:
    if t > path.t0 + 1e-12:
        raise HorizonExceeded(f"t={t} beyond path horizon {path.t0}")
    a = float(path.a(t))
    lam = float(path.lam(t))
    adot = float(path.a_dot(t)[0])
    lamdot = float(path.lam_dot(t)[0])
    us_a = float(path.flow.derivs(t, np.array([a]), orders=(0,))[0][0])
    return _Scalars(t=t, a=a, lam=lam, adot=adot, lamdot=lamdot,
                    us_a=us_a, eps=eps, tau=pair.tau)


def _scalars_frozen(profile: ShearProfile, pair: Eigenpair, eps: float,
                    t: float) -> _Scalars:
    a = profile.a0
    lam = profile.curvature
    us_a = float(profile.derivs(np.array([a]))[0][0])
    return _Scalars(t=t, a=a, lam=lam, adot=0.0, lamdot=0.0,
                    us_a=us_a, eps=eps, tau=pair.tau)


def phase_integral(path: CriticalPath, pair: Eigenpair, eps: float,
                   t: float, *, t_start: float = 0.0,
                   panel: float = 0.02) -> complex:
    """int_{t_start}^t w_eps(s) ds by composite 8-point Gauss-Legendre panels."""
    if t == t_start:
        return 0.0 + 0.0j
    npan = max(1, int(np.ceil((t - t_start) / panel)))
    edges = np.linspace(t_start, t, npan + 1)
    gx, gw = _GL8
    total = 0.0 + 0.0j
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        for x, w in zip(gx, gw):
            sv = mid + half * x
            a = float(path.a(sv))
            us_a = float(path.flow.derivs(sv, np.array([a]), orders=(0,))[0][0])
            kap = float(path.kappa(sv))
            total += half * w * (-us_a + np.sqrt(eps) * kap * pair.tau)
    return total


# ---------------------------------------------------------------------------
# field containers


@dataclass(frozen=True)
class ModeField:
    """One assembled mode at time t on the y grid, with component breakdown."""

    t: float
    y: np.ndarray
    eps: float
    U: np.ndarray
    dyU: np.ndarray
    d2yU: np.ndarray
    V: np.ndarray
    dyV: np.ndarray
    w_eps: complex
    phase: complex            # int_0^t w_eps(s) ds
    E: complex                # exp(i phase / eps)
    components: dict = field(repr=False)
    scalars: object = field(repr=False)
    params: ModeParams = field(repr=False)

    def jump_report(self, pair: Eigenpair) -> dict:
        """One-sided limits of V, d_y V, d_y^2 V at a(t); the Heaviside jump
        of the regular part must cancel the shear-layer jump."""
        sc = self.scalars
        eps, kap, ell, t = sc.eps, sc.kappa, sc.ell, self.t
        j = pair.v_jumps
        seps = np.sqrt(eps)
        # one-sided S = v_reg + v_sl limits at a(t)
        S_r = seps * kap * sc.tau + seps * kap * j["V_right"]
        S_l = 0.0 + seps * kap * j["V_left"]
        # d_y S: reg side jump is d_y u_s(t,a) = 0 on the root; sl side [V']=0
        dyS_r = self._dyus_at_a() + seps * kap * j["V1_right"] / ell
        dyS_l = seps * kap * j["V1_left"] / ell
        d2yS_r = sc.lam + seps * kap * j["V2_right"] / ell**2
        d2yS_l = seps * kap * j["V2_left"] / ell**2
        E = self.E
        return {
            "V": abs(E * (t / eps) * (S_r - S_l)),
            "dyV": abs(E * (t / eps) * (dyS_r - dyS_l)),
            "d2yV": abs(E * (t / eps) * (d2yS_r - d2yS_l)),
            "part_jump_V": abs(E * (t / eps) * S_r),
        }

    def _dyus_at_a(self) -> float:
        sc = self.scalars
        src = self.components["us_provider"]
        return float(src(sc.t, np.array([sc.a]), orders=(1,))[0][0])


@dataclass(frozen=True)
class ResidualField:
    """R = Rbar + t * Rtilde on the grid, plus the textbook-split diagnostic."""

    t: float
    y: np.ndarray
    eps: float
    Rbar: np.ndarray
    Rtilde: np.ndarray
    taylor_form: np.ndarray = field(repr=False)   # Taylor-defect form of Rtilde
    cutoff_rest: np.ndarray = field(repr=False)  # Rtilde - taylor_form

    @property
    def R(self) -> np.ndarray:
        return self.Rbar + self.t * self.Rtilde


# ---------------------------------------------------------------------------
# assembly


def _us_provider_path(path: CriticalPath):
    return lambda t, y, orders: path.flow.derivs(t, y, orders=orders)


def _us_provider_frozen(profile: ShearProfile):
    def prov(t, y, orders):
        d = profile.derivs(y)
        return [d[j] for j in orders]
    return prov


def _assemble(params: ModeParams, pair: Eigenpair, sc: _Scalars, y: np.ndarray,
              us_provider, phase: complex) -> ModeField:
    eps, t, tau = sc.eps, sc.t, sc.tau
    seps = np.sqrt(eps)
    bump = params.bump()
    cut = params.cutoff()

    us, dyus, d2yus, d3yus = us_provider(t, y, (0, 1, 2, 3))

    H = (y >= sc.a).astype(float)
    us_a = seps * sc.kappa * tau - sc.w_eps      # u_s(t, a(t)) by definition of w_eps
    g = us - us_a + seps * sc.kappa * tau
    v_reg = H * g
    dy_vreg = H * dyus
    d2y_vreg = H * d2yus
    d3y_vreg = H * d3yus

    r = y - sc.a
    zeta = r / sc.ell
    phi, p1, p2, p3 = cut.derivs(r)
    V, V1, V2, V3 = pair.evaluator.v_derivs(zeta)
    amp = seps * sc.kappa
    Vf = amp * V
    dyVf = amp * V1 / sc.ell
    d2yVf = amp * V2 / sc.ell**2
    d3yVf = amp * V3 / sc.ell**3
    dzeta_dt = -sc.adot / sc.ell - zeta * sc.elldot / sc.ell
    dtVf = seps * (sc.kdot * V + sc.kappa * V1 * dzeta_dt)
    dtdyVf = seps * (sc.kdot * V1 / sc.ell
                     + sc.kappa * V2 * dzeta_dt / sc.ell
                     - sc.kappa * V1 * sc.elldot / sc.ell**2)

    v_sl = phi * Vf
    dy_vsl = p1 * Vf + phi * dyVf
    d2y_vsl = p2 * Vf + 2 * p1 * dyVf + phi * d2yVf
    d3y_vsl = p3 * Vf + 3 * p2 * dyVf + 3 * p1 * d2yVf + phi * d3yVf
    dtdy_vsl = (-sc.adot * p2 * Vf + p1 * dtVf
                - sc.adot * p1 * dyVf + phi * dtdyVf)

    vt = bump.vtilde(y)
    vt1 = bump.v1(y)
    vt2 = bump.v2(y)
    vt3 = bump.v3(y)

    S = v_reg + v_sl
    dyS = dy_vreg + dy_vsl
    d2yS = d2y_vreg + d2y_vsl
    d3yS = d3y_vreg + d3y_vsl

    E = np.exp(1j * phase / eps)
    U = E * (eps * vt1 + 1j * t * dyS)
    dyU = E * (eps * vt2 + 1j * t * d2yS)
    d2yU = E * (eps * vt3 + 1j * t * d3yS)
    V_big = E * (-1j * vt + (t / eps) * S)
    dyV_big = E * (-1j * vt1 + (t / eps) * dyS)

    comps = {
        "v_reg": v_reg, "v_sl": v_sl, "S": S,
        "dy_vreg": dy_vreg, "dy_vsl": dy_vsl, "dyS": dyS,
        "d2yS": d2yS, "d3yS": d3yS,
        "d2y_vsl": d2y_vsl, "d3y_vsl": d3y_vsl, "dtdy_vsl": dtdy_vsl,
        "vtilde": vt, "vt1": vt1, "vt2": vt2, "vt3": vt3,
        "us": us, "dyus": dyus, "d2yus": d2yus, "d3yus": d3yus,
        "phi": phi, "us_provider": us_provider,
    }
    return ModeField(t=t, y=y, eps=eps, U=U, dyU=dyU, d2yU=d2yU,
                     V=V_big, dyV=dyV_big, w_eps=sc.w_eps, phase=phase,
                     E=complex(E), components=comps, scalars=sc, params=params)


def assemble_mode(params: ModeParams, field_: HeatFlowField, path: CriticalPath,
                  scaled: ScaledEigendata, t: float,
                  y_grid=None) -> ModeField:
    """Time-dependent mode per the evolving shear flow (the main object)."""
    pair = scaled.pair
    y = np.asarray(field_.y_grid if y_grid is None else y_grid, dtype=float)
    sc = _scalars_path(path, pair, params.eps, t)
    phase = phase_integral(path, pair, params.eps, t)
    return _assemble(params, pair, sc, y, _us_provider_path(path), phase)


def assemble_frozen(params: ModeParams, profile: ShearProfile, pair: Eigenpair,
                    t: float, y_grid) -> ModeField:
    """Frozen-coefficient mode (background held at the initial shear layer)."""
    y = np.asarray(y_grid, dtype=float)
    sc = _scalars_frozen(profile, pair, params.eps, t)
    phase = sc.w_eps * t
    return _assemble(params, pair, sc, y, _us_provider_frozen(profile), phase)


def old_frozen_tangential(profile: ShearProfile, pair: Eigenpair, eps: float,
                          y_grid) -> np.ndarray:
    """Tangential profile i v' of the untruncated classic ansatz, whose tail
    is proportional to U'(y); kept for the decay-obstruction comparison."""
    y = np.asarray(y_grid, dtype=float)
    a, lam = profile.a0, profile.curvature
    kap = np.sqrt(abs(lam) / 2.0)
    ell = eps**0.25 * kap**-0.5
    dyus = profile.derivs(y)[1]
    H = (y >= a).astype(float)
    zeta = (y - a) / ell
    V1 = pair.evaluator.v_derivs(zeta)[1]
    return 1j * (H * dyus + np.sqrt(eps) * kap * V1 / ell)


def residual(params: ModeParams, mode: ModeField) -> ResidualField:
    """Rbar and Rtilde from the assembled components (analytic derivatives).

    Rbar carries the corrector/regular terms; Rtilde is the shear-layer
    part (the regular part of the t-coefficient vanishes identically through
    the heat equation and the exact advection cancellation).  taylor_form is
    the Taylor-defect form of Rtilde; cutoff_rest collects the truncation
    commutators that the asymptotic argument hides in the exponentially
    small remainder.
    """
    c = mode.components
    sc = mode.scalars
    eps, t, E = mode.eps, mode.t, mode.E
    w = sc.w_eps

    Rbar = E * (1j * (w + c["us"]) * c["vt1"]
                - 1j * c["dyus"] * c["vtilde"]
                - eps * c["vt3"]
                + 1j * c["dyS"])

    adv = w + c["us"]
    Rtilde = E * (-(adv / eps) * c["dy_vsl"]
                  + (c["dyus"] / eps) * c["v_sl"]
                  + 1j * c["dtdy_vsl"]
                  - 1j * c["d3y_vsl"])

    r = mode.y - sc.a
    us_a = np.sqrt(eps) * sc.kappa * sc.tau - w   # u_s(t, a(t))
    taylor0 = c["us"] - us_a - sc.lam * r * r / 2.0
    taylor1 = c["dyus"] - sc.lam * r
    taylor_form = E * (-(taylor0 / eps) * c["dy_vsl"]
                      + (taylor1 / eps) * c["v_sl"]
                      + 1j * c["dtdy_vsl"])

    return ResidualField(t=t, y=mode.y, eps=eps, Rbar=Rbar, Rtilde=Rtilde,
                         taylor_form=taylor_form,
                         cutoff_rest=Rtilde - taylor_form)


def mode_amplitude_series(params: ModeParams, field_: HeatFlowField,
                          path: CriticalPath, scaled: ScaledEigendata,
                          ts) -> dict:
    """Amplitude trajectories of the assembled mode family.

    Returns arrays over the sample times: log of the growing-component
    amplitude (t * |E| * sup |d_y S|, the shear-layer-plus-regular part of
    U divided by nothing -- the t prefactor stays in), and log of the full
    sup norm of U.  The growing component carries the pure
    exp(|Im tau| sqrt(k) int kappa) envelope that the rate fits target.
    """
    ts = np.asarray(ts, dtype=float)
    log_sl, log_full = [], []
    for t in ts:
        mode = assemble_mode(params, field_, path, scaled, float(t))
        log_full.append(np.log(float(np.max(np.abs(mode.U)))))
        # layer sup on a fine local grid so the argmax is not quantized by
        # the field grid (the fit noise budget is ~1e-4 in log amplitude)
        a = mode.scalars.a
        y_loc = np.linspace(max(0.0, a - params.phi_outer),
                            a + params.phi_outer, 1601)
        loc = assemble_mode(params, field_, path, scaled, float(t),
                            y_grid=y_loc)
        sl_sup = float(np.max(np.abs(loc.components["dy_vsl"])))
        amp_sl = abs(loc.E) * t * sl_sup
        log_sl.append(np.log(amp_sl) if amp_sl > 0 else -np.inf)
    return {"t": ts, "log_sl": np.array(log_sl), "log_full": np.array(log_full)}


def initial_tangential_norm(params: ModeParams, y_grid, alpha: float) -> float:
    """|| U(0, .) ||_{W_alpha^{2,inf}} = eps * max_j sup e^{alpha y} |vtilde^(1+j)|."""
    from .norms import weighted_sup
    y = np.asarray(y_grid, dtype=float)
    b = params.bump()
    return params.eps * max(weighted_sup(b.v1(y), y, alpha),
                            weighted_sup(b.v2(y), y, alpha),
                            weighted_sup(b.v3(y), y, alpha))
