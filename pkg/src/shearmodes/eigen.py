"""Eigenvalue tau and profile W of the third-order dispersion ODE

    (tau + s z^2)^2 W' + i d^3/dz^3 [ (tau + s z^2) W ] = 0,
    W(-inf) = 0,  W(+inf) = 1,        s = sign of the curvature at a.

Since W = const solves the equation, G = W' satisfies the second-order

    i q G'' + 6 i s z G' + (q^2 + 6 i s) G = 0,      q = tau + s z^2,

whose solutions behave like exp(s1 z^2 / 2) z^{sm1} at |z| -> inf with
s1^2 = i s.  Both tails are integrated inward on the decaying branch and
matched at z_match; the eigenvalue condition is the vanishing Wronskian of
G across the matching point, found by complex Newton on the logarithmic-
derivative mismatch (holomorphic in tau) seeded from a rectangle scan.

The shear-layer profile is V = (tau + s z^2) W - 1_{z>0} (tau + s z^2); its
jumps at 0 ([V] = -tau, [V'] = 0, [V''] = 2 for s = -1) are identities of
the construction and are measured, not imposed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import NoRootFound, TailBlowup
from .path import CriticalPath


@dataclass(frozen=True)
class DispersionProblem:
    sign_curvature: int = -1
    Z: float = 12.0
    z_match: float = 0.0
    dz: float = 1e-3
    rtol: float = 1e-10
    guard: float = 1e12
    rect: tuple = (-5.0, 5.0, -5.0, -0.05)   # (re_min, re_max, im_min, im_max)
    scan_n: tuple = (21, 16)
    boundary_tol: float = 1e-10

    def __post_init__(self):
        if self.sign_curvature not in (-1, 1):
            raise ValueError("sign_curvature must be +-1")
        if not 2.0 <= self.Z <= 28.0:
            raise ValueError("Z outside the supported range [2, 28]")
        if abs(self.z_match) > 0.5 * self.Z:
            raise ValueError("matching point too close to the tails")

    @property
    def s1(self) -> complex:
        # decaying-branch quadratic exponent: s1^2 = i * s, Re s1 < 0
        return -np.exp(1j * self.sign_curvature * np.pi / 4)


def _rhs(z, y, tau, s):
    W, G, Gp = y
    q = tau + s * z * z
    Gpp = (-6.0 * s * z * Gp + (1j * q * q - 6.0 * s) * G) / q
    return [G, Gp, Gpp]


def _tail_seed(z0: float, tau: complex, problem: DispersionProblem,
               swap_branch: bool = False):
    """Two-term asymptotic seed (W-like, G, G') on the decaying branch."""
    s1 = -problem.s1 if swap_branch else problem.s1
    sm1 = 1j * tau / (2 * s1) - 3.5
    G = np.exp(s1 * z0 * z0 / 2.0) * abs(z0) ** sm1
    Sp = s1 * z0 + sm1 / z0
    Spp = s1 - sm1 / (z0 * z0)
    Wlike = (G / Sp) * (1.0 + Spp / Sp**2)
    return np.array([Wlike, G, Sp * G], dtype=complex)


@dataclass(frozen=True)
class TailSolution:
    side: str                 # "left" | "right"
    at_match: np.ndarray      # (W or W-1, G, G') at z_match
    z: np.ndarray | None = None
    y: np.ndarray | None = None


def _integrate_tail(tau: complex, problem: DispersionProblem, side: str, *,
                    swap_branch: bool = False, dense: bool = False,
                    rtol: float | None = None) -> TailSolution:
    s = problem.sign_curvature
    z0 = -problem.Z if side == "left" else problem.Z
    y0 = _tail_seed(z0, tau, problem, swap_branch=swap_branch)
    atol = float(np.abs(y0[1])) * 1e-6 + 1e-290
    guard = problem.guard

    def blowup(z, y, *args):
        return guard - float(np.max(np.abs(y)))
    blowup.terminal = True

    t_eval = None
    if dense:
        n = int(round(abs(problem.z_match - z0) / problem.dz)) + 1
        t_eval = np.linspace(z0, problem.z_match, n)
    sol = solve_ivp(_rhs, [z0, problem.z_match], y0, args=(tau, s),
                    method="DOP853", rtol=rtol or problem.rtol, atol=atol,
                    events=blowup, t_eval=t_eval)
    if sol.status == 1 or float(np.max(np.abs(sol.y[:, -1]))) > guard:
        raise TailBlowup(
            f"{side} tail exceeded the magnitude guard {guard:g}; "
            "wrong branch or tau too far from the spectrum")
    if not sol.success:
        raise TailBlowup(f"{side} tail integration failed: {sol.message}")
    return TailSolution(side=side, at_match=sol.y[:, -1],
                        z=sol.t if dense else None, y=sol.y if dense else None)


def shoot_tails(tau: complex, problem: DispersionProblem, *,
                swap_branch: bool = False, dense: bool = False,
                rtol: float | None = None) -> tuple[TailSolution, TailSolution]:
    """Integrate both tails to z_match.  The right tail carries W - 1 in the
    first slot so that both sides hold a decaying quantity."""
    tau = complex(tau)
    if tau.imag == 0.0:
        raise ValueError("tau on the real axis: no growing/decaying selection")
    left = _integrate_tail(tau, problem, "left", swap_branch=swap_branch,
                           dense=dense, rtol=rtol)
    right = _integrate_tail(tau, problem, "right", swap_branch=swap_branch,
                            dense=dense, rtol=rtol)
    return left, right


def _log_derivative_defect(tau: complex, problem: DispersionProblem,
                           rtol: float | None = None) -> complex:
    """(G'/G)_right - (G'/G)_left at z_match; holomorphic in tau, zero
    exactly at eigenvalues (Wronskian zero with G != 0)."""
    left, right = shoot_tails(tau, problem, rtol=rtol)
    _, GL, GLp = left.at_match
    _, GR, GRp = right.at_match
    return GRp / GR - GLp / GL


def matching_defect(tau: complex, problem: DispersionProblem, *,
                    rtol: float | None = None) -> np.ndarray:
    """Mismatch of (W, W', W'') at z_match as a complex 2-vector.

    The free constants A (left) and B (right) are fixed by constrained least
    squares: the W components (including the far-field 1) are matched
    exactly, and the returned vector is the remaining (W', W'') mismatch.
    Zero defect iff tau is an eigenvalue.
    """
    left, right = shoot_tails(tau, problem, rtol=rtol)
    WL, GL, GLp = left.at_match
    OmR, GR, GRp = right.at_match
    # constraint A*WL - B*OmR = 1; minimize |A*GL - B*GR|^2 + |A*GLp - B*GRp|^2
    w = np.array([WL, -OmR])
    M = np.array([[GL, -GR], [GLp, -GRp]])
    x0 = np.conj(w) / np.vdot(w, w)          # min-norm particular solution
    nullv = np.array([OmR, WL])              # spans the constraint nullspace
    r0 = M @ x0
    rv = M @ nullv
    denom = np.vdot(rv, rv)
    c = -np.vdot(rv, r0) / denom if abs(denom) > 0 else 0.0
    return r0 + c * rv


def _scan_minima(problem: DispersionProblem, scan_rtol: float) -> list[complex]:
    re0, re1, im0, im1 = problem.rect
    nre, nim = problem.scan_n
    res = np.linspace(re0, re1, nre)
    ims = np.linspace(im0, im1, nim)
    mag = np.full((nim, nre), np.inf)
    for i, b in enumerate(ims):
        for j, a in enumerate(res):
            if b == 0.0:
                continue
            try:
                mag[i, j] = abs(_log_derivative_defect(a + 1j * b, problem,
                                                       rtol=scan_rtol))
            except TailBlowup:
                continue
    seeds = []
    for i in range(nim):
        for j in range(nre):
            v = mag[i, j]
            if not np.isfinite(v):
                continue
            patch = mag[max(0, i - 1):i + 2, max(0, j - 1):j + 2]
            if v == patch.min() and v < 1.0:
                seeds.append((v, res[j] + 1j * ims[i]))
    seeds.sort(key=lambda p: p[0])
    return [s for _, s in seeds[:6]]


def _newton_polish(tau: complex, problem: DispersionProblem,
                   tol: float = 1e-11, max_iter: int = 40) -> complex | None:
    for _ in range(max_iter):
        try:
            d = _log_derivative_defect(tau, problem)
        except TailBlowup:
            return None
        if abs(d) < tol:
            return tau
        h = 1e-7 * (1.0 + abs(tau))
        try:
            dp = (_log_derivative_defect(tau + h, problem)
                  - _log_derivative_defect(tau - h, problem)) / (2 * h)
        except TailBlowup:
            return None
        if dp == 0:
            return None
        step = d / dp
        if abs(step) > 1.0:
            step /= abs(step)
        tau = tau - step
    return None


class WVEvaluator:
    """Smooth evaluator of W, W', W'' (splined) and the shear-layer profile
    V and derivatives up to third order (algebraic in W, W', W'')."""

    def __init__(self, tau: complex, s: int, z: np.ndarray, W: np.ndarray,
                 W1: np.ndarray, W2: np.ndarray):
        self.tau = tau
        self.s = s
        self.Z = float(z[-1])
        self._sp = [CubicSpline(z, arr.real) for arr in (W, W1, W2)]
        self._sp_im = [CubicSpline(z, arr.imag) for arr in (W, W1, W2)]

    def w_derivs(self, z):
        z = np.asarray(z, dtype=float)
        inside = np.abs(z) <= self.Z
        zc = np.clip(z, -self.Z, self.Z)
        vals = [sp(zc) + 1j * spi(zc)
                for sp, spi in zip(self._sp, self._sp_im)]
        W = np.where(inside, vals[0], np.where(z > 0, 1.0, 0.0))
        W1 = np.where(inside, vals[1], 0.0)
        W2 = np.where(inside, vals[2], 0.0)
        return W, W1, W2

    def v_derivs(self, z):
        """V, V', V'', V''' with the indicator subtraction on z > 0.

        V''' = i q^2 W' exactly (the ODE removes the third spline derivative).
        """
        z = np.asarray(z, dtype=float)
        W, W1, W2 = self.w_derivs(z)
        q = self.tau + self.s * z * z
        pos = z >= 0
        Wm = np.where(pos, W - 1.0, W)
        V = q * Wm
        V1 = q * W1 + 2 * self.s * z * Wm
        V2 = q * W2 + 4 * self.s * z * W1 + 2 * self.s * Wm
        V3 = 1j * q * q * W1
        return V, V1, V2, V3


@dataclass(frozen=True)
class Eigenpair:
    """Eigenvalue tau (Im tau < 0), profile samples, and quality measures."""

    tau: complex
    problem: DispersionProblem
    z_grid: np.ndarray
    W: np.ndarray
    W1: np.ndarray
    W2: np.ndarray
    V: np.ndarray
    residual_norm: float
    boundary_err: float
    match_defect: float
    v_jumps: dict
    all_roots: tuple
    evaluator: WVEvaluator = field(repr=False)

    def to_jsonable(self) -> dict:
        return {
            "tau_re": self.tau.real,
            "tau_im": self.tau.imag,
            "residual_norm": self.residual_norm,
            "boundary_err": self.boundary_err,
            "match_defect": self.match_defect,
            "all_roots": [[r.real, r.imag] for r in self.all_roots],
            "v_jumps": {k: [v.real, v.imag] for k, v in self.v_jumps.items()},
            "z_grid": self.z_grid.tolist(),
            "W_re": self.W.real.tolist(),
            "W_im": self.W.imag.tolist(),
            "V_re": self.V.real.tolist(),
            "V_im": self.V.imag.tolist(),
        }


def _fd_ode_residual(z, W, W1, W2, tau, s, stride: int = 2):
    """ODE residual with the third derivative re-differenced from W'' samples
    (4th-order central stencil); everything else comes from the integrator.
    The stencil strides over several grid steps so the dense-output
    interpolation noise (~rtol) is not amplified by the difference."""
    z, W, W1, W2 = z[::stride], W[::stride], W1[::stride], W2[::stride]
    h = z[1] - z[0]
    W3 = np.full_like(W2, np.nan)
    W3[2:-2] = (W2[:-4] - 8 * W2[1:-3] + 8 * W2[3:-1] - W2[4:]) / (12 * h)
    q = tau + s * z * z
    r = q * q * W1 + 1j * (q * W3 + 6 * s * z * W2 + 6 * s * W1)
    r = r[4:-4]
    return float(np.max(np.abs(r)))


def find_tau(problem: DispersionProblem, *, scan_rtol: float = 1e-6,
             seed_tau: complex | None = None) -> Eigenpair:
    """Rectangle scan + complex Newton; returns the root with the most
    negative imaginary part and the assembled eigenprofile.

    seed_tau skips the rectangle scan (refinement re-solves around a known
    root)."""
    seeds = [complex(seed_tau)] if seed_tau is not None else _scan_minima(
        problem, scan_rtol)
    roots: list[complex] = []
    for seed in seeds:
        root = _newton_polish(seed, problem)
        if root is None or root.imag >= 0:
            continue
        re0, re1, im0, _ = problem.rect
        pad = 0.5 * max(re1 - re0, abs(im0))
        if not (re0 - pad <= root.real <= re1 + pad and root.imag >= im0 - pad):
            continue
        if all(abs(root - r) > 1e-6 for r in roots):
            roots.append(root)
    if not roots:
        raise NoRootFound(
            f"no eigenvalue with Im tau < 0 in rectangle {problem.rect}")
    roots.sort(key=lambda r: r.imag)
    tau = roots[0]

    # assembly pass at tighter tolerance: the dense-output samples feed the
    # finite-difference residual measure, which amplifies interpolant noise
    rtol_dense = max(problem.rtol * 1e-2, 1e-13)
    left, right = shoot_tails(tau, problem, dense=True, rtol=rtol_dense)
    WL, GL, GLp = left.at_match
    OmR, GR, GRp = right.at_match
    # A * Y_L = e1 + B * Y_R from the (W, W') components
    M = np.array([[WL, -OmR], [GL, -GR]])
    A, B = np.linalg.solve(M, np.array([1.0, 0.0], dtype=complex))

    zl, yl = left.z, A * left.y
    zr, yr = right.z, B * right.y
    yr[0] += 1.0                      # right first slot was W - 1
    z = np.concatenate([zl, zr[::-1][1:]])
    Y = np.concatenate([yl.T, yr.T[::-1][1:]]).T
    W, W1, W2 = Y

    s = problem.sign_curvature
    boundary_err = float(max(abs(W[0]), abs(W[-1] - 1.0)))
    match_defect = float(np.max(np.abs(matching_defect(tau, problem))))
    residual_norm = _fd_ode_residual(z, W, W1, W2, tau, s)

    evaluator = WVEvaluator(tau, s, z, W, W1, W2)
    V = evaluator.v_derivs(z)[0]

    # one-sided V data at 0 from the matched solution
    q0 = tau
    G0l, Gp0l = A * left.y[1, -1], A * left.y[2, -1]
    Wr0 = 1.0 + B * right.y[0, -1]
    G0r, Gp0r = B * right.y[1, -1], B * right.y[2, -1]
    Wm_l = A * left.y[0, -1]
    Wm_r = Wr0 - 1.0
    V0_l = q0 * Wm_l
    V0_r = q0 * Wm_r
    V1_l = q0 * G0l
    V1_r = q0 * G0r
    V2_l = q0 * Gp0l + 2 * s * Wm_l
    V2_r = q0 * Gp0r + 2 * s * Wm_r
    v_jumps = {
        "V_left": V0_l, "V_right": V0_r, "jump_V": V0_r - V0_l,
        "V1_left": V1_l, "V1_right": V1_r, "jump_V1": V1_r - V1_l,
        "V2_left": V2_l, "V2_right": V2_r, "jump_V2": V2_r - V2_l,
    }

    return Eigenpair(
        tau=tau, problem=problem, z_grid=z, W=W, W1=W1, W2=W2, V=V,
        residual_norm=residual_norm, boundary_err=boundary_err,
        match_defect=match_defect, v_jumps=v_jumps,
        all_roots=tuple(roots), evaluator=evaluator,
    )


def matrix_eigenvalues(problem: DispersionProblem, *, n_cheb: int = 240,
                       z_max: float = 8.0) -> np.ndarray:
    """Independent oracle: Chebyshev collocation of the G equation as a
    quadratic eigenproblem in tau, companion-linearized to a standard one.

    tau^2 G + tau (i D2 + 2 s z^2) G
            + (i s z^2 D2 + 6 i s z D1 + z^4 + 6 i s) G = 0,  G(+-z_max) = 0.
    """
    s = problem.sign_curvature
    N = n_cheb
    j = np.arange(N + 1)
    x = np.cos(np.pi * j / N)
    c = np.hstack([2.0, np.ones(N - 1), 2.0]) * (-1) ** j
    X = np.tile(x, (N + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    z = z_max * x
    D1 = D / z_max
    D2 = D1 @ D1
    inner = slice(1, N)
    zi = z[inner]
    D1i = D1[inner, inner]
    D2i = D2[inner, inner]
    n = N - 1
    I = np.eye(n)
    C1 = 1j * D2i + 2 * s * np.diag(zi**2)
    C0 = (1j * s * np.diag(zi**2) @ D2i + 6j * s * np.diag(zi) @ D1i
          + np.diag(zi**4) + 6j * s * I)
    big = np.block([[np.zeros((n, n)), I], [-C0, -C1]])
    return np.linalg.eigvals(big)


@dataclass(frozen=True)
class ScaledEigendata:
    """tau and the shear-layer width scaled by the curvature along the path."""

    pair: Eigenpair
    path: CriticalPath

    def tau_phys(self, t):
        return np.sqrt(np.abs(self.path.lam(t)) / 2.0) * self.pair.tau

    def ell(self, t):
        """Length scale of the layer before the eps^{1/4} factor."""
        return np.abs(self.path.lam(t) / 2.0) ** -0.25

    def im_tau_phys_sup(self, n_samples: int = 101) -> float:
        ts = np.linspace(0.0, self.path.t0, n_samples)
        return float(np.max(np.abs(np.imag(self.tau_phys(ts)))))


def scale_eigendata(pair: Eigenpair, path: CriticalPath) -> ScaledEigendata:
    lam = path.lam_nodes
    if np.any(lam >= 0):
        raise ValueError("path carries nonnegative curvature; scaling undefined")
    return ScaledEigendata(pair=pair, path=path)
