"""Initial shear layers with closed-form derivatives and general decay.

Three built-in families:

  gaussian-bump   U0 (1 - e^-y) + A y^2 e^{-y^2}        (exponential tail)
  algebraic-bump  (U0 y^2 + A y) / (1 + y^2)            (U' ~ y^-2 tail)
  monotone        U0 erf(y/2)                           (no critical point)

Every family exposes the profile and its first four y-derivatives in closed
form; nothing downstream ever differences a profile numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq
from scipy.special import erf

from .errors import DegenerateCritical, NoCriticalPoint

SQRT_PI = np.sqrt(np.pi)


@dataclass(frozen=True)
class DecayClass:
    kind: str             # "exponential" | "algebraic" | "gaussian"
    rate: float | None    # e-folding rate or algebraic power of U'


@dataclass(frozen=True)
class ShearProfile:
    """An initial shear layer U_s with closed-form derivatives.

    derivs(y) returns (U, U', U'', U''', U'''') as arrays matching y.
    a0/curvature are None for profiles without a located critical point.
    """

    family: str
    params: dict
    U0: float
    decay_class: DecayClass
    derivs: Callable[[np.ndarray], tuple]
    a0: float | None = None
    curvature: float | None = None

    def __call__(self, y):
        return self.derivs(np.asarray(y, dtype=float))[0]

    def deriv(self, y, order: int):
        return self.derivs(np.asarray(y, dtype=float))[order]


def _gaussian_bump(U0: float, A: float):
    def derivs(y):
        y = np.asarray(y, dtype=float)
        ey = np.exp(-y)
        g = np.exp(-y * y)
        U = U0 * (1 - ey) + A * y**2 * g
        U1 = U0 * ey + A * (2 * y - 2 * y**3) * g
        U2 = -U0 * ey + A * (2 - 10 * y**2 + 4 * y**4) * g
        U3 = U0 * ey + A * (-24 * y + 36 * y**3 - 8 * y**5) * g
        U4 = -U0 * ey + A * (-24 + 156 * y**2 - 112 * y**4 + 16 * y**6) * g
        return U, U1, U2, U3, U4
    return derivs


def _algebraic_bump(U0: float, A: float):
    # U = p/(1+y^2); d/dy [p/q^k] = (p' q - 2 k y p)/q^{k+1}
    q = Polynomial([1.0, 0.0, 1.0])
    p = Polynomial([0.0, A, U0])
    nums, powers = [p], [1]
    for _ in range(4):
        pk, k = nums[-1], powers[-1]
        nums.append(pk.deriv() * q - 2 * k * Polynomial([0.0, 1.0]) * pk)
        powers.append(k + 1)

    def derivs(y):
        y = np.asarray(y, dtype=float)
        qv = 1.0 + y * y
        return tuple(nums[d](y) / qv ** powers[d] for d in range(5))
    return derivs


def _monotone(U0: float):
    def derivs(y):
        y = np.asarray(y, dtype=float)
        x = 0.5 * y
        g = np.exp(-x * x) / SQRT_PI
        U = U0 * erf(x)
        U1 = U0 * g
        U2 = -U0 * x * g
        U3 = U0 * (x * x - 0.5) * g
        U4 = U0 * (1.5 * x - x**3) * g
        return U, U1, U2, U3, U4
    return derivs


_FAMILIES = {
    "gaussian-bump": {
        "build": lambda p: _gaussian_bump(p.get("U0", 1.0), p.get("A", 1.0)),
        "decay": lambda p: DecayClass("exponential", 1.0),
        "defaults": {"U0": 1.0, "A": 1.0},
    },
    "algebraic-bump": {
        "build": lambda p: _algebraic_bump(p.get("U0", 1.0), p.get("A", 1.0)),
        "decay": lambda p: DecayClass("algebraic", 2.0),
        "defaults": {"U0": 1.0, "A": 1.0},
    },
    "monotone": {
        "build": lambda p: _monotone(p.get("U0", 1.0)),
        "decay": lambda p: DecayClass("gaussian", None),
        "defaults": {"U0": 1.0},
    },
}


def family_names() -> tuple[str, ...]:
    return tuple(sorted(_FAMILIES))


def build_family(family: str, params: dict | None = None) -> ShearProfile:
    """Construct a profile without locating a critical point (a0 left None)."""
    if family not in _FAMILIES:
        raise ValueError(f"unknown profile family {family!r}; have {family_names()}")
    entry = _FAMILIES[family]
    merged = dict(entry["defaults"])
    merged.update(params or {})
    return ShearProfile(
        family=family,
        params=merged,
        U0=float(merged.get("U0", 1.0)),
        decay_class=entry["decay"](merged),
        derivs=entry["build"](merged),
    )


def critical_points(profile: ShearProfile, y_max: float = 20.0,
                    n_scan: int = 4001) -> list[tuple[float, float]]:
    """All interior roots of U' on (0, y_max) by dense scan + brentq polish.

    Returns (location, curvature) pairs sorted by location.
    """
    ys = np.linspace(1e-6, y_max, n_scan)
    d1 = profile.derivs(ys)[1]
    out = []
    sign = np.sign(d1)
    for i in np.flatnonzero(sign[:-1] * sign[1:] < 0):
        a = brentq(lambda y: profile.derivs(np.array([y]))[1][0],
                   ys[i], ys[i + 1], xtol=1e-13, rtol=8.9e-16)
        out.append((float(a), float(profile.derivs(np.array([a]))[2][0])))
    return out


def make_profile(family: str, params: dict | None = None, *,
                 y_max: float = 20.0, curvature_tol: float = 1e-6) -> ShearProfile:
    """Build a family profile and locate its non-degenerate critical point.

    Picks the maximum (U'' < 0) with the largest |U''|; falls back to the
    strongest-curvature critical point of either sign.  Raises
    NoCriticalPoint / DegenerateCritical when the hypothesis fails.
    """
    prof = build_family(family, params)
    cands = critical_points(prof, y_max=y_max)
    if not cands:
        raise NoCriticalPoint(f"{family} profile has no interior critical point")
    maxima = [c for c in cands if c[1] < 0]
    pool = maxima if maxima else cands
    a0, curv = max(pool, key=lambda c: abs(c[1]))
    if abs(curv) < curvature_tol:
        raise DegenerateCritical(
            f"critical point at y={a0:.6f} has |U''|={abs(curv):.2e} < {curvature_tol}")
    return ShearProfile(
        family=prof.family, params=prof.params, U0=prof.U0,
        decay_class=prof.decay_class, derivs=prof.derivs,
        a0=a0, curvature=curv,
    )


def check_profile_invariants(profile: ShearProfile, y_grid, tol: float = 1e-6) -> dict:
    """Sampled checks of the standing hypotheses; returns a report dict."""
    y = np.asarray(y_grid, dtype=float)
    d = profile.derivs(y)
    rep = {
        "wall_value": float(abs(profile(np.array([0.0]))[0])),
        "far_field_gap": float(abs(d[0][-1] - profile.U0)),
        "w4inf_bound": float(max(np.max(np.abs(d[0] - profile.U0)),
                                 *(np.max(np.abs(d[j])) for j in range(1, 5)))),
    }
    if profile.a0 is not None:
        da = profile.derivs(np.array([profile.a0]))
        rep["slope_at_a0"] = float(abs(da[1][0]))
        rep["curvature_at_a0"] = float(da[2][0])
    if profile.decay_class.kind == "algebraic":
        p = profile.decay_class.rate
        far = y[y.size // 2:]
        scaled = np.abs(profile.derivs(far)[1]) * far ** p
        rep["algebraic_tail_bounds"] = (float(scaled.min()), float(scaled.max()))
    rep["ok"] = rep["wall_value"] < tol and rep["far_field_gap"] < 1e-3
    return rep
