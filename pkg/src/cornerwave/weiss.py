"""Adjusted boundary energies M(r), their remainder terms, and the
monotonicity checks that force blow-up limits to be homogeneous.

For a stagnation point with rescaling exponent kappa (< 0),

    M(r) = r^{2 kappa} * integral over B_r of (|grad u|^2 + weight * chi)
         + kappa * r^{2 kappa - 1} * integral over dB_r of u^2,

and M(r) - integral_0^r h(s) ds is non-decreasing in r, where the
remainder h accounts for the r-dependence of the frozen non-degenerate
weight factor:

    type 1:  h(r) = r^{2k-1} * integral of alpha*sx*(x - x0)*(sx x)_+^{alpha-1} (sy y)_+^beta chi
    type 2:  h(r) = r^{2k-1} * integral of beta*sy*(y - y0)*(sx x)_+^alpha (sy y)_+^{beta-1} chi
    type 3:  h == 0  (and h == 0 for type 1 with alpha = 0).

The boundary moment J1(r) = r^{2 kappa - 1} * integral of u^2 over dB_r is
non-decreasing as well.  On an exactly homogeneous profile both M - int h
and J1 are constant, which the checks treat as the equality case.

The limiting weighted density M(0+) is estimated by rescaling the
positivity set of u to the unit ball at a small radius and integrating the
frozen weight over it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .domain import (GridSpec, ProblemSpec, ScalarField, StagnationPoint,
                     RadiusOutOfRange, Type1, Type2, Type3, weight_at)
from .oracle import _degenerate_power, _density_prefactor
from .quadrature import (DiskStencil, circle_integral_u2, grad_central,
                         require_circle_inside)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


@dataclass
class WeissProfile:
    """Radius sweep of M, its numerical derivative, remainder data, and J1."""

    radii: np.ndarray
    M: np.ndarray
    dM_numeric: np.ndarray
    remainder: np.ndarray
    remainder_integral: np.ndarray
    J1: np.ndarray

    def __post_init__(self):
        n = len(self.radii)
        for name in ("M", "dM_numeric", "remainder", "remainder_integral", "J1"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"profile column {name} has wrong length")
        if np.any(np.diff(self.radii) <= 0):
            raise ValueError("radii must be strictly increasing")

    def to_csv(self, path) -> None:
        lines = ["r,M,dM_numeric,remainder,remainder_integral,J1"]
        for k in range(len(self.radii)):
            lines.append(",".join(_fmt(v) for v in (
                self.radii[k], self.M[k], self.dM_numeric[k],
                self.remainder[k], self.remainder_integral[k], self.J1[k])))
        Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def _check_radius(sp: StagnationPoint, grid: GridSpec, r: float) -> None:
    if not (0.0 < r < sp.delta):
        raise RadiusOutOfRange(f"radius {r:g} outside (0, delta={sp.delta:g})")
    require_circle_inside(grid, sp.location, r)


def _analysis_arrays(spec: ProblemSpec, u: ScalarField):
    """Nodewise |grad u|^2, weight, chi, and the remainder integrand."""
    g = u.grid
    ux, uy = grad_central(u.values, g.spacing)
    gradsq = ux * ux + uy * uy
    X, Y = g.mesh()
    w = np.asarray(weight_at(spec, X, Y))
    chi = (u.values > 0.0).astype(float)
    rem = _remainder_integrand(spec, X, Y) * chi
    return gradsq, w, chi, rem


def _remainder_integrand(spec: ProblemSpec, X, Y) -> np.ndarray:
    a, b, c = spec.alpha, spec.beta, spec.weight_constant
    sx, sy = spec.signs
    if isinstance(spec.stag, Type3):
        return np.zeros_like(np.asarray(X, dtype=float))
    if isinstance(spec.stag, Type1):
        if a == 0:
            return np.zeros_like(np.asarray(X, dtype=float))
        x0 = spec.stag.x0
        xb = np.maximum(sx * X, 0.0)
        yb = np.maximum(sy * Y, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            xpow = np.where(xb > 0, xb ** (a - 1.0), 0.0)
        return c * a * sx * (X - x0) * xpow * yb ** b
    if b == 0:
        return np.zeros_like(np.asarray(X, dtype=float))
    y0 = spec.stag.y0
    xb = np.maximum(sx * X, 0.0)
    yb = np.maximum(sy * Y, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ypow = np.where(yb > 0, yb ** (b - 1.0), 0.0)
    return c * b * sy * (Y - y0) * xb ** a * ypow


def weiss_energy(spec: ProblemSpec, u: ScalarField, sp: StagnationPoint,
                 r: float) -> float:
    _check_radius(sp, u.grid, r)
    gradsq, w, chi, _ = _analysis_arrays(spec, u)
    return _weiss_energy_from_arrays(u, sp, r, gradsq, w, chi)


def _weiss_energy_from_arrays(u, sp, r, gradsq, w, chi) -> float:
    k = sp.kappa
    disk = DiskStencil(u.grid, sp.location, r)
    bulk = disk.integrate(gradsq + w * chi)
    ring = circle_integral_u2(u.values, u.grid, sp.location, r)
    return r ** (2 * k) * bulk + k * r ** (2 * k - 1) * ring


def remainder_term(spec: ProblemSpec, u: ScalarField, sp: StagnationPoint,
                   r: float) -> float:
    """Remainder h(r); exactly 0 for type 3 and for type 1 with alpha = 0."""
    _check_radius(sp, u.grid, r)
    if isinstance(spec.stag, Type3):
        return 0.0
    if isinstance(spec.stag, Type1) and spec.alpha == 0:
        return 0.0
    if isinstance(spec.stag, Type2) and spec.beta == 0:
        return 0.0
    _, _, chi, rem = _analysis_arrays(spec, u)
    disk = DiskStencil(u.grid, sp.location, r)
    return r ** (2 * sp.kappa - 1) * disk.integrate(rem)


def _remainder_from_arrays(spec, u, sp, r, rem) -> float:
    if isinstance(spec.stag, Type3):
        return 0.0
    if isinstance(spec.stag, Type1) and spec.alpha == 0:
        return 0.0
    if isinstance(spec.stag, Type2) and spec.beta == 0:
        return 0.0
    disk = DiskStencil(u.grid, sp.location, r)
    return r ** (2 * sp.kappa - 1) * disk.integrate(rem)


def cumulative_remainder(radii: np.ndarray, h_values: np.ndarray) -> np.ndarray:
    """Cumulative integral of h from 0 to each radius.  The stretch below
    the first sampled radius contributes h(r_min) * r_min (quadrature
    convention; h stays bounded near 0 on the fields of interest)."""
    radii = np.asarray(radii, dtype=float)
    h_values = np.asarray(h_values, dtype=float)
    out = np.empty_like(h_values)
    out[0] = h_values[0] * radii[0]
    if len(radii) > 1:
        seg = 0.5 * (h_values[1:] + h_values[:-1]) * np.diff(radii)
        out[1:] = out[0] + np.cumsum(seg)
    return out


def weiss_profile(spec: ProblemSpec, u: ScalarField, sp: StagnationPoint,
                  radii) -> WeissProfile:
    """Assemble M, dM/dr (central differences in log r), h, int h, J1."""
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be strictly increasing")
    for r in (radii[0], radii[-1]):
        _check_radius(sp, u.grid, r)
    gradsq, w, chi, rem = _analysis_arrays(spec, u)
    k = sp.kappa
    M = np.empty_like(radii)
    H = np.empty_like(radii)
    J1 = np.empty_like(radii)
    for i, r in enumerate(radii):
        M[i] = _weiss_energy_from_arrays(u, sp, r, gradsq, w, chi)
        H[i] = _remainder_from_arrays(spec, u, sp, r, rem)
        J1[i] = r ** (2 * k - 1) * circle_integral_u2(u.values, u.grid, sp.location, r)
    logr = np.log(radii)
    dM = np.gradient(M, logr) / radii
    return WeissProfile(radii=radii, M=M, dM_numeric=dM, remainder=H,
                        remainder_integral=cumulative_remainder(radii, H), J1=J1)


@dataclass
class MonotonicityReport:
    passed: bool
    worst_violation: float
    worst_radius: float | None
    j1_passed: bool
    j1_worst_violation: float
    j1_worst_radius: float | None
    n_flagged: int

    @property
    def all_passed(self) -> bool:
        return self.passed and self.j1_passed


def check_monotonicity(profile: WeissProfile, tol: float) -> MonotonicityReport:
    """Flag adjacent radius pairs where M - int h (or J1) decreases by more
    than tol; reports the worst drop of each."""
    g = profile.M - profile.remainder_integral
    dg = np.diff(g)
    dj = np.diff(profile.J1)

    def worst(d):
        if d.size == 0:
            return 0.0, None
        i = int(np.argmin(d))
        return float(max(0.0, -d[i])), float(profile.radii[i + 1])

    g_viol, g_rad = worst(dg)
    j_viol, j_rad = worst(dj)
    n_flagged = int(np.sum(dg < -tol)) + int(np.sum(dj < -tol))
    return MonotonicityReport(
        passed=g_viol <= tol, worst_violation=g_viol, worst_radius=g_rad,
        j1_passed=j_viol <= tol, j1_worst_violation=j_viol, j1_worst_radius=j_rad,
        n_flagged=n_flagged)


def limit_density(spec: ProblemSpec, u: ScalarField, sp: StagnationPoint,
                  r_small: float, reference_n: int = 257) -> float:
    """Weighted density estimate at scale r_small:

        C * prefactor * integral over B_1 of m(Z) * chi_{u(X0 + r Z) > 0},

    where m is the frozen angular monomial ((sy z2)_+^beta for type 1,
    (sx z1)_+^alpha for type 2, |z1|^alpha |z2|^beta for type 3) and the
    prefactor carries the non-degenerate factor at X0."""
    _check_radius(sp, u.grid, r_small)
    n = reference_n
    ref = GridSpec(nx=n, ny=n, origin=(-1.0, -1.0), spacing=2.0 / (n - 1))
    Zx, Zy = ref.mesh()
    px = sp.location[0] + r_small * Zx
    py = sp.location[1] + r_small * Zy
    # node-level positivity mask {u > 0}, sampled at the nearest source
    # node (bilinear sampling would dilate the set by up to one cell); the
    # reference-square corners poking past B_1 are clamped and carry zero
    # disk weight anyway
    g = u.grid
    ii = np.clip(np.rint((px - g.origin[0]) / g.spacing).astype(int), 0, g.nx - 1)
    jj = np.clip(np.rint((py - g.origin[1]) / g.spacing).astype(int), 0, g.ny - 1)
    chi = (u.values[jj, ii] > 0.0).astype(float)
    sx, sy = spec.signs
    if isinstance(spec.stag, Type1):
        mono = np.maximum(sy * Zy, 0.0) ** spec.beta
    elif isinstance(spec.stag, Type2):
        mono = np.maximum(sx * Zx, 0.0) ** spec.alpha
    else:
        mono = np.abs(Zx) ** spec.alpha * np.abs(Zy) ** spec.beta
    disk = DiskStencil(ref, (0.0, 0.0), 1.0)
    val = disk.integrate(mono * chi)
    return spec.weight_constant * _density_prefactor(spec) * val
