"""Closed-form blow-up limits, weighted densities, and cone-angle equations.

Every admissible stagnation point carries an explicit homogeneous profile

    u0(r, theta) = prefactor * C0 * r^d * cos(d*theta + phi0)   on (theta1, theta2),
    u0 = 0 elsewhere,   d = degree,   theta2 - theta1 = pi/d,

harmonic inside its cone and matching the Bernoulli gradient condition
|grad u0|^2 = weight on both edges.  The edge condition fixes the amplitude,

    d^2 * C0^2 = angular_weight(theta_edge),

and positivity inside the cone fixes the phase phi0 = -d*(theta1+theta2)/2
up to a full turn.  For type-3 points the admissible edge pairs are the
solutions of

    |cos theta1|^alpha |sin theta1|^beta = |cos theta2|^alpha |sin theta2|^beta,
    theta2 = theta1 + 2 pi / (alpha + beta + 2),

found here by dense sampling plus bisection in the angle variable (the
tangent-chart form of the same condition is kept as a cross-check
evaluator).  The angular part of the associated velocity potential solves
the Chebyshev equation (1-z^2) g'' - z g' + d^2 g = 0, whose coefficients
are also computed.

Weighted densities are one-dimensional angular quadratures: the radial part
of each density integral is exact, r^(p+1) integrating to 1/(p+2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .domain import (GridSpec, InvalidPair, InvalidSpec, ProblemSpec, ScalarField,
                     Type1, Type2, Type3, wrap_angle)

TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    """Argument outside the domain of a closed-form evaluator."""


@dataclass(frozen=True)
class ClosedFormProfile:
    """Explicit blow-up limit: amplitude, phase, cone edges, prefactor."""

    degree: float
    C0: float
    phi0: float
    theta1: float
    theta2: float
    prefactor: float

    def __post_init__(self):
        if self.C0 <= 0:
            raise InvalidSpec("profile amplitude must be positive")
        opening = self.theta2 - self.theta1
        if abs(opening - math.pi / self.degree) > 1e-12 * max(1.0, opening):
            raise InvalidSpec("cone opening must equal pi/degree")

    @property
    def opening(self) -> float:
        return self.theta2 - self.theta1


@dataclass(frozen=True)
class AnglePair:
    """Admissible type-3 cone edges theta2 = theta1 + 2 pi/(alpha+beta+2)."""

    theta1: float
    theta2: float
    symmetric: bool


def angular_weight(spec: ProblemSpec, theta):
    """Angular factor of the one-sided weight in the degenerate variable(s).

    type 1: ((sy sin)_+)^beta, type 2: ((sx cos)_+)^alpha,
    type 3: |cos|^alpha |sin|^beta.  The non-degenerate factor and the
    weight constant live in prefactors, not here.
    """
    theta = np.asarray(theta, dtype=float)
    sx, sy = spec.signs
    if isinstance(spec.stag, Type1):
        out = np.maximum(sy * np.sin(theta), 0.0) ** spec.beta
    elif isinstance(spec.stag, Type2):
        out = np.maximum(sx * np.cos(theta), 0.0) ** spec.alpha
    else:
        out = np.abs(np.cos(theta)) ** spec.alpha * np.abs(np.sin(theta)) ** spec.beta
    return float(out) if out.ndim == 0 else out


def _density_prefactor(spec: ProblemSpec) -> float:
    """Non-degenerate weight factor frozen at the stagnation point."""
    if isinstance(spec.stag, Type1):
        return abs(spec.stag.x0) ** spec.alpha
    if isinstance(spec.stag, Type2):
        return abs(spec.stag.y0) ** spec.beta
    return 1.0


def _degenerate_power(spec: ProblemSpec) -> float:
    if isinstance(spec.stag, Type1):
        return spec.beta
    if isinstance(spec.stag, Type2):
        return spec.alpha
    return spec.alpha + spec.beta


def cone_bisector(spec: ProblemSpec) -> float | None:
    """Bisector of the fluid cone for types 1 and 2 (None for type 3)."""
    sx, sy = spec.signs
    if isinstance(spec.stag, Type1):
        return math.pi / 2.0 if sy > 0 else -math.pi / 2.0
    if isinstance(spec.stag, Type2):
        return 0.0 if sx > 0 else math.pi
    return None


def blowup_limit(spec: ProblemSpec, pair: AnglePair | None = None) -> ClosedFormProfile:
    """Exact blow-up profile for a spec; type 3 requires an angle pair."""
    deg = spec.degree
    if isinstance(spec.stag, Type3):
        if pair is None:
            raise InvalidSpec("type-3 blow-up limit needs an admissible angle pair")
        theta1, theta2 = pair.theta1, pair.theta2
        pref = math.sqrt(spec.weight_constant)
    else:
        bis = cone_bisector(spec)
        half = math.pi / (2.0 * deg)
        theta1, theta2 = bis - half, bis + half
        if isinstance(spec.stag, Type1):
            pref = abs(spec.stag.x0) ** (spec.alpha / 2.0) * math.sqrt(spec.weight_constant)
        else:
            pref = abs(spec.stag.y0) ** (spec.beta / 2.0) * math.sqrt(spec.weight_constant)
    w1 = angular_weight(spec, theta1)
    w2 = angular_weight(spec, theta2)
    if abs(w1 - w2) > 1e-10 * max(1.0, w1, w2):
        raise InvalidSpec(f"edge weights differ: {w1!r} vs {w2!r}")
    if w1 <= 0:
        raise InvalidSpec("degenerate cone: edge weight vanishes")
    C0 = math.sqrt(w1) / deg
    phi0 = wrap_angle(-deg * 0.5 * (theta1 + theta2))
    return ClosedFormProfile(degree=deg, C0=C0, phi0=phi0,
                             theta1=theta1, theta2=theta2, prefactor=pref)


def evaluate_blowup_limit(profile: ClosedFormProfile, r, theta):
    """Evaluate prefactor*C0*r^degree*cos(degree*theta + phi0) inside the
    cone, 0 outside; continuous (and zero) on both edges."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    d = profile.degree
    dtheta = np.mod(theta - profile.theta1, TWO_PI)
    inside = dtheta <= profile.opening
    tc = profile.theta1 + dtheta
    val = profile.prefactor * profile.C0 * r ** d * np.cos(d * tc + profile.phi0)
    out = np.where(inside, np.maximum(val, 0.0), 0.0)
    return float(out) if out.ndim == 0 else out


def evaluate_at_points(profile: ClosedFormProfile, x, y, center=(0.0, 0.0)):
    dx = np.asarray(x, dtype=float) - center[0]
    dy = np.asarray(y, dtype=float) - center[1]
    return evaluate_blowup_limit(profile, np.hypot(dx, dy), np.arctan2(dy, dx))


def profile_gradient_sq(profile: ClosedFormProfile, r, theta):
    """|grad u0|^2 = (degree * prefactor * C0)^2 * r^(2 degree - 2) inside
    the cone, 0 outside (the angular dependence cancels exactly)."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    dtheta = np.mod(theta - profile.theta1, TWO_PI)
    inside = dtheta <= profile.opening
    d = profile.degree
    amp = (d * profile.prefactor * profile.C0) ** 2
    out = np.where(inside, amp * r ** (2.0 * d - 2.0), 0.0)
    return float(out) if out.ndim == 0 else out


def profile_field(profile: ClosedFormProfile, grid: GridSpec, center) -> ScalarField:
    """Sample a profile centered at ``center`` onto a grid."""
    X, Y = grid.mesh()
    return ScalarField(grid, evaluate_at_points(profile, X, Y, center))


def _angular_integral(spec: ProblemSpec, theta1: float, theta2: float) -> float:
    if theta2 < theta1:
        raise InvalidSpec("need theta1 <= theta2")
    breaks = []
    k = math.ceil(theta1 / (math.pi / 2.0))
    while k * math.pi / 2.0 < theta2:
        t = k * math.pi / 2.0
        if theta1 < t < theta2:
            breaks.append(t)
        k += 1
    f = lambda t: angular_weight(spec, t)
    val, _ = quad(f, theta1, theta2, points=breaks or None,
                  limit=200, epsabs=1e-12, epsrel=1e-12)
    return val


def corner_density(spec: ProblemSpec, theta1: float, theta2: float) -> float:
    """Weighted density of a corner profile with cone (theta1, theta2):

        C * prefactor * (1/(p+2)) * integral of the angular weight,

    p being the degenerate exponent (beta, alpha, or alpha+beta)."""
    if theta1 == theta2:
        return 0.0
    p = _degenerate_power(spec)
    ang = _angular_integral(spec, theta1, theta2)
    return spec.weight_constant * _density_prefactor(spec) * ang / (p + 2.0)


def full_ball_density(spec: ProblemSpec) -> float:
    """Weighted density of the flat (everywhere-positive) profile."""
    p = _degenerate_power(spec)
    ang = _angular_integral(spec, -math.pi, math.pi)
    return spec.weight_constant * _density_prefactor(spec) * ang / (p + 2.0)


def angle_condition(s: float, alpha: float, beta: float) -> float:
    """Tangent-chart form of the type-3 edge condition:

        |cos A - s sin A|^alpha |cos A + sin A / s|^beta - 1,

    with A = 2 pi/(alpha+beta+2) and s = tan(theta1); zeros correspond to
    admissible pairs.  Kept as a cross-check; the production solver works
    in the angle variable to avoid the s = 0 and s = inf chart artifacts."""
    if s == 0:
        raise DomainError("angle condition undefined at s = 0")
    A = TWO_PI / (alpha + beta + 2.0)
    return (abs(math.cos(A) - s * math.sin(A)) ** alpha
            * abs(math.cos(A) + math.sin(A) / s) ** beta - 1.0)


def _type3_weight(alpha: float, beta: float, theta):
    theta = np.asarray(theta, dtype=float)
    return np.abs(np.cos(theta)) ** alpha * np.abs(np.sin(theta)) ** beta


def edge_weight_mismatch(alpha: float, beta: float, theta1):
    """G(theta1) = w(theta1 + A) - w(theta1) with w = |cos|^a |sin|^b."""
    A = TWO_PI / (alpha + beta + 2.0)
    return _type3_weight(alpha, beta, np.asarray(theta1) + A) \
        - _type3_weight(alpha, beta, theta1)


def snap_symmetric_root(alpha: float, beta: float, theta1: float,
                        tol: float = 1e-5) -> float:
    """Snap a root whose cone bisector falls within ``tol`` of a coordinate
    axis (or, for alpha == beta, a diagonal) onto the exact symmetric
    position.  Axis-symmetric pairs exist for every admissible (alpha,
    beta) by reflection symmetry, and at threshold parameters the crossing
    degenerates to a triple root that sign-based bisection can only locate
    to about cbrt(eps); the symmetry pins it exactly."""
    A = TWO_PI / (alpha + beta + 2.0)
    m = theta1 + A / 2.0
    q = math.pi / 2.0
    near_axis = round(m / q) * q
    if abs(m - near_axis) <= tol:
        return wrap_angle(near_axis - A / 2.0)
    if alpha == beta:
        near_diag = round((m - q / 2.0) / q) * q + q / 2.0
        if abs(m - near_diag) <= tol:
            return wrap_angle(near_diag - A / 2.0)
    return theta1


def pair_symmetric(alpha: float, beta: float, theta1: float, tol: float = 1e-8) -> bool:
    """A pair is tagged symmetric when reflecting its cone across a
    coordinate axis (or, for alpha == beta, a diagonal) maps it to itself,
    i.e. the bisector lies on an axis (or diagonal)."""
    A = TWO_PI / (alpha + beta + 2.0)
    m = theta1 + A / 2.0
    q = math.pi / 2.0
    frac = m / q - round(m / q)
    if abs(frac) * q <= tol:
        return True
    if alpha == beta:
        frac = (m - q / 2.0) / q - round((m - q / 2.0) / q)
        if abs(frac) * q <= tol:
            return True
    return False


def _canonical_degenerate_pairs(alpha: float, beta: float) -> list[float]:
    # alpha = beta = 1 balances the edge weights identically; return the
    # eight pairs that the generic families limit onto (bisectors on the
    # axes and on the diagonals).
    A = TWO_PI / (alpha + beta + 2.0)
    bisectors = [-math.pi / 2.0, 0.0, math.pi / 2.0, math.pi,
                 -3 * math.pi / 4.0, -math.pi / 4.0, math.pi / 4.0, 3 * math.pi / 4.0]
    return [wrap_angle(b - A / 2.0) for b in bisectors]


def solve_angle_pairs(alpha: float, beta: float, samples: int = 4096,
                      merge_tol: float = 1e-8) -> list[AnglePair]:
    """All admissible type-3 edge pairs over theta1 in [-pi, pi).

    Dense sampling of the edge-weight mismatch followed by bisection on
    sign changes; pairs identical modulo 2 pi are merged.  When the
    mismatch vanishes identically (alpha = beta = 1) every angle is
    admissible and the eight canonical limiting pairs are returned.
    """
    if alpha < 1 or beta < 1:
        raise InvalidSpec("angle pairs require alpha >= 1 and beta >= 1")
    A = TWO_PI / (alpha + beta + 2.0)
    th = np.linspace(-math.pi, math.pi, samples, endpoint=False)
    G = edge_weight_mismatch(alpha, beta, th)
    scale = float(np.max(_type3_weight(alpha, beta, th)))
    if float(np.max(np.abs(G))) <= 1e-12 * max(scale, 1e-300):
        roots = _canonical_degenerate_pairs(alpha, beta)
    else:
        roots = []
        g_next = np.roll(G, -1)
        th_next = np.concatenate([th[1:], [th[0] + TWO_PI]])
        for i in range(samples):
            a, b = th[i], th_next[i]
            ga, gb = G[i], g_next[i]
            if ga == 0.0:
                roots.append(float(a))
                continue
            if ga * gb < 0.0:
                lo, hi, glo = a, b, ga
                for _ in range(100):
                    mid = 0.5 * (lo + hi)
                    gm = float(edge_weight_mismatch(alpha, beta, mid))
                    if gm == 0.0:
                        lo = hi = mid
                        break
                    if glo * gm < 0.0:
                        hi = mid
                    else:
                        lo, glo = mid, gm
                roots.append(wrap_angle(0.5 * (lo + hi)))
        roots = [snap_symmetric_root(alpha, beta, t) for t in roots]
        roots = _merge_circular(sorted(roots), merge_tol)
    pairs = [AnglePair(theta1=t, theta2=t + A,
                       symmetric=pair_symmetric(alpha, beta, t))
             for t in sorted(roots)]
    for p in pairs:
        w1 = float(_type3_weight(alpha, beta, p.theta1))
        w2 = float(_type3_weight(alpha, beta, p.theta2))
        if abs(w1 - w2) > 1e-10 * max(1.0, w1, w2):
            raise InvalidPair(f"root at {p.theta1:.12g} violates edge equality")
    return pairs


def _merge_circular(roots: list[float], tol: float) -> list[float]:
    if not roots:
        return roots
    merged = [roots[0]]
    for t in roots[1:]:
        if abs(t - merged[-1]) > tol:
            merged.append(t)
    if len(merged) > 1 and abs((merged[0] + TWO_PI) - merged[-1]) <= tol:
        merged.pop()
    return merged


def expected_pair_count(alpha: float, beta: float) -> int:
    """8 or 12 admissible pairs, keyed on tan A vs 2 sqrt(ab)/|a - b| (the
    threshold is +inf at alpha = beta, so the 8-pair regime applies)."""
    A = TWO_PI / (alpha + beta + 2.0)
    if alpha == beta:
        return 8
    threshold = 2.0 * math.sqrt(alpha * beta) / abs(alpha - beta)
    return 12 if math.tan(A) > threshold else 8


def chebyshev_coefficients(theta1: float, alpha: float, beta: float):
    """Angular coefficients of the type-3 velocity potential.

    The potential's angular part g(theta) = a cos(k theta) + b sin(k theta)
    solves the Chebyshev equation with k = (alpha+beta+2)/2 and satisfies
    g'(theta_i) = 0 on both edges; the edge-weight equality pins
    k^2 (a^2 + b^2) and the stream function's positivity inside the cone
    fixes the remaining sign.  Returns (a, b, C0, phi0)."""
    k = (alpha + beta + 2.0) / 2.0
    A = TWO_PI / (alpha + beta + 2.0)
    w1 = float(_type3_weight(alpha, beta, theta1))
    w2 = float(_type3_weight(alpha, beta, theta1 + A))
    if abs(w1 - w2) > 1e-8 * max(1.0, w1, w2):
        raise InvalidPair(f"edge weights differ by {abs(w1 - w2):g}")
    M = math.sqrt(w1) / k
    a = -M * math.cos(k * theta1)
    b = -M * math.sin(k * theta1)
    phi0 = wrap_angle(-math.pi / 2.0 - k * theta1)
    return a, b, M, phi0


# ---------------------------------------------------------------------------
# Conclusion table: one row per subcase.

@dataclass(frozen=True)
class ConclusionRow:
    stag_type: int
    subcase: str
    x0: float | None
    y0: float | None
    theta0: float | None          # None renders as N/A
    opening: float
    theta1: float
    theta2: float
    density: float


def _subcase_specs(alpha: float, beta: float, x0_mag: float, y0_mag: float,
                   domain_pad: float = 4.0):
    """All subcase configurations admissible at these exponents (type 2
    needs alpha >= 1, type 3 needs both; inadmissible rows are skipped)."""
    from .domain import Rect
    big = Rect(-domain_pad, -domain_pad, domain_pad, domain_pad)
    down, up = 3 * math.pi / 2.0, math.pi / 2.0
    right, left = 0.0, math.pi
    stags = [Type1(x0=x0, theta0=th)
             for x0, th in [(-x0_mag, down), (x0_mag, up),
                            (-x0_mag, up), (x0_mag, down)]]
    stags += [Type2(y0=y0, theta0=th)
              for y0, th in [(-y0_mag, left), (y0_mag, right),
                             (-y0_mag, right), (y0_mag, left)]]
    stags.append(Type3())
    out = []
    for stag in stags:
        try:
            out.append(ProblemSpec(alpha, beta, stag, big))
        except InvalidSpec:
            continue
    return out


def conclusion_table(alpha: float, beta: float, x0_mag: float = 1.0,
                     y0_mag: float = 1.0, pair: AnglePair | None = None) -> list[ConclusionRow]:
    """Openings, cone edges, force directions, and densities for all nine
    subcases at the given exponents.  The type-3 row uses the supplied pair
    or defaults to the downward axis-symmetric one."""
    rows = []
    for spec in _subcase_specs(alpha, beta, x0_mag, y0_mag):
        if isinstance(spec.stag, Type3):
            p = pair
            if p is None:
                A = TWO_PI / (alpha + beta + 2.0)
                t1 = -math.pi / 2.0 - A / 2.0
                p = AnglePair(theta1=t1, theta2=t1 + A,
                              symmetric=pair_symmetric(alpha, beta, t1))
            prof = blowup_limit(spec, p)
            theta0 = None
        else:
            prof = blowup_limit(spec)
            theta0 = spec.stag.theta0
        x0 = spec.stag.x0 if isinstance(spec.stag, Type1) else None
        y0 = spec.stag.y0 if isinstance(spec.stag, Type2) else None
        rows.append(ConclusionRow(
            stag_type=int(spec.subcase[0]),
            subcase=spec.subcase,
            x0=x0, y0=y0, theta0=theta0,
            opening=prof.opening,
            theta1=prof.theta1, theta2=prof.theta2,
            density=corner_density(spec, prof.theta1, prof.theta2),
        ))
    return rows
