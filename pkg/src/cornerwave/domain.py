"""Problem description, grids, fields, and the degenerate boundary weight.

The laboratory studies nonnegative functions u that are harmonic on their
positivity set and satisfy the Bernoulli gradient condition

    |grad u|^2 = C |x|^alpha |y|^beta        on the free boundary d{u>0},

where the squared-speed prescription degenerates on one or both coordinate
axes.  A stagnation point is a free-boundary point sitting on a degeneracy
axis; three types are distinguished by its location:

    type 1:  X0 = (x0, 0), x0 != 0   (degenerate in y only, beta >= 1)
    type 2:  X0 = (0, y0), y0 != 0   (degenerate in x only, alpha >= 1)
    type 3:  X0 = (0, 0)             (degenerate in both, alpha, beta >= 1)

For types 1 and 2 the weight carries one-sided sign conventions selecting
the quadrant that hosts the fluid, e.g. (-x)^alpha (-y)^beta for a type-1
point with x0 < 0 and downward force.  The force direction theta0 (down or
up for type 1, left or right for type 2) fixes the degenerate factor's
side; the sign of the stagnation coordinate fixes the non-degenerate one.

Everything here is immutable value data shared by the solver and the
analysis modules.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TWO_PI = 2.0 * math.pi


class RadiusOutOfRange(ValueError):
    """Requested radius leaves the analysis window or the grid."""


class InvalidBoundary(ValueError):
    """Boundary data violates the nonnegativity requirement."""


class InvalidSpec(ValueError):
    """Problem description violates a structural invariant."""


class InvalidPair(ValueError):
    """Cone angle pair does not satisfy the edge-weight equality."""


class EmptyPositivity(ValueError):
    """No positivity set where the operation requires one."""


class DegenerateDenominator(ValueError):
    """A boundary-circle integral of u^2 vanished at some radius."""

    def __init__(self, radius: float, value: float):
        super().__init__(f"circle integral of u^2 is {value:g} at r={radius:g}")
        self.radius = radius
        self.value = value


def wrap_angle(theta):
    """Map an angle to the half-open interval (-pi, pi]."""
    t = np.asarray(theta, dtype=float)
    out = t - TWO_PI * np.floor((t + math.pi) / TWO_PI)
    out = np.where(out <= -math.pi, out + TWO_PI, out)
    return float(out) if np.isscalar(theta) or out.ndim == 0 else out


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle [x_min, x_max] x [y_min, y_max]."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise InvalidSpec(f"degenerate rectangle {self}")

    def contains(self, point, margin: float = 0.0) -> bool:
        x, y = point
        return (self.x_min + margin <= x <= self.x_max - margin
                and self.y_min + margin <= y <= self.y_max - margin)

    def distance_to_boundary(self, point) -> float:
        x, y = point
        return min(x - self.x_min, self.x_max - x, y - self.y_min, self.y_max - y)


THETA_DOWN = 3.0 * math.pi / 2.0
THETA_UP = math.pi / 2.0
THETA_LEFT = math.pi
THETA_RIGHT = 0.0


@dataclass(frozen=True)
class Type1:
    """Stagnation point (x0, 0); force direction theta0 is up or down."""

    x0: float
    theta0: float = THETA_DOWN

    def __post_init__(self):
        if self.x0 == 0.0:
            raise InvalidSpec("type-1 stagnation point needs x0 != 0")
        if not (_close(self.theta0, THETA_UP) or _close(self.theta0, THETA_DOWN)):
            raise InvalidSpec(f"type-1 force direction must be pi/2 or 3pi/2, got {self.theta0}")


@dataclass(frozen=True)
class Type2:
    """Stagnation point (0, y0); force direction theta0 is right or left."""

    y0: float
    theta0: float = THETA_RIGHT

    def __post_init__(self):
        if self.y0 == 0.0:
            raise InvalidSpec("type-2 stagnation point needs y0 != 0")
        if not (_close(self.theta0, THETA_RIGHT) or _close(self.theta0, THETA_LEFT)):
            raise InvalidSpec(f"type-2 force direction must be 0 or pi, got {self.theta0}")


@dataclass(frozen=True)
class Type3:
    """Stagnation point at the origin; theta_star orients the fluid cone."""

    theta_star: float = -math.pi / 2.0


StagnationType = Type1 | Type2 | Type3


def _close(a: float, b: float, tol: float = 1e-9) -> bool:
    return abs(a - b) <= tol


@dataclass(frozen=True)
class ProblemSpec:
    """Exponents, stagnation type, domain rectangle, and weight constant."""

    alpha: float
    beta: float
    stag: StagnationType
    domain: Rect
    weight_constant: float = 1.0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise InvalidSpec("exponents must be nonnegative")
        if self.alpha + self.beta <= 0:
            raise InvalidSpec("alpha + beta must be positive")
        if self.weight_constant <= 0:
            raise InvalidSpec("weight constant must be positive")
        if isinstance(self.stag, Type1) and self.beta < 1:
            raise InvalidSpec("type 1 requires beta >= 1")
        if isinstance(self.stag, Type2) and self.alpha < 1:
            raise InvalidSpec("type 2 requires alpha >= 1")
        if isinstance(self.stag, Type3) and (self.alpha < 1 or self.beta < 1):
            raise InvalidSpec("type 3 requires alpha >= 1 and beta >= 1")
        if not self.domain.contains(self.stagnation_location):
            raise InvalidSpec("stagnation point lies outside the domain rectangle")

    @property
    def stagnation_location(self) -> tuple[float, float]:
        if isinstance(self.stag, Type1):
            return (self.stag.x0, 0.0)
        if isinstance(self.stag, Type2):
            return (0.0, self.stag.y0)
        return (0.0, 0.0)

    @property
    def signs(self) -> tuple[int, int]:
        """One-sided weight signs (sx, sy); (0, 0) means |.| in both axes."""
        if isinstance(self.stag, Type1):
            sy = 1 if _close(self.stag.theta0, THETA_UP) else -1
            return (1 if self.stag.x0 > 0 else -1, sy)
        if isinstance(self.stag, Type2):
            sx = 1 if _close(self.stag.theta0, THETA_RIGHT) else -1
            return (sx, 1 if self.stag.y0 > 0 else -1)
        return (0, 0)

    @property
    def subcase(self) -> str:
        if isinstance(self.stag, Type1):
            table = {(-1, -1): "1.1", (1, 1): "1.2", (-1, 1): "1.3", (1, -1): "1.4"}
            return table[self.signs]
        if isinstance(self.stag, Type2):
            table = {(-1, -1): "2.1", (1, 1): "2.2", (1, -1): "2.3", (-1, 1): "2.4"}
            return table[self.signs]
        return "3"

    @property
    def kappa(self) -> float:
        return kappa_for(self)

    @property
    def degree(self) -> float:
        """Positive homogeneity degree of the blow-up limit (= -kappa)."""
        return -kappa_for(self)


def kappa_for(spec: ProblemSpec) -> float:
    """Rescaling exponent: u_r(X) = r^kappa u(X0 + r X) stays O(1)."""
    if isinstance(spec.stag, Type1):
        return -(spec.beta + 2.0) / 2.0
    if isinstance(spec.stag, Type2):
        return -(spec.alpha + 2.0) / 2.0
    return -(spec.alpha + spec.beta + 2.0) / 2.0


def weight_at(spec: ProblemSpec, x, y=None):
    """Evaluate the one-sided weight C |x|^alpha |y|^beta at a point.

    Accepts a point pair or broadcastable coordinate arrays.  The sign
    conventions of the active subcase are applied exactly, e.g. subcase 1.1
    evaluates C (-x)_+^alpha (-y)_+^beta; the weight vanishes on every
    degeneracy axis and no smoothing is applied.
    """
    if y is None:
        x, y = x
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sx, sy = spec.signs
    if sx == 0:
        xf = np.abs(x) ** spec.alpha
        yf = np.abs(y) ** spec.beta
    else:
        xf = np.maximum(sx * x, 0.0) ** spec.alpha
        yf = np.maximum(sy * y, 0.0) ** spec.beta
    out = spec.weight_constant * xf * yf
    return float(out) if out.ndim == 0 else out


def weight_gradient_at(spec: ProblemSpec, x, y):
    """Gradient of the one-sided weight, with value 0 where a factor's base
    vanishes (the measure-zero axis set)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a, b, c = spec.alpha, spec.beta, spec.weight_constant
    sx, sy = spec.signs
    if sx == 0:
        xb, yb = np.abs(x), np.abs(y)
        dxb, dyb = np.sign(x), np.sign(y)
    else:
        xb, yb = np.maximum(sx * x, 0.0), np.maximum(sy * y, 0.0)
        dxb = np.where(xb > 0, float(sx), 0.0)
        dyb = np.where(yb > 0, float(sy), 0.0)
    xf = xb ** a
    yf = yb ** b
    with np.errstate(divide="ignore", invalid="ignore"):
        xfm = np.where(xb > 0, xb ** (a - 1.0), 0.0)
        yfm = np.where(yb > 0, yb ** (b - 1.0), 0.0)
    wx = c * a * dxb * xfm * yf if a > 0 else np.zeros_like(xf * yf)
    wy = c * b * dyb * yfm * xf if b > 0 else np.zeros_like(xf * yf)
    return wx, wy


def value_envelope_monomial(spec: ProblemSpec, x, y):
    """Pointwise growth envelope implied by the Bernstein gradient bound
    |grad u|^2 <= C * weight near the stagnation point:

        type 1: (sx x)_+^{a/2} (sy y)_+^{b/2+1}
        type 2: (sx x)_+^{a/2+1} (sy y)_+^{b/2}
        type 3: |x|^{a/2+1} |y|^{b/2} + |x|^{a/2} |y|^{b/2+1}

    Admissible fields stay below a constant multiple of this; hair-like
    spikes hugging a degeneracy axis violate it."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a, b = spec.alpha, spec.beta
    sx, sy = spec.signs
    if sx == 0:
        ax, ay = np.abs(x), np.abs(y)
        return ax ** (a / 2 + 1) * ay ** (b / 2) + ax ** (a / 2) * ay ** (b / 2 + 1)
    xb = np.maximum(sx * x, 0.0)
    yb = np.maximum(sy * y, 0.0)
    if isinstance(spec.stag, Type1):
        return xb ** (a / 2) * yb ** (b / 2 + 1)
    return xb ** (a / 2 + 1) * yb ** (b / 2)


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid with square cells; node (i, j) sits at origin + h*(i, j)."""

    nx: int
    ny: int
    origin: tuple[float, float]
    spacing: float

    def __post_init__(self):
        if self.nx < 16 or self.ny < 16:
            raise InvalidSpec("grid needs at least 16 nodes per axis")
        if self.spacing <= 0:
            raise InvalidSpec("grid spacing must be positive")

    @classmethod
    def from_domain(cls, rect: Rect, nx: int, ny: int) -> "GridSpec":
        hx = (rect.x_max - rect.x_min) / (nx - 1)
        hy = (rect.y_max - rect.y_min) / (ny - 1)
        if abs(hx - hy) > 1e-9 * max(hx, hy):
            raise InvalidSpec(f"non-square cells: hx={hx!r}, hy={hy!r}")
        return cls(nx=nx, ny=ny, origin=(rect.x_min, rect.y_min), spacing=hx)

    def xs(self) -> np.ndarray:
        return self.origin[0] + self.spacing * np.arange(self.nx)

    def ys(self) -> np.ndarray:
        return self.origin[1] + self.spacing * np.arange(self.ny)

    def mesh(self):
        return np.meshgrid(self.xs(), self.ys())

    @property
    def extent(self) -> Rect:
        return Rect(self.origin[0], self.origin[1],
                    self.origin[0] + self.spacing * (self.nx - 1),
                    self.origin[1] + self.spacing * (self.ny - 1))

    def distance_to_edge(self, point) -> float:
        return self.extent.distance_to_boundary(point)


@dataclass
class ScalarField:
    """Grid function; values[j, i] lives at (xs[i], ys[j])."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.ny, self.grid.nx):
            raise InvalidSpec(
                f"field shape {self.values.shape} != grid ({self.grid.ny}, {self.grid.nx})")
        if not np.all(np.isfinite(self.values)):
            raise InvalidSpec("field values must be finite")

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    def interp(self, px, py):
        """Bilinear interpolation; raises RadiusOutOfRange off the grid."""
        return bilinear(self.values, self.grid, px, py)


def bilinear(values: np.ndarray, grid: GridSpec, px, py):
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    gx = (px - grid.origin[0]) / grid.spacing
    gy = (py - grid.origin[1]) / grid.spacing
    eps = 1e-9
    if np.any(gx < -eps) or np.any(gx > grid.nx - 1 + eps) \
            or np.any(gy < -eps) or np.any(gy > grid.ny - 1 + eps):
        raise RadiusOutOfRange("interpolation point outside the grid")
    i0 = np.clip(np.floor(gx).astype(int), 0, grid.nx - 2)
    j0 = np.clip(np.floor(gy).astype(int), 0, grid.ny - 2)
    fx = np.clip(gx - i0, 0.0, 1.0)
    fy = np.clip(gy - j0, 0.0, 1.0)
    v00 = values[j0, i0]
    v10 = values[j0, i0 + 1]
    v01 = values[j0 + 1, i0]
    v11 = values[j0 + 1, i0 + 1]
    out = (v00 * (1 - fx) * (1 - fy) + v10 * fx * (1 - fy)
           + v01 * (1 - fx) * fy + v11 * fx * fy)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class StagnationPoint:
    """Analysis anchor: location X0, rescaling exponent kappa, radius delta."""

    location: tuple[float, float]
    kappa: float
    delta: float

    def __post_init__(self):
        if self.delta <= 0:
            raise InvalidSpec("analysis radius delta must be positive")


def stagnation_point(spec: ProblemSpec, delta: float | None = None) -> StagnationPoint:
    """Build the stagnation point of a spec; delta defaults to half the
    distance to the domain boundary and may not exceed it."""
    loc = spec.stagnation_location
    dmax = spec.domain.distance_to_boundary(loc) / 2.0
    if delta is None:
        delta = dmax
    if not (0.0 < delta <= dmax * (1 + 1e-12)):
        raise InvalidSpec(f"delta={delta:g} outside (0, {dmax:g}]")
    return StagnationPoint(location=loc, kappa=kappa_for(spec), delta=float(delta))


# ---------------------------------------------------------------------------
# Persistence: JSON header line + newline-separated node values, row-major.
# Values are written with 17 significant digits, which round-trips float64
# bit-exactly.

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _stag_to_json(stag: StagnationType) -> dict:
    if isinstance(stag, Type1):
        return {"type": "type1", "x0": stag.x0, "theta0": stag.theta0}
    if isinstance(stag, Type2):
        return {"type": "type2", "y0": stag.y0, "theta0": stag.theta0}
    return {"type": "type3", "theta_star": stag.theta_star}


def _stag_from_json(d: dict) -> StagnationType:
    kind = d["type"]
    if kind == "type1":
        return Type1(x0=d["x0"], theta0=d["theta0"])
    if kind == "type2":
        return Type2(y0=d["y0"], theta0=d["theta0"])
    if kind == "type3":
        return Type3(theta_star=d["theta_star"])
    raise InvalidSpec(f"unknown stagnation type {kind!r}")


def save_field(field: ScalarField, path, spec: ProblemSpec | None = None) -> None:
    g = field.grid
    header = {
        "nx": g.nx,
        "ny": g.ny,
        "origin": [g.origin[0], g.origin[1]],
        "spacing": g.spacing,
    }
    if spec is not None:
        header.update({
            "alpha": spec.alpha,
            "beta": spec.beta,
            "weight_constant": spec.weight_constant,
            "stag_type": _stag_to_json(spec.stag),
            "domain": [spec.domain.x_min, spec.domain.y_min,
                       spec.domain.x_max, spec.domain.y_max],
        })
    lines = [json.dumps(header, sort_keys=True)]
    lines.extend(_fmt(v) for v in field.values.ravel())
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_field(path) -> tuple[ScalarField, dict]:
    """Load a persisted field; returns (field, header)."""
    text = Path(path).read_text(encoding="ascii").splitlines()
    header = json.loads(text[0])
    nx, ny = header["nx"], header["ny"]
    grid = GridSpec(nx=nx, ny=ny, origin=tuple(header["origin"]),
                    spacing=header["spacing"])
    vals = np.array([float(t) for t in text[1:1 + nx * ny]], dtype=float)
    if vals.size != nx * ny:
        raise InvalidSpec(f"expected {nx * ny} values, found {vals.size}")
    return ScalarField(grid, vals.reshape(ny, nx)), header


def spec_from_header(header: dict) -> ProblemSpec:
    return ProblemSpec(
        alpha=header["alpha"],
        beta=header["beta"],
        stag=_stag_from_json(header["stag_type"]),
        domain=Rect(*header["domain"]),
        weight_constant=header.get("weight_constant", 1.0),
    )
