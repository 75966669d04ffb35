"""Config-driven orchestration: build a problem, solve, analyze, classify,
and emit deterministic reports.

A run consumes one YAML config (JSON is accepted too, YAML being a
superset) and produces, inside the output directory:

    solution.field        persisted solver output (JSON header + values)
    weiss.csv             r, M, dM_numeric, remainder, remainder_integral, J1
    frequency.csv         r, D, V1, V2, V, H
    blowup.json           radii, successive distances, homogeneity residual,
                          density, directions (+ the resolved config)
    rescale_<k>.field     the rescaled fields of the blow-up schedule
    classification.json   corner/cusp/flat verdict with distances
    table1.csv            per-subcase openings, cone edges, densities
    solution.svg          contour plot + free boundary + predicted cone edges

All floating-point output is written with 17 significant digits and no
timestamps, so identical configs reproduce byte-identical artifacts.  The
resolved config is embedded in every JSON report and can itself be fed
back as a config (provenance round-trip).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import blowup as bw
from . import oracle
from .domain import (GridSpec, ProblemSpec, Rect, ScalarField, StagnationPoint,
                     Type1, Type2, Type3, save_field, stagnation_point)
from .energy import SolverParams, SolveResult, minimize_energy
from .frequency import frequency_profile
from .weiss import weiss_profile

FORMATS = ("csv", "json", "svg")


class ConfigError(Exception):
    """Bad or missing configuration; exit code 2."""


class SolverError(Exception):
    """Failure inside the solve stage; exit code 3."""


class AnalysisError(Exception):
    """Failure inside an analysis stage; exit code 4."""


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _need(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ConfigError(f"missing field '{key}' in {where}")
    return mapping[key]


@dataclass
class BoundaryConfig:
    source: str = "oracle"          # oracle | plane | zero
    perturbation: float = 0.0       # amplitude of the decaying same-cone mode
    pair_theta1: float | None = None  # type-3 seed pair
    init: str = "hull"              # hull | oracle


@dataclass
class AnalysisConfig:
    delta: float | None = None
    radii: list[float] = field(default_factory=list)
    blowup_radii: list[float] = field(default_factory=list)
    density_radius: float | None = None
    direction_radius: float | None = None
    annuli: list[float] | None = None
    reference_n: int = 129
    include_remainder_term: bool = True


@dataclass
class OutputConfig:
    directory: str = "out"
    formats: tuple[str, ...] = FORMATS


@dataclass
class PipelineConfig:
    problem: ProblemSpec
    grid: GridSpec
    solver: SolverParams
    boundary: BoundaryConfig
    analysis: AnalysisConfig
    outputs: OutputConfig
    raw: dict = field(default_factory=dict)


def _parse_stag(d: dict) -> Type1 | Type2 | Type3:
    kind = _need(d, "type", "problem.stagnation")
    if kind in (1, "1", "type1"):
        return Type1(x0=_need(d, "x0", "problem.stagnation"),
                     theta0=d.get("theta0", 3 * math.pi / 2))
    if kind in (2, "2", "type2"):
        return Type2(y0=_need(d, "y0", "problem.stagnation"),
                     theta0=d.get("theta0", 0.0))
    if kind in (3, "3", "type3"):
        return Type3(theta_star=d.get("theta_star", -math.pi / 2))
    raise ConfigError(f"unknown stagnation type {kind!r}")


def parse_config(data: dict) -> PipelineConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    try:
        prob = _need(data, "problem", "config")
        alpha = _need(prob, "alpha", "problem")
        beta = _need(prob, "beta", "problem")
        dom = _need(prob, "domain", "problem")
        spec = ProblemSpec(
            alpha=float(alpha), beta=float(beta),
            stag=_parse_stag(_need(prob, "stagnation", "problem")),
            domain=Rect(*[float(v) for v in dom]),
            weight_constant=float(prob.get("weight_constant", 1.0)))
        grid_cfg = _need(data, "grid", "config")
        grid = GridSpec.from_domain(spec.domain,
                                    int(_need(grid_cfg, "nx", "grid")),
                                    int(_need(grid_cfg, "ny", "grid")))
        sol = data.get("solver", {}) or {}
        solver = SolverParams(
            smoothing_eps=sol.get("smoothing_eps"),
            step_size=sol.get("step_size"),
            max_iters=int(sol.get("max_iters", 6000)),
            tol_energy=float(sol.get("tol_energy", 1e-9)),
            tol_field=float(sol.get("tol_field", 1e-7)),
            block_size=int(sol.get("block_size", 10)),
            enforce_support=bool(sol.get("enforce_support", True)),
            bernstein_trim=bool(sol.get("bernstein_trim", True)),
            bernstein_margin=float(sol.get("bernstein_margin", 1.3)))
        bnd = data.get("boundary", {}) or {}
        boundary = BoundaryConfig(
            source=bnd.get("source", "oracle"),
            perturbation=float(bnd.get("perturbation", 0.0)),
            pair_theta1=bnd.get("pair_theta1"),
            init=bnd.get("init", "hull"))
        if boundary.source not in ("oracle", "plane", "zero"):
            raise ConfigError(f"unknown boundary source {boundary.source!r}")
        if boundary.init not in ("hull", "oracle"):
            raise ConfigError(f"unknown solver init {boundary.init!r}")
        ana = data.get("analysis", {}) or {}
        radii = _radii_list(ana.get("radii"))
        analysis = AnalysisConfig(
            delta=ana.get("delta"),
            radii=radii,
            blowup_radii=[float(r) for r in ana.get("blowup_radii", [])],
            density_radius=ana.get("density_radius"),
            direction_radius=ana.get("direction_radius"),
            annuli=ana.get("annuli"),
            reference_n=int(ana.get("reference_n", 129)),
            include_remainder_term=bool(ana.get("include_remainder_term", True)))
        out = data.get("outputs", {}) or {}
        formats = tuple(out.get("formats", list(FORMATS)))
        for f in formats:
            if f not in FORMATS:
                raise ConfigError(f"unknown output format {f!r}")
        outputs = OutputConfig(directory=out.get("directory", "out"), formats=formats)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return PipelineConfig(problem=spec, grid=grid, solver=solver,
                          boundary=boundary, analysis=analysis,
                          outputs=outputs, raw=data)


def _radii_list(spec) -> list[float]:
    if spec is None:
        return []
    if isinstance(spec, (list, tuple)):
        return [float(r) for r in spec]
    if isinstance(spec, dict):
        r0 = float(_need(spec, "r_min", "analysis.radii"))
        r1 = float(_need(spec, "r_max", "analysis.radii"))
        n = int(_need(spec, "count", "analysis.radii"))
        if spec.get("log", True):
            return list(np.geomspace(r0, r1, n))
        return list(np.linspace(r0, r1, n))
    raise ConfigError("analysis.radii must be a list or {r_min, r_max, count}")


def load_config(path) -> PipelineConfig:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    return parse_config(data)


# ---------------------------------------------------------------------------
# stage: boundary data

def _oracle_boundary(cfg: PipelineConfig):
    spec = cfg.problem
    if isinstance(spec.stag, Type3):
        if cfg.boundary.pair_theta1 is not None:
            t1 = float(cfg.boundary.pair_theta1)
            A = 2 * math.pi / (spec.alpha + spec.beta + 2)
            pair = oracle.AnglePair(theta1=t1, theta2=t1 + A,
                                    symmetric=oracle.pair_symmetric(spec.alpha, spec.beta, t1))
        else:
            A = 2 * math.pi / (spec.alpha + spec.beta + 2)
            t1 = -math.pi / 2 - A / 2
            pair = oracle.AnglePair(theta1=t1, theta2=t1 + A, symmetric=True)
        profile = oracle.blowup_limit(spec, pair)
    else:
        profile = oracle.blowup_limit(spec)
    X, Y = cfg.grid.mesh()
    x0, y0 = spec.stagnation_location
    vals = oracle.evaluate_at_points(profile, X, Y, (x0, y0))
    if cfg.boundary.perturbation:
        # same-cone mode one power of r above the blow-up degree: decays
        # linearly under rescaling, giving a measurable convergence rate
        d = profile.degree
        rr = np.hypot(X - x0, Y - y0)
        th = np.arctan2(Y - y0, X - x0)
        dth = np.mod(th - profile.theta1, 2 * math.pi)
        inside = dth <= profile.opening
        mode = np.where(inside, np.maximum(
            np.cos(d * (profile.theta1 + dth) + profile.phi0), 0.0), 0.0)
        vals = vals + cfg.boundary.perturbation * profile.prefactor * profile.C0 \
            * rr ** (d + 1.0) * mode
    return np.asarray(vals), profile


def build_boundary(cfg: PipelineConfig):
    """Full-grid array whose ring supplies the Dirichlet data, plus the
    oracle profile used (None for plane/zero data)."""
    if cfg.boundary.source == "zero":
        return np.zeros((cfg.grid.ny, cfg.grid.nx)), None
    if cfg.boundary.source == "plane":
        _, Y = cfg.grid.mesh()
        return np.maximum(-Y, 0.0), None
    return _oracle_boundary(cfg)


# ---------------------------------------------------------------------------
# stages

def run_solve(cfg: PipelineConfig) -> tuple[SolveResult, object]:
    try:
        bd, profile = build_boundary(cfg)
        initial = None
        if cfg.boundary.init == "oracle":
            if profile is None:
                raise ConfigError("init=oracle needs an oracle boundary source")
            initial = ScalarField(cfg.grid, bd.copy())
        weight = None
        if cfg.boundary.source == "plane":
            weight = np.ones((cfg.grid.ny, cfg.grid.nx))
        result = minimize_energy(cfg.problem, cfg.grid, bd, cfg.solver,
                                 initial=initial, weight=weight)
    except ConfigError:
        raise
    except Exception as exc:
        raise SolverError(f"solve stage failed: {exc}") from exc
    return result, profile


def run_analysis(cfg: PipelineConfig, u: ScalarField):
    try:
        sp = stagnation_point(cfg.problem, cfg.analysis.delta)
        wp = weiss_profile(cfg.problem, u, sp, cfg.analysis.radii) \
            if cfg.analysis.radii else None
        fp = frequency_profile(cfg.problem, u, sp, cfg.analysis.radii,
                               include_remainder_term=cfg.analysis.include_remainder_term) \
            if cfg.analysis.radii else None
        br = bw.blowup_analysis(
            cfg.problem, u, sp, cfg.analysis.blowup_radii,
            reference_n=cfg.analysis.reference_n,
            density_radius=cfg.analysis.density_radius,
            direction_radius=cfg.analysis.direction_radius,
            annuli=cfg.analysis.annuli) if cfg.analysis.blowup_radii else None
        return sp, wp, fp, br
    except Exception as exc:
        raise AnalysisError(f"analysis stage failed: {exc}") from exc


def run_classify(cfg: PipelineConfig, sp: StagnationPoint, density: float):
    try:
        spec = cfg.problem
        if isinstance(spec.stag, Type3):
            pairs = oracle.solve_angle_pairs(spec.alpha, spec.beta)
            corner = [oracle.corner_density(spec, p.theta1, p.theta2) for p in pairs]
        else:
            prof = oracle.blowup_limit(spec)
            corner = oracle.corner_density(spec, prof.theta1, prof.theta2)
        full = oracle.full_ball_density(spec)
        return bw.classify(spec, density, sp, corner, full)
    except Exception as exc:
        raise AnalysisError(f"classification failed: {exc}") from exc


# ---------------------------------------------------------------------------
# writers

def _json_dump(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n",
                          encoding="utf-8")


def write_table1(alpha: float, beta: float, path,
                 pair_theta1: float | None = None) -> None:
    pair = None
    if pair_theta1 is not None:
        A = 2 * math.pi / (alpha + beta + 2)
        pair = oracle.AnglePair(theta1=pair_theta1, theta2=pair_theta1 + A,
                                symmetric=oracle.pair_symmetric(alpha, beta, pair_theta1))
    rows = oracle.conclusion_table(alpha, beta, pair=pair)
    lines = ["type,subcase,x0,y0,theta0,opening,theta1,theta2,density"]
    for r in rows:
        lines.append(",".join([
            str(r.stag_type), r.subcase,
            _fmt(r.x0) if r.x0 is not None else "",
            _fmt(r.y0) if r.y0 is not None else "",
            _fmt(r.theta0) if r.theta0 is not None else "N/A",
            _fmt(r.opening), _fmt(r.theta1), _fmt(r.theta2), _fmt(r.density)]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def _downsample(values: np.ndarray, max_side: int = 128) -> np.ndarray:
    step = max(1, int(math.ceil(max(values.shape) / max_side)))
    return values[::step, ::step]


def _marching_segments(values: np.ndarray, grid: GridSpec, level: float):
    """Line segments of the level set by marching squares (no chaining)."""
    v = values - level
    xs, ys = grid.xs(), grid.ys()
    segs = []
    neg = v < 0

    def edge_point(x1, y1, v1, x2, y2, v2):
        t = v1 / (v1 - v2)
        return (x1 + t * (x2 - x1), y1 + t * (y2 - y1))

    for j in range(grid.ny - 1):
        for i in range(grid.nx - 1):
            idx = (int(neg[j, i]) | int(neg[j, i + 1]) << 1
                   | int(neg[j + 1, i + 1]) << 2 | int(neg[j + 1, i]) << 3)
            if idx in (0, 15):
                continue
            corners = [(xs[i], ys[j], v[j, i]), (xs[i + 1], ys[j], v[j, i + 1]),
                       (xs[i + 1], ys[j + 1], v[j + 1, i + 1]),
                       (xs[i], ys[j + 1], v[j + 1, i])]
            pts = []
            for a in range(4):
                x1, y1, v1 = corners[a]
                x2, y2, v2 = corners[(a + 1) % 4]
                if (v1 < 0) != (v2 < 0):
                    pts.append(edge_point(x1, y1, v1, x2, y2, v2))
            for a in range(0, len(pts) - 1, 2):
                segs.append((pts[a], pts[a + 1]))
    return segs


def write_svg(u: ScalarField, spec: ProblemSpec, sp: StagnationPoint, path,
              profile=None, size: int = 640) -> None:
    """Grayscale contour of u, the free-boundary polyline, and (when a
    profile is given) the predicted cone edges."""
    g = u.grid
    sub = _downsample(u.values)
    step = max(1, int(math.ceil(max(u.values.shape) / 128)))
    vmax = float(u.values.max()) or 1.0
    ext = g.extent
    sx = size / (ext.x_max - ext.x_min)
    sy = size / (ext.y_max - ext.y_min)

    def to_px(x, y):
        return ((x - ext.x_min) * sx, (ext.y_max - y) * sy)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f'<rect width="{size}" height="{size}" fill="white"/>']
    cell_w = g.spacing * step * sx
    cell_h = g.spacing * step * sy
    for j in range(sub.shape[0]):
        for i in range(sub.shape[1]):
            val = sub[j, i]
            if val <= 0:
                continue
            shade = 255 - int(170 * min(val / vmax, 1.0))
            x, y = to_px(ext.x_min + i * step * g.spacing,
                         ext.y_min + j * step * g.spacing)
            parts.append(f'<rect x="{x - cell_w / 2:.2f}" y="{y - cell_h / 2:.2f}" '
                         f'width="{cell_w:.2f}" height="{cell_h:.2f}" '
                         f'fill="rgb({shade},{shade},255)"/>')
    level = 1e-6 * vmax
    for (p1, p2) in _marching_segments(u.values, g, level):
        a, b = to_px(*p1), to_px(*p2)
        parts.append(f'<line x1="{a[0]:.2f}" y1="{a[1]:.2f}" x2="{b[0]:.2f}" '
                     f'y2="{b[1]:.2f}" stroke="black" stroke-width="1"/>')
    if profile is not None:
        x0, y0 = sp.location
        L = 0.9 * sp.delta * 2
        for th in (profile.theta1, profile.theta2):
            a = to_px(x0, y0)
            b = to_px(x0 + L * math.cos(th), y0 + L * math.sin(th))
            parts.append(f'<line x1="{a[0]:.2f}" y1="{a[1]:.2f}" x2="{b[0]:.2f}" '
                         f'y2="{b[1]:.2f}" stroke="red" stroke-width="1.5" '
                         f'stroke-dasharray="6,4"/>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="ascii")


# ---------------------------------------------------------------------------
# orchestration

def run(cfg: PipelineConfig, stages=("solve", "analyze", "classify", "table1"),
        oracle_only: bool = False) -> dict:
    """Execute the requested stages; returns a manifest of written files."""
    outdir = Path(cfg.outputs.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest: dict = {"outputs": {}}
    fmts = cfg.outputs.formats
    spec = cfg.problem

    if oracle_only:
        stages = ("table1",)

    if "table1" in stages and "csv" in fmts:
        p = outdir / "table1.csv"
        write_table1(spec.alpha, spec.beta, p,
                     pair_theta1=cfg.boundary.pair_theta1)
        manifest["outputs"]["table1"] = p.name

    solution = None
    profile = None
    if "solve" in stages:
        result, profile = run_solve(cfg)
        solution = result.field
        p = outdir / "solution.field"
        save_field(solution, p, spec=spec)
        manifest["outputs"]["solution"] = p.name
        manifest["solver"] = {
            "converged": result.converged,
            "iterations": result.iterations,
            "final_energy": result.energies[-1],
            "message": result.message,
        }

    needs_analysis = {"analyze", "classify"} & set(stages)
    if needs_analysis and solution is None:
        p = outdir / "solution.field"
        if not p.exists():
            raise AnalysisError("no solution field available; run solve first")
        from .domain import load_field
        solution, _ = load_field(p)
        try:
            profile = oracle.blowup_limit(spec) \
                if not isinstance(spec.stag, Type3) else None
        except Exception:
            profile = None

    sp = None
    density = None
    if needs_analysis:
        sp, wp, fp, br = run_analysis(cfg, solution)
        if "analyze" in stages:
            if wp is not None and "csv" in fmts:
                p = outdir / "weiss.csv"
                wp.to_csv(p)
                manifest["outputs"]["weiss"] = p.name
            if fp is not None and "csv" in fmts:
                p = outdir / "frequency.csv"
                fp.to_csv(p)
                manifest["outputs"]["frequency"] = p.name
            if br is not None:
                rescale_names = []
                for k, f in enumerate(br.rescaled_fields):
                    q = outdir / f"rescale_{k}.field"
                    save_field(f, q)
                    rescale_names.append(q.name)
                if "json" in fmts:
                    p = outdir / "blowup.json"
                    _json_dump({
                        "config": cfg.raw,
                        "radii_used": br.radii_used,
                        "successive_distance": br.successive_distance,
                        "homogeneity_residual": br.homogeneity_residual,
                        "density_estimate": br.density_estimate,
                        "directions": list(br.directions) if br.directions else None,
                        "opening": (br.directions[1] - br.directions[0])
                        if br.directions else None,
                        "disconnected": br.direction_report.disconnected
                        if br.direction_report else None,
                        "rescaled_fields": rescale_names,
                    }, p)
                    manifest["outputs"]["blowup"] = p.name
        if br is not None:
            density = br.density_estimate
    if "classify" in stages:
        if density is None:
            sp = sp or stagnation_point(spec, cfg.analysis.delta)
            r_dens = cfg.analysis.density_radius or (
                cfg.analysis.blowup_radii[-1] if cfg.analysis.blowup_radii
                else 0.5 * sp.delta)
            density = bw.estimate_density(spec, solution, sp, r_dens)
        report = run_classify(cfg, sp, density)
        if "json" in fmts:
            p = outdir / "classification.json"
            _json_dump({"config": cfg.raw, **asdict(report)}, p)
            manifest["outputs"]["classification"] = p.name
        manifest["classification"] = report.verdict
    if "solve" in stages and "svg" in fmts and solution is not None:
        p = outdir / "solution.svg"
        write_svg(solution, spec, sp or stagnation_point(spec, cfg.analysis.delta),
                  p, profile=profile)
        manifest["outputs"]["svg"] = p.name
    return manifest


def write_error_record(outdir, stage: str, exc: Exception) -> None:
    try:
        Path(outdir).mkdir(parents=True, exist_ok=True)
        _json_dump({"stage": stage, "error": type(exc).__name__,
                    "message": str(exc)}, Path(outdir) / "error.json")
    except OSError:
        pass
