"""Shared fixtures: the heavyweight solver runs are executed once per
session and reused by the module tests and the acceptance suite."""

import math
import time
from dataclasses import dataclass

import numpy as np
import pytest

import cornerwave as cw
from cornerwave.oracle import AnglePair, blowup_limit, evaluate_at_points


@dataclass
class SolvedCase:
    spec: cw.ProblemSpec
    profile: object
    grid: cw.GridSpec
    boundary: np.ndarray
    result: object
    sp: cw.StagnationPoint
    wall_time: float


def _solve_case(spec, n, pair=None, params=None):
    profile = blowup_limit(spec, pair) if pair is not None else blowup_limit(spec)
    grid = cw.GridSpec.from_domain(spec.domain, n, n)
    X, Y = grid.mesh()
    bd = np.asarray(evaluate_at_points(profile, X, Y, spec.stagnation_location))
    t0 = time.monotonic()
    result = cw.minimize_energy(spec, grid, bd, params or cw.SolverParams())
    wall = time.monotonic() - t0
    return SolvedCase(spec=spec, profile=profile, grid=grid, boundary=bd,
                      result=result, sp=cw.stagnation_point(spec), wall_time=wall)


@pytest.fixture(scope="session")
def stokes_case():
    """Gravity-type corner: alpha=0, beta=1, subcase 1.1, 257^2 grid."""
    spec = cw.ProblemSpec(alpha=0.0, beta=1.0, stag=cw.Type1(x0=-1.0),
                          domain=cw.Rect(-2.0, -1.0, 0.0, 1.0))
    return _solve_case(spec, 257)


@pytest.fixture(scope="session")
def beta2_case():
    """90-degree corner in y: alpha=0, beta=2, subcase 1.1."""
    spec = cw.ProblemSpec(alpha=0.0, beta=2.0, stag=cw.Type1(x0=-1.0),
                          domain=cw.Rect(-2.0, -1.0, 0.0, 1.0))
    return _solve_case(spec, 257)


@pytest.fixture(scope="session")
def alpha2_case():
    """90-degree corner in x: alpha=2, beta=0, subcase 2.2."""
    spec = cw.ProblemSpec(alpha=2.0, beta=0.0, stag=cw.Type2(y0=1.0, theta0=0.0),
                          domain=cw.Rect(-1.0, 0.0, 1.0, 2.0))
    return _solve_case(spec, 257)


@pytest.fixture(scope="session")
def type3_case():
    """72-degree doubly degenerate corner: alpha=2, beta=1, seeded with the
    downward axis-symmetric angle pair."""
    A = 2 * math.pi / 5.0
    t1 = -math.pi / 2.0 - A / 2.0
    pair = AnglePair(theta1=t1, theta2=t1 + A, symmetric=True)
    spec = cw.ProblemSpec(alpha=2.0, beta=1.0, stag=cw.Type3(),
                          domain=cw.Rect(-1.0, -1.0, 1.0, 1.0))
    return _solve_case(spec, 257, pair=pair)


@pytest.fixture(scope="session")
def blowup_case():
    """Blow-up convergence run: alpha=1 makes the weight vary across the
    window, so the minimizer carries genuinely decaying inhomogeneity."""
    spec = cw.ProblemSpec(alpha=1.0, beta=1.0, stag=cw.Type1(x0=-1.0),
                          domain=cw.Rect(-2.0, -1.0, 0.0, 1.0))
    return _solve_case(spec, 385)
