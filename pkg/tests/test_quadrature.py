import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import cornerwave as cw
from cornerwave.quadrature import (DiskStencil, cell_disk_overlap,
                                   circle_integral_u2, grad_central,
                                   laplacian5, require_circle_inside)


def unit_grid(n=257):
    return cw.GridSpec(nx=n, ny=n, origin=(-1.0, -1.0), spacing=2.0 / (n - 1))


class TestCellOverlap:
    @given(cx=st.floats(-1.2, 1.2), cy=st.floats(-1.2, 1.2),
           r=st.floats(0.3, 1.0))
    @settings(max_examples=40, deadline=None)
    def test_against_dense_subsampling(self, cx, cy, r):
        half = 0.02
        exact = float(cell_disk_overlap(np.array([cx]), np.array([cy]), half, r)[0])
        m = 400
        xs = cx - half + (np.arange(m) + 0.5) * (2 * half / m)
        ys = cy - half + (np.arange(m) + 0.5) * (2 * half / m)
        XX, YY = np.meshgrid(xs, ys)
        brute = np.mean(XX ** 2 + YY ** 2 <= r * r) * (2 * half) ** 2
        assert exact == pytest.approx(brute, abs=4 * (2 * half) ** 2 / m)

    def test_full_and_empty_cells(self):
        assert cell_disk_overlap(np.array([0.0]), np.array([0.0]), 0.01, 1.0)[0] \
            == pytest.approx(4e-4, rel=1e-12)
        assert cell_disk_overlap(np.array([5.0]), np.array([0.0]), 0.01, 1.0)[0] == 0.0


class TestDiskStencil:
    @pytest.mark.parametrize("r", [0.1, 1.0 / 3.0, 0.77])
    def test_total_weight_is_disk_area(self, r):
        d = DiskStencil(unit_grid(), (0.05, -0.02), r)
        assert d.area == pytest.approx(math.pi * r * r, abs=1e-12)

    def test_polynomial_integral(self):
        # integral of x^2 over B_r(0) = pi r^4 / 4
        g = unit_grid(513)
        X, Y = g.mesh()
        d = DiskStencil(g, (0.0, 0.0), 0.6)
        exact = math.pi * 0.6 ** 4 / 4
        # midpoint rule: O(h^2) with h = 1/256
        assert d.integrate(X * X) == pytest.approx(exact, rel=5e-5)

    def test_discontinuous_integrand(self):
        # integral of (y_-) over the lower half of B_r: r^3 * 2/3
        g = unit_grid(513)
        _, Y = g.mesh()
        d = DiskStencil(g, (0.0, 0.0), 0.5)
        exact = 2.0 / 3.0 * 0.5 ** 3
        assert d.integrate(np.maximum(-Y, 0.0)) == pytest.approx(exact, rel=1e-5)


class TestCircleIntegral:
    def test_exact_on_polynomial(self):
        # u = x on the circle of radius r: integral of u^2 = pi r^3
        g = unit_grid(257)
        X, _ = g.mesh()
        val = circle_integral_u2(X, g, (0.0, 0.0), 0.5)
        assert val == pytest.approx(math.pi * 0.5 ** 3, rel=1e-4)

    def test_out_of_range(self):
        g = unit_grid(64)
        with pytest.raises(cw.RadiusOutOfRange):
            require_circle_inside(g, (0.9, 0.0), 0.5)


class TestStencils:
    def test_gradient_exact_on_linear(self):
        g = unit_grid(64)
        X, Y = g.mesh()
        ux, uy = grad_central(2 * X - 3 * Y, g.spacing)
        assert np.allclose(ux, 2.0) and np.allclose(uy, -3.0)

    def test_laplacian_exact_on_quadratic(self):
        g = unit_grid(64)
        X, Y = g.mesh()
        lap = laplacian5(X * X + Y * Y, g.spacing)
        assert np.allclose(lap[1:-1, 1:-1], 4.0)
