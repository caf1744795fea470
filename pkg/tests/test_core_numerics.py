"""
Tests for grids, sampled functions and monotone-map algebra
"""

import numpy as np
import pytest

from src.core_numerics import (
    HalfPlaneGrid,
    LineGrid,
    MonotoneBoundaryMap,
    SampledLineFunction,
    compose_maps,
    identity_map,
    integrate_line,
    invert_monotone,
    make_half_plane_grid,
    make_line_grid,
)
from src.errors import DomainError, InvariantViolation, ParameterError


class TestLineGrid:
    """Test cases for line grids"""

    def test_uniform_grid(self):
        """Uniform grids are symmetric with the requested node count"""
        grid = make_line_grid(8.0, 2049)
        assert grid.n == 2049
        assert grid.is_uniform
        assert grid.nodes[0] == -8.0 and grid.nodes[-1] == 8.0
        assert np.array_equal(grid.nodes, -grid.nodes[::-1])
        assert abs(grid.trapezoid_weights().sum() - 16.0) < 1e-12

    def test_graded_grid_clusters_at_origin(self):
        """Graded grids are finer near 0 than near the ends"""
        grid = make_line_grid(8.0, 513, "graded")
        steps = grid.spacing
        assert not grid.is_uniform
        assert steps[256] < steps[0]

    def test_too_few_nodes(self):
        """Grids below the node minimum are rejected"""
        with pytest.raises(ValueError):
            make_line_grid(8.0, 8)

    def test_asymmetric_nodes_rejected(self):
        """Nodes must be symmetric about the origin"""
        with pytest.raises(InvariantViolation):
            LineGrid(np.linspace(-1.0, 2.0, 33), 2.0)

    def test_unknown_profile(self):
        with pytest.raises(ParameterError):
            make_line_grid(8.0, 257, "chebyshev")


class TestSampledLineFunction:
    """Test cases for sampled functions"""

    def test_constant_tails(self):
        """Evaluation beyond the window returns the end values"""
        grid = make_line_grid(4.0, 257)
        f = SampledLineFunction.from_callable(grid, lambda x: np.tanh(x))
        assert f(10.0) == pytest.approx(np.tanh(4.0))
        assert f(-10.0) == pytest.approx(np.tanh(-4.0))

    def test_complex_evaluation(self):
        grid = make_line_grid(4.0, 257)
        f = SampledLineFunction(grid, np.exp(1j * grid.nodes))
        assert not f.is_real
        assert abs(f(0.0) - 1.0) < 1e-12

    def test_non_finite_rejected(self):
        grid = make_line_grid(4.0, 65)
        values = np.zeros(65)
        values[3] = np.nan
        with pytest.raises(InvariantViolation):
            SampledLineFunction(grid, values)


class TestHalfPlaneGrid:
    """Test cases for dyadic half-plane grids"""

    def test_dyadic_levels(self):
        grid = make_half_plane_grid(make_line_grid(4.0, 257), 8, 2.0)
        assert grid.shape == (8, 257)
        assert np.allclose(grid.levels, 2.0 * 2.0 ** -np.arange(8))
        assert np.all(grid.points.imag > 0)

    def test_lower_orientation(self):
        grid = make_half_plane_grid(make_line_grid(4.0, 257), 8, 2.0, "lower")
        assert np.all(grid.points.imag < 0)
        assert grid.reflected().orientation == "upper"

    def test_too_few_levels(self):
        with pytest.raises(ValueError):
            make_half_plane_grid(make_line_grid(4.0, 257), 4)

    def test_levels_must_be_geometric(self):
        with pytest.raises(InvariantViolation):
            HalfPlaneGrid(make_line_grid(4.0, 257), np.array([2.0, 1.0, 0.7, 0.3, 0.2, 0.1]))


class TestIntegration:
    """Test cases for line integrals"""

    def test_polynomial(self):
        """int_0^1 x^2 dx on a fine grid"""
        grid = make_line_grid(8.0, 2049)
        f = SampledLineFunction.from_callable(grid, lambda x: x ** 2)
        assert integrate_line(f, 0.0, 1.0) == pytest.approx(1.0 / 3.0, abs=5e-5)

    def test_reversed_limits(self):
        grid = make_line_grid(8.0, 2049)
        f = SampledLineFunction.from_callable(grid, lambda x: np.cos(x))
        assert integrate_line(f, 1.0, -1.0) == pytest.approx(-integrate_line(f, -1.0, 1.0))

    def test_linearity(self):
        grid = make_line_grid(8.0, 1025)
        f = SampledLineFunction.from_callable(grid, np.sin)
        g = SampledLineFunction.from_callable(grid, lambda x: x ** 3 - x)
        combo = SampledLineFunction(grid, 2.0 * f.values - 0.7 * g.values)
        expected = 2.0 * integrate_line(f, -1.3, 2.2) - 0.7 * integrate_line(g, -1.3, 2.2)
        assert integrate_line(combo, -1.3, 2.2) == pytest.approx(expected, rel=1e-12)

    def test_second_order_convergence(self):
        """Trapezoid error on int_{-1}^{3} x^2 dx shrinks by about 4 per halving"""
        errors = []
        for n in (129, 257, 513):
            f = SampledLineFunction.from_callable(make_line_grid(8.0, n), lambda x: x ** 2)
            errors.append(abs(integrate_line(f, -1.0, 3.0) - 28.0 / 3.0))
        orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
        assert np.all(orders >= 1.8)

    def test_outside_grid(self):
        grid = make_line_grid(2.0, 129)
        f = SampledLineFunction(grid, np.zeros(129))
        with pytest.raises(DomainError):
            integrate_line(f, -1.0, 3.0)


class TestMonotoneMaps:
    """Test cases for inversion and composition"""

    def test_identity_inverse(self):
        grid = make_line_grid(8.0, 1025)
        inv = invert_monotone(identity_map(grid))
        assert np.allclose(inv.values, grid.nodes, atol=1e-12)

    def test_compose_with_inverse(self):
        """h o h^-1 is the identity up to interpolation error"""
        grid = make_line_grid(8.0, 2049)
        h = MonotoneBoundaryMap(grid, grid.nodes + 0.3 * np.tanh(grid.nodes))
        roundtrip = compose_maps(h, invert_monotone(h))
        assert np.max(np.abs(roundtrip.values - roundtrip.grid.nodes)) < 1e-4

    def test_affine_extrapolation(self):
        grid = make_line_grid(2.0, 65)
        h = MonotoneBoundaryMap(grid, 2.0 * grid.nodes)
        assert h(5.0) == pytest.approx(10.0)

    def test_not_increasing(self):
        grid = make_line_grid(2.0, 65)
        with pytest.raises(InvariantViolation):
            MonotoneBoundaryMap(grid, -grid.nodes)

    def test_compose_with_inverse_is_exact(self):
        """The piecewise-linear inverse undoes h at every inverse node"""
        grid = make_line_grid(8.0, 1025)
        h = MonotoneBoundaryMap(grid, grid.nodes + 0.3 * np.tanh(grid.nodes))
        roundtrip = compose_maps(h, invert_monotone(h))
        assert np.max(np.abs(roundtrip.values - roundtrip.grid.nodes)) < 1e-12

    def test_double_inverse(self):
        grid = make_line_grid(8.0, 4097)
        h = MonotoneBoundaryMap(grid, grid.nodes + 0.1 * np.tanh(grid.nodes))
        back = invert_monotone(invert_monotone(h))
        x = grid.nodes[np.abs(grid.nodes) <= 6]
        assert np.max(np.abs(back(x) - h(x))) < 1e-6
