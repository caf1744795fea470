"""
Tests for curve synthesis from tangent angles
"""

import numpy as np
import pytest

from src.core_numerics import SampledLineFunction, make_line_grid
from src.curve_synthesis import (
    CurveSamples,
    as_angle,
    chord_arc_constant,
    chord_arc_profile,
    curve_from_angle,
    gamma_u,
    is_jordan,
    normalize_curve,
    reflect_J,
    tangent_angle_from_curve,
)
from src.errors import DegenerateChordError, InvariantViolation, RangeError
from src.fixtures import suite_member


def _angle(name, L=8.0, N=1025):
    return as_angle(suite_member(make_line_grid(L, N), name))


class TestGammaU:
    """Test cases for gamma_u and curve_from_angle"""

    def test_zero_angle_is_the_line(self):
        grid = make_line_grid(8.0, 1025)
        _, curve = gamma_u(SampledLineFunction(grid, np.zeros(grid.n)))
        assert np.max(np.abs(curve.points - grid.nodes)) < 1e-12
        assert curve.is_unit_speed()

    def test_reflection_symmetry(self):
        """J(z_b) = z_{-b}"""
        b = _angle("bump_0.3")
        assert np.max(np.abs(reflect_J(curve_from_angle(b)).points - curve_from_angle(-b).points)) < 1e-14

    def test_constant_angle_rotates(self):
        grid = make_line_grid(4.0, 513)
        c = curve_from_angle(as_angle(SampledLineFunction(grid, np.full(grid.n, 0.7))))
        assert np.allclose(c.points, np.exp(0.7j) * grid.nodes, atol=1e-12)

    def test_tags_must_increase(self):
        with pytest.raises(InvariantViolation):
            CurveSamples(np.zeros(4, dtype=complex), np.array([0.0, 1.0, 1.0, 2.0]))


class TestTangentAngle:
    """Test cases for tangent-angle recovery"""

    def test_recovers_bump(self):
        b = _angle("bump_0.3", N=2049)
        recovered = tangent_angle_from_curve(curve_from_angle(b))
        assert np.max(np.abs(recovered.b.values - b.b.values)) < 1e-3

    def test_duplicate_points(self):
        pts = np.array([0.0, 1.0, 1.0, 2.0], dtype=complex)
        with pytest.raises(DegenerateChordError):
            tangent_angle_from_curve(CurveSamples(pts, np.array([-1.0, 0.0, 1.0, 2.0])))

    def test_negation(self):
        b = _angle("two_bump_0.3")
        assert np.array_equal((-b).b.values, -b.b.values)

    def test_one_sided_arc_lengths(self):
        """Arc lengths that never reach s = 0 leave no symmetric window"""
        s = np.linspace(0.5, 4.0, 64)
        with pytest.raises(RangeError):
            tangent_angle_from_curve(CurveSamples(s.astype(complex), s))

    def test_asymmetric_window_is_trimmed(self):
        s = np.linspace(-2.0, 4.0, 193)
        b = tangent_angle_from_curve(CurveSamples(np.exp(0.2j) * s, s))
        assert b.grid.half_extent == pytest.approx(2.0)
        assert np.allclose(b.b.values, 0.2, atol=1e-12)


class TestChordArc:
    """Test cases for the chord-arc constant"""

    def test_line_is_zero(self):
        c = curve_from_angle(_angle("zero", N=513))
        assert chord_arc_constant(c) == pytest.approx(0.0, abs=1e-12)

    def test_bump_is_positive(self):
        k = chord_arc_constant(curve_from_angle(_angle("bump_0.3", N=513)))
        assert 0.0 < k < 1.0

    def test_stratified_matches_full(self):
        c = curve_from_angle(_angle("bump_0.3", N=513))
        full = chord_arc_constant(c)
        sampled = chord_arc_constant(c, pair_budget=20_000, seed=3)
        assert abs(sampled - full) <= 0.02 * full + 1e-6

    def test_too_few_samples(self):
        c = CurveSamples(np.arange(10, dtype=complex), np.arange(10, dtype=float))
        with pytest.raises(ValueError):
            chord_arc_constant(c)

    def test_profile_sorted_by_norm(self):
        grid = make_line_grid(8.0, 513)
        angles = {name: as_angle(suite_member(grid, name)) for name in ("bump_0.3", "zero", "bump_0.1")}
        rows = chord_arc_profile(angles)
        assert [r[0] for r in rows] == ["zero", "bump_0.1", "bump_0.3"]
        assert rows[0][2] <= rows[1][2] <= rows[2][2]


class TestNormalization:
    """Test cases for normalization and the Jordan check"""

    def test_normalized_endpoints(self):
        c = normalize_curve(curve_from_angle(_angle("bump_0.3")))
        assert abs(c.at(0.0)) < 1e-12
        z1 = c.at(1.0)
        assert abs(z1.imag) < 1e-12 and z1.real > 0
        assert c.normalized

    def test_similarity_invariance(self):
        """Curves differing by a similarity normalize to the same samples"""
        c = curve_from_angle(_angle("bump_0.3"))
        a1 = CurveSamples(2.5 * np.exp(0.4j) * c.points + (1 - 2j), c.arc_lengths)
        a2 = CurveSamples(0.4 * np.exp(-1.1j) * c.points + 3j, c.arc_lengths)
        n1, n2 = normalize_curve(a1), normalize_curve(a2)
        assert np.max(np.abs(n1.points - n2.points)) < 1e-9
        assert n1.gauge["scale"] == pytest.approx(2.5 / 0.4 * n2.gauge["scale"], rel=1e-9)

    def test_line_is_jordan(self):
        assert is_jordan(curve_from_angle(_angle("bump_0.3", N=513)))

    def test_crossing_polyline(self):
        pts = np.array([0.0, 2.0, 2.0 + 1.0j, 1.0 - 1.0j, 3.0 - 1.0j])
        assert not is_jordan(CurveSamples(pts, np.arange(5, dtype=float)))
