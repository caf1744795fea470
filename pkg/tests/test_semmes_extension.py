"""
Tests for mollifier kernels, R_y and the explicit extensions
"""

import numpy as np
import pytest
from scipy.integrate import quad

from src.constants import EXT_BASE_K, LEMMA31_BRACKET
from src.core_numerics import SampledLineFunction, make_half_plane_grid, make_line_grid
from src.curve_synthesis import as_angle
from src.errors import ParameterError
from src.fixtures import sampled, suite_member
from src.function_spaces import h12_seminorm
from src.semmes_extension import (
    ALPHA,
    PHI,
    PSI_HALF,
    PSI_ODD,
    KernelSpec,
    beltrami_of_field,
    convolve_scaled,
    extension_base,
    extension_general,
    kernel_eval,
    kernel_tables,
    lemma31_ratios,
    ry_operator,
    tau_bilipschitz,
)


@pytest.fixture(scope="module")
def line():
    return make_line_grid(8.0, 513)


@pytest.fixture(scope="module")
def upper(line):
    return make_half_plane_grid(line, 6, 2.0)


class TestKernels:
    """Test cases for the mollifier family"""

    def test_phi_unit_mass(self):
        mass, _ = quad(lambda t: float(kernel_eval(PHI, t)), -1, 1, epsabs=1e-13)
        assert mass == pytest.approx(1.0, abs=1e-8)

    def test_psi_odd_moments(self):
        mass, _ = quad(lambda t: float(kernel_eval(PSI_ODD, t)), -1, 1, epsabs=1e-13)
        first, _ = quad(lambda t: t * float(kernel_eval(PSI_ODD, t)), -1, 1, epsabs=1e-13)
        assert mass == pytest.approx(0.0, abs=1e-10)
        assert first == pytest.approx(1.0, abs=1e-8)

    def test_psi_half_first_moment(self):
        re, _ = quad(lambda t: t * float(np.real(kernel_eval(PSI_HALF, t))), -1, 1, epsabs=1e-13)
        assert re == pytest.approx(PSI_HALF.moments[1], abs=1e-8)

    def test_support(self):
        for spec in (PHI, PSI_ODD, ALPHA):
            assert np.all(kernel_eval(spec, np.array([-1.5, -1.0, 1.0, 2.0])) == 0)

    def test_tables_moments(self):
        t = kernel_tables()
        assert t.phi.sum() == pytest.approx(1.0, abs=1e-14)
        assert np.sum(t.psi * t.r) == pytest.approx(1.0, abs=1e-14)

    def test_unknown_kernel(self):
        with pytest.raises(ParameterError):
            KernelSpec("gauss")


class TestConvolution:
    """Test cases for scaled convolutions and R_y"""

    def test_phi_preserves_linear(self, line):
        w = SampledLineFunction(line, line.nodes.copy())
        x = np.array([-1.0, 0.0, 2.5])
        assert np.allclose(convolve_scaled(PHI, 0.5, w, x), x, atol=1e-12)

    def test_zero_scale(self, line):
        w = SampledLineFunction(line, np.zeros(line.n))
        with pytest.raises(ParameterError):
            convolve_scaled(PHI, 0.0, w, [0.0])

    def test_ry_reduces_to_convolution(self, line):
        """R_y(w) = phi_y * w when b = 0"""
        b = as_angle(SampledLineFunction(line, np.zeros(line.n)))
        w = sampled(line, "bump", 0.4)
        x = np.linspace(-3, 3, 13)
        assert np.allclose(ry_operator(b, 0.7, w, x), convolve_scaled(PHI, 0.7, w, x), atol=1e-12)

    def test_lemma31_bracket(self, line):
        b = as_angle(suite_member(line, "bump_0.3"))
        u = sampled(line, "bump", 0.05)
        ratios = lemma31_ratios(b, u, np.linspace(-4, 4, 20), np.geomspace(0.05, 2.0, 20))
        lo, hi = LEMMA31_BRACKET
        assert ratios.min() >= lo and ratios.max() <= hi


class TestExtensions:
    """Test cases for the base and general extensions"""

    def test_base_identity(self, line, upper):
        ext = extension_base(SampledLineFunction(line, np.zeros(line.n)), upper)
        assert np.max(np.abs(ext.rho.values - upper.points)) < 1e-10
        mu = beltrami_of_field(ext)
        assert mu.sup < 1e-10

    def test_base_bump_is_quasiconformal(self, line, upper):
        u = suite_member(line, "bump_0.1")
        mu = beltrami_of_field(extension_base(u, upper))
        assert 0.0 < mu.sup < 1.0
        assert mu.sup <= EXT_BASE_K * h12_seminorm(u).value
        assert np.isfinite(mu.norms["wp"].energy)

    def test_lower_half_plane_conjugation(self, line, upper):
        """mu_lower[u](conj z) = conj(mu_upper[-u](z))"""
        u = suite_member(line, "bump_0.1")
        lower = upper.reflected()
        mu_lower = beltrami_of_field(extension_base(u, lower)).values
        mu_upper = beltrami_of_field(extension_base(u.with_values(-u.values), upper)).values
        assert np.max(np.abs(mu_lower - np.conj(mu_upper))) < 1e-12

    def test_tau_certificate(self, line, upper):
        tau = tau_bilipschitz(as_angle(SampledLineFunction(line, np.zeros(line.n))), upper)
        assert tau.certificate["min_ratio"] == pytest.approx(1.0, abs=1e-8)
        assert tau.certificate["max_ratio"] == pytest.approx(1.0, abs=1e-8)

    def test_general_at_zero_is_tau(self, line, upper):
        """u = 0 reproduces tau"""
        b = as_angle(suite_member(line, "bump_0.1"))
        tau = tau_bilipschitz(b, upper)
        ext = extension_general(b, SampledLineFunction(line, np.zeros(line.n)), tau, upper)
        assert np.max(np.abs(ext.rho.values - tau.rho.values)) < 1e-10

    def test_general_small_perturbation(self, line, upper):
        b = as_angle(suite_member(line, "bump_0.1"))
        tau = tau_bilipschitz(b, upper)
        ext = extension_general(b, sampled(line, "bump", 0.05), tau, upper)
        assert beltrami_of_field(ext).sup < 1.0

    def test_general_rejects_foreign_grid(self, line, upper):
        b = as_angle(suite_member(line, "bump_0.1"))
        tau = tau_bilipschitz(b, upper)
        other = make_half_plane_grid(line, 7, 2.0)
        with pytest.raises(ParameterError):
            extension_general(b, SampledLineFunction(line, np.zeros(line.n)), tau, other)
