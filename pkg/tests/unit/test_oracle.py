"""Tests for the manufactured solutions and the quadrature references."""

import numpy as np
import pytest

from mcpinns.errors import ContractViolation, DomainError
from mcpinns.oracle import (
    ManufacturedField,
    QuadSpec,
    build_radial_table,
    caputo_exp_decay,
    exact_solution_ade,
    exact_solution_laplacian,
    exp_decay,
    forcing_laplacian,
    monomial_caputo,
    profile_gradient,
    quad_caputo,
    quad_frac_laplacian,
)


def profile(d, alpha):
    return lambda p: float(exact_solution_laplacian(np.asarray(p), d, alpha))


class TestManufactured:
    """Test the closed-form solutions."""

    def test_vanishes_outside_ball(self):
        x = np.array([[1.0, 0.0], [0.8, 0.8], [2.0, -3.0]])
        np.testing.assert_array_equal(exact_solution_laplacian(x, 2, 1.5), np.zeros(3))

    def test_centre_value_and_forcing(self):
        assert float(exact_solution_laplacian(np.zeros(3), 3, 1.0)) == 1.0
        # 2^alpha Gamma(alpha/2 + 2) Gamma((alpha + d)/2) / Gamma(d/2) at alpha = d = 2 is 4 * 2 * 1.
        assert float(forcing_laplacian(np.zeros(2), 2, 1.999999)) == pytest.approx(8.0, rel=1e-5)

    def test_forcing_at_alpha_two_limit_is_minus_laplacian(self):
        """Test that alpha near 2 recovers -Delta of (1 - |x|^2)^2."""
        x = np.array([0.3, -0.2])
        r2 = float(x @ x)
        minus_laplacian = 8.0 * (1.0 - 2.0 * r2)
        assert float(forcing_laplacian(x, 2, 1.999999)) == pytest.approx(minus_laplacian, rel=1e-5)

    def test_field_matches_exact_solution(self, interior_points):
        field = ManufacturedField(1.2)
        np.testing.assert_allclose(field(interior_points), exact_solution_laplacian(interior_points, 2, 1.2))

    def test_time_dependent_field(self, interior_points):
        field = ManufacturedField(0.8, time_dependent=True)
        t = np.full((6, 1), 0.4)
        np.testing.assert_allclose(field(interior_points, t), exact_solution_ade(interior_points, 0.4, 0.8))

    def test_tangent_is_gradient(self, interior_points):
        direction = np.array([0.2, 0.7])
        _, tangent = ManufacturedField(1.3).with_tangent(interior_points, None, direction)
        np.testing.assert_allclose(tangent, profile_gradient(interior_points, 1.3) @ direction)

    def test_caputo_of_exponential_at_gamma_zero_limit(self):
        """Test that gamma near 0 gives back e^(-t) - 1."""
        assert caputo_exp_decay(1.0, 1e-9) == pytest.approx(np.exp(-1.0) - 1.0, rel=1e-6)

    def test_monomial_caputo(self):
        assert monomial_caputo(2.0, 1, 0.5) == pytest.approx(2.0 * np.sqrt(2.0 / np.pi))

    @pytest.mark.parametrize("alpha", [0.0, 2.0])
    def test_alpha_domain(self, alpha):
        with pytest.raises(DomainError):
            ManufacturedField(alpha)

    def test_unknown_profile(self):
        with pytest.raises(ContractViolation):
            ManufacturedField(1.0, profile="gaussian")


class TestQuadrature:
    """Test the adaptive-quadrature references."""

    @pytest.mark.parametrize("point, alpha", [([0.0], 1.0), ([0.4], 1.5), ([-0.7], 0.5)])
    def test_frac_laplacian_one_dimension(self, point, alpha):
        x = np.array(point)
        assert quad_frac_laplacian(profile(1, alpha), x, alpha) == pytest.approx(
            float(forcing_laplacian(x, 1, alpha)), rel=1e-6, abs=1e-7
        )

    @pytest.mark.slow
    @pytest.mark.parametrize("point, alpha", [([0.0, 0.0], 1.5), ([0.3, -0.2], 1.0)])
    def test_frac_laplacian_two_dimensions(self, point, alpha):
        x = np.array(point)
        assert quad_frac_laplacian(profile(2, alpha), x, alpha) == pytest.approx(
            float(forcing_laplacian(x, 2, alpha)), rel=1e-5
        )

    @pytest.mark.parametrize("k, t, gamma_order", [(1, 0.7, 0.4), (2, 1.3, 0.25), (3, 0.5, 0.9)])
    def test_caputo_of_monomials(self, k, t, gamma_order):
        assert quad_caputo(lambda s: s**k, t, gamma_order) == pytest.approx(
            monomial_caputo(t, k, gamma_order), rel=1e-6
        )

    def test_caputo_of_exponential(self):
        assert quad_caputo(lambda s: float(exp_decay(s)), 1.0, 0.5) == pytest.approx(
            caputo_exp_decay(1.0, 0.5), rel=1e-6
        )

    def test_high_dimension_is_rejected(self):
        with pytest.raises(ContractViolation):
            quad_frac_laplacian(profile(4, 1.0), np.zeros(4), 1.0)

    def test_point_outside_ball(self):
        with pytest.raises(DomainError):
            quad_frac_laplacian(profile(1, 1.0), np.array([1.5]), 1.0)

    @pytest.mark.parametrize("t, gamma_order", [(0.0, 0.5), (1.0, 1.0)])
    def test_caputo_domain(self, t, gamma_order):
        with pytest.raises(DomainError):
            quad_caputo(lambda s: s, t, gamma_order)

    def test_spec_validation(self):
        with pytest.raises(DomainError):
            QuadSpec(abs_tol=0.0)

    def test_radial_table_interpolates_forcing(self):
        table = build_radial_table(profile(1, 1.2), 1, 1.2, n_radii=9)
        x = np.array([[0.1], [0.45], [0.8]])
        np.testing.assert_allclose(table(x), forcing_laplacian(x, 1, 1.2), rtol=1e-5)
