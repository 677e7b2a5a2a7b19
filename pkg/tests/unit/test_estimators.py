"""Tests for the Monte Carlo fractional operators."""

import math

import numpy as np
import pytest

from mcpinns.autodiff import tape
from mcpinns.core.rng import RngKey
from mcpinns.core.special import frac_constants
from mcpinns.errors import ContractViolation, DomainError
from mcpinns.operators.estimators import (
    EstimatorConfig,
    PdeCoefficients,
    draw_sample_group,
    frac_laplacian_constant,
    mc_caputo,
    mc_frac_laplacian,
    residual_estimate,
)
from mcpinns.oracle.manufactured import (
    ConstantField,
    ManufacturedField,
    caputo_exp_decay,
    forcing_ade,
    forcing_laplacian,
)


def assert_unbiased(estimates, reference, sigmas=4.0):
    estimates = np.asarray(tape.value_of(estimates))
    stderr = estimates.std(ddof=1) / math.sqrt(estimates.size)
    assert abs(estimates.mean() - reference) <= sigmas * stderr, (
        f"mean {estimates.mean()} vs reference {reference} (stderr {stderr})"
    )


class TestFracLaplacian:
    """Test the ball-split fractional Laplacian estimator."""

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_constant_field_is_exactly_zero(self, alpha, root_key, estimator_cfg):
        group = draw_sample_group(root_key, estimator_cfg.m, 3, batch=(7,))
        est = mc_frac_laplacian(ConstantField(2.5), np.zeros((7, 3)), alpha, estimator_cfg, group)
        np.testing.assert_array_equal(est, np.zeros(7))

    @pytest.mark.parametrize(
        "point, alpha",
        [([0.3], 1.5), ([-0.5], 0.7), ([0.2, -0.4], 1.5), ([0.0, 0.6], 1.0)],
    )
    def test_unbiased_on_manufactured_field(self, point, alpha, root_key):
        x0 = np.array(point)
        n, d = 4000, x0.size
        cfg = EstimatorConfig(m=8, r0=0.2)
        group = draw_sample_group(root_key.child(d), cfg.m, d, batch=(n,))
        est = mc_frac_laplacian(
            ManufacturedField(alpha), np.broadcast_to(x0, (n, d)), alpha, cfg, group
        )
        assert_unbiased(est, float(forcing_laplacian(x0, d, alpha)))

    @pytest.mark.slow
    @pytest.mark.parametrize("d", [1, 2, 5])
    def test_unbiased_at_large_sample_size(self, d, root_key):
        x0 = np.full(d, 0.1)
        n, alpha = 1_000_000, 1.2
        cfg = EstimatorConfig(m=1, r0=0.2)
        group = draw_sample_group(root_key.child(100 + d), 1, d, batch=(n,))
        est = mc_frac_laplacian(
            ManufacturedField(alpha), np.broadcast_to(x0, (n, d)), alpha, cfg, group
        )
        assert_unbiased(est, float(forcing_laplacian(x0, d, alpha)))

    def test_per_sample_shape_and_mean(self, root_key, estimator_cfg, interior_points):
        group = draw_sample_group(root_key, estimator_cfg.m, 2, batch=(6,))
        field = ManufacturedField(1.5)
        single = mc_frac_laplacian(field, interior_points, 1.5, estimator_cfg, group, per_sample=True)
        mean = mc_frac_laplacian(field, interior_points, 1.5, estimator_cfg, group)
        assert single.shape == (6, estimator_cfg.m)
        np.testing.assert_allclose(single.mean(axis=-1), mean)

    def test_alpha_gradient_matches_frozen_finite_difference(self, root_key, estimator_cfg):
        """Test the pathwise derivative in alpha with the uniforms held fixed."""
        x = np.array([0.25, -0.1])
        group = draw_sample_group(root_key, 64, 2)
        field = ManufacturedField(1.5)
        cfg = EstimatorConfig(m=64, r0=estimator_cfg.r0, eps=1e-8)

        alpha = tape.leaf(1.3)
        grad = tape.backward(mc_frac_laplacian(field, x, alpha, cfg, group))[id(alpha)]

        h = 1e-6
        plus = float(mc_frac_laplacian(field, x, 1.3 + h, cfg, group))
        minus = float(mc_frac_laplacian(field, x, 1.3 - h, cfg, group))
        assert float(grad) == pytest.approx((plus - minus) / (2 * h), rel=1e-5)

    @pytest.mark.parametrize("d, alpha", [(1, 1.0), (2, 0.4), (3, 1.7), (10, 1.5)])
    def test_constant_matches_closed_form(self, d, alpha):
        consts = frac_constants(d, alpha)
        assert float(frac_laplacian_constant(d, alpha)) == pytest.approx(
            consts.c_d_alpha * consts.sphere_area, rel=1e-12
        )

    @pytest.mark.parametrize("alpha", [0.0, 2.0, -0.5])
    def test_alpha_out_of_range(self, alpha, root_key, estimator_cfg):
        group = draw_sample_group(root_key, estimator_cfg.m, 1)
        with pytest.raises(DomainError):
            mc_frac_laplacian(ConstantField(1.0), np.zeros(1), alpha, estimator_cfg, group)

    def test_dimension_mismatch(self, root_key, estimator_cfg):
        group = draw_sample_group(root_key, estimator_cfg.m, 3)
        with pytest.raises(ContractViolation):
            mc_frac_laplacian(ConstantField(1.0), np.zeros(2), 1.0, estimator_cfg, group)


class TestCaputo:
    """Test the Caputo estimator on e^(-t)."""

    @pytest.mark.parametrize("t, gamma_order", [(0.5, 0.3), (1.0, 0.7), (2.0, 0.5)])
    def test_unbiased_on_exponential(self, t, gamma_order, root_key):
        n = 4000
        cfg = EstimatorConfig(m=4)
        group = draw_sample_group(root_key.child(7), cfg.m, 1, batch=(n,))
        est = mc_caputo(lambda s: tape.exp(tape.neg(s)), np.full(n, t), gamma_order, cfg, group)
        assert_unbiased(est, caputo_exp_decay(t, gamma_order))

    @pytest.mark.slow
    def test_unbiased_at_large_sample_size(self, root_key):
        n = 1_000_000
        group = draw_sample_group(root_key.child(8), 1, 1, batch=(n,))
        est = mc_caputo(
            lambda s: tape.exp(tape.neg(s)), np.full(n, 1.0), 0.5, EstimatorConfig(m=1), group
        )
        assert_unbiased(est, caputo_exp_decay(1.0, 0.5))

    def test_gamma_gradient_matches_frozen_finite_difference(self, root_key):
        group = draw_sample_group(root_key, 32, 1)
        cfg = EstimatorConfig(m=32, eps_t=1e-12)

        def estimate(g):
            return mc_caputo(lambda s: tape.exp(tape.neg(s)), 0.8, g, cfg, group)

        gamma_leaf = tape.leaf(0.4)
        grad = tape.backward(estimate(gamma_leaf))[id(gamma_leaf)]
        h = 1e-6
        numeric = (float(estimate(0.4 + h)) - float(estimate(0.4 - h))) / (2 * h)
        assert float(grad) == pytest.approx(numeric, rel=1e-5)

    @pytest.mark.parametrize("t, gamma_order", [(0.0, 0.5), (-1.0, 0.5), (1.0, 1.0), (1.0, 0.0)])
    def test_domain(self, t, gamma_order, root_key, estimator_cfg):
        group = draw_sample_group(root_key, estimator_cfg.m, 1)
        with pytest.raises(DomainError):
            mc_caputo(lambda s: tape.exp(tape.neg(s)), t, gamma_order, estimator_cfg, group)


class TestResidual:
    """Test the assembled residual on manufactured solutions."""

    def test_laplacian_residual_of_exact_solution(self, root_key):
        x0, alpha, n = np.array([0.3, 0.1]), 1.5, 4000
        cfg = EstimatorConfig(m=8)
        group = draw_sample_group(root_key.child(1), cfg.m, 2, batch=(n,))
        residual = residual_estimate(
            ManufacturedField(alpha),
            np.broadcast_to(x0, (n, 2)),
            None,
            PdeCoefficients(alpha=alpha),
            forcing_laplacian(x0, 2, alpha),
            cfg,
            group,
        )
        assert_unbiased(residual, 0.0)

    def test_advection_diffusion_residual_of_exact_solution(self, root_key):
        x0, t, n = np.array([-0.2, 0.4]), 0.6, 4000
        alpha, gamma_order, c, v = 1.4, 0.5, 1.0, np.array([0.5, -0.3])
        cfg = EstimatorConfig(m=8)
        group = draw_sample_group(root_key.child(2), cfg.m, 2, batch=(n,))
        residual = residual_estimate(
            ManufacturedField(alpha, time_dependent=True),
            np.broadcast_to(x0, (n, 2)),
            np.full(n, t),
            PdeCoefficients(alpha=alpha, gamma=gamma_order, c=c, v=v),
            forcing_ade(x0, t, 2, alpha, gamma_order, c, v),
            cfg,
            group,
        )
        assert_unbiased(residual, 0.0)

    def test_per_sample_keeps_sample_axis(self, root_key, estimator_cfg, interior_points):
        group = draw_sample_group(root_key, estimator_cfg.m, 2, batch=(6,))
        residual = residual_estimate(
            ManufacturedField(1.5),
            interior_points,
            None,
            PdeCoefficients(alpha=1.5),
            0.0,
            estimator_cfg,
            group,
            per_sample=True,
        )
        assert residual.shape == (6, estimator_cfg.m)

    def test_time_fractional_residual_needs_times(self, root_key, estimator_cfg):
        group = draw_sample_group(root_key, estimator_cfg.m, 1)
        with pytest.raises(ContractViolation, match="residual times"):
            residual_estimate(
                ManufacturedField(1.0, time_dependent=True),
                np.zeros(1),
                None,
                PdeCoefficients(alpha=1.0, gamma=0.5),
                0.0,
                estimator_cfg,
                group,
            )

    def test_advection_needs_tangent_field(self, root_key, estimator_cfg):
        group = draw_sample_group(root_key, estimator_cfg.m, 1)
        with pytest.raises(ContractViolation, match="directional"):
            residual_estimate(
                lambda x, aux=None: np.zeros(np.shape(x)[:-1]),
                np.zeros(1),
                None,
                PdeCoefficients(alpha=1.0, v=np.ones(1)),
                0.0,
                estimator_cfg,
                group,
            )


class TestEstimatorConfig:
    @pytest.mark.parametrize(
        "kwargs", [{"m": 0}, {"eps": 0.3, "r0": 0.2}, {"eps": 0.0}, {"eps_t": 0.0}]
    )
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            EstimatorConfig(**kwargs)
