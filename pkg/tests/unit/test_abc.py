"""Tests for rejection ABC and the kernel density estimates."""

import numpy as np
import pytest
from scipy import integrate

from mcpinns.autodiff.network import init_params
from mcpinns.core.rng import RngKey
from mcpinns.errors import ContractViolation, DomainError
from mcpinns.oracle import forcing_laplacian
from mcpinns.problems import ParametricDiffusion
from mcpinns.uq import (
    DEFAULT_SENSORS,
    AbcConfig,
    abc_rejection,
    discrepancy,
    kde_1d,
    kde_grid,
    observed_values,
    scott_bandwidth,
    stand_in_model,
    surrogate_model,
)


class TestAbc:
    """Test rejection sampling over (alpha, mu)."""

    def test_huge_tolerance_accepts_everything(self, root_key):
        cfg = AbcConfig(n_draws=500, tolerance=1e9)
        sample = abc_rejection(stand_in_model, cfg, root_key)
        assert sample.acceptance_rate == 1.0
        assert np.all((sample.alpha >= 0.5) & (sample.alpha <= 1.5))
        assert np.all((sample.mu >= -0.5) & (sample.mu <= 0.5))

    def test_zero_acceptances_carry_a_diagnostic(self, root_key):
        cfg = AbcConfig(n_draws=50, tolerance=0.0, sensor_values=(9.0,) * 5)
        sample = abc_rejection(stand_in_model, cfg, root_key)
        assert sample.n_accepted == 0
        assert "tolerance" in sample.diagnostic
        assert sample.means() == {"alpha": None, "mu": None}

    def test_accepted_draws_meet_tolerance(self, root_key):
        cfg = AbcConfig(n_draws=20_000, tolerance=1e-3)
        sample = abc_rejection(stand_in_model, cfg, root_key)
        assert 0 < sample.n_accepted < cfg.n_draws
        assert np.all(sample.discrepancy <= cfg.tolerance)

    def test_posterior_concentrates_near_truth(self, root_key):
        cfg = AbcConfig(n_draws=100_000)
        sample = abc_rejection(stand_in_model, cfg, root_key)
        means = sample.means()
        assert means["alpha"] == pytest.approx(1.0, abs=0.1)
        assert means["mu"] == pytest.approx(0.0, abs=0.1)

    def test_observed_values_from_truth(self):
        cfg = AbcConfig()
        observed = observed_values(cfg)
        assert observed.shape == (len(DEFAULT_SENSORS),)
        np.testing.assert_allclose(
            observed, stand_in_model(cfg.sensor_array, np.array([1.0]), np.array([0.0]))[0]
        )

    @pytest.mark.parametrize("alpha, mu, solves", [(1.0, 0.0, True), (1.4, 0.0, False), (1.0, 0.2, False)])
    def test_stand_in_solves_the_equation_only_at_truth(self, alpha, mu, solves):
        """Test the closed-form residual of the stand-in family against the alpha0 = 1 forcing."""
        problem = ParametricDiffusion(d=2)
        x = np.array([[0.0, 0.0], [0.3, -0.2], [0.5, 0.5]])
        u = stand_in_model(x, np.array([alpha]), np.array([mu]))[0]
        residual = (
            forcing_laplacian(x, 2, alpha) / (1.0 + mu) + mu * u - problem.forcing(x, None, None)
        )
        assert np.allclose(residual, 0.0, atol=1e-12) is solves
        if solves:
            np.testing.assert_allclose(u, problem.exact(x, inputs=np.array([1.0, 0.0])))

    def test_discrepancy(self):
        assert discrepancy(np.array([[1.0, 2.0]]), np.array([0.0, 0.0]))[0] == 5.0

    def test_surrogate_model_shape(self, root_key):
        problem = ParametricDiffusion(d=2).with_network((6,))
        params = init_params(problem.network, root_key)
        model = surrogate_model(problem, params)
        out = model(AbcConfig().sensor_array, np.array([0.8, 1.2, 1.0]), np.array([0.1, -0.2, 0.0]))
        assert out.shape == (3, 5)

    @pytest.mark.parametrize(
        "kwargs, error",
        [
            ({"n_draws": 0}, DomainError),
            ({"tolerance": -1.0}, DomainError),
            ({"alpha_prior": (1.5, 0.5)}, DomainError),
            ({"alpha_prior": (0.5, 2.5)}, DomainError),
            ({"sensor_values": (1.0, 2.0)}, ContractViolation),
            ({"sensors": ((0.0, 0.0), (0.1,))}, ContractViolation),
        ],
    )
    def test_invalid_config(self, kwargs, error):
        with pytest.raises(error):
            AbcConfig(**kwargs)


class TestKde:
    """Test the Gaussian kernel density estimate."""

    def test_integrates_to_one(self):
        samples = RngKey(3).generator().normal(1.0, 0.2, 400)
        grid = kde_grid(samples)
        density = kde_1d(samples, grid)
        assert integrate.trapezoid(density, grid) == pytest.approx(1.0, abs=1e-3)

    def test_matches_normal_density(self):
        samples = RngKey(4).generator().normal(0.0, 1.0, 20_000)
        grid = np.linspace(-2.0, 2.0, 9)
        expected = np.exp(-0.5 * grid**2) / np.sqrt(2.0 * np.pi)
        np.testing.assert_allclose(kde_1d(samples, grid), expected, atol=0.02)

    def test_identical_samples_use_floor(self):
        samples = np.full(10, 0.3)
        assert scott_bandwidth(samples) == 1e-4
        grid = kde_grid(samples)
        assert integrate.trapezoid(kde_1d(samples, grid), grid) == pytest.approx(1.0, abs=1e-3)

    def test_needs_two_samples(self):
        with pytest.raises(DomainError):
            kde_1d(np.array([1.0]), np.linspace(0.0, 2.0, 5))
