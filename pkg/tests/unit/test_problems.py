"""Tests for the problem families and the boundary ansatz."""

import numpy as np
import pytest

from mcpinns.autodiff import tape
from mcpinns.autodiff.network import init_params
from mcpinns.core.rng import RngKey
from mcpinns.errors import ContractViolation, DomainError
from mcpinns.instrumentation import EvalCounter
from mcpinns.operators.estimators import EstimatorConfig, draw_sample_group
from mcpinns.problems import (
    T_MIN_FRACTION,
    ForwardADE,
    ForwardLaplacian,
    InverseADE,
    ParametricDiffusion,
    default_sensor_count,
    evaluate,
    make_problem,
    make_sensor_data,
    parametric_residual,
)


def surrogate_for(problem, key=RngKey(0)):
    params = init_params(problem.network, key, problem.pde_sizes())
    return problem.make_surrogate(params.with_block("b2", 0.7) if params.has("b2") else params)


class TestAnsatz:
    """Test the boundary-enforcing surrogate."""

    def test_zero_outside_ball(self):
        problem = make_problem("forward_laplacian", 3).with_network((6, 6))
        u = surrogate_for(problem)
        x = np.array([[1.0, 0.0, 0.0], [0.9, 0.9, 0.0], [3.0, -1.0, 2.0]])
        np.testing.assert_array_equal(evaluate(u, x, None), np.zeros(3))

    def test_nonzero_inside_ball(self):
        problem = make_problem("forward_laplacian", 2).with_network((6, 6))
        assert evaluate(surrogate_for(problem), np.zeros((1, 2)), None)[0] != 0.0

    def test_tangent_matches_finite_difference(self):
        problem = make_problem("forward_ade", 2).with_network((6, 6))
        u = surrogate_for(problem)
        x = np.array([[0.2, -0.3], [0.5, 0.1]])
        aux = np.array([[0.4], [0.9]])
        direction = np.array([0.6, 0.8])
        _, tangent = u.with_tangent(x, aux, direction)
        h = 1e-6
        numeric = (evaluate(u, x + h * direction, aux) - evaluate(u, x - h * direction, aux)) / (2 * h)
        np.testing.assert_allclose(tape.value_of(tangent), numeric, rtol=1e-6, atol=1e-9)

    def test_counter_sees_each_forward_call(self):
        problem = make_problem("forward_laplacian", 2).with_network((4,))
        counter = EvalCounter()
        params = init_params(problem.network, RngKey(1))
        u = problem.make_surrogate(params, counter)
        u(np.zeros((5, 3, 2)))
        assert counter.to_dict() == {"calls": 1, "points": 15}


class TestFamilies:
    """Test family construction, point sets and data."""

    @pytest.mark.parametrize(
        "family, d, input_dim",
        [("forward_laplacian", 2, 2), ("forward_ade", 3, 4), ("inverse_ade", 1, 2), ("parametric", 2, 4)],
    )
    def test_network_input_dim(self, family, d, input_dim):
        assert make_problem(family, d).network.input_dim == input_dim

    def test_unknown_family(self):
        with pytest.raises(ContractViolation, match="unknown problem family"):
            make_problem("heat", 2)

    @pytest.mark.parametrize(
        "family, options",
        [
            ("forward_laplacian", {"alpha": 2.0}),
            ("forward_ade", {"gamma": 1.0}),
            ("parametric", {"alpha_range": (0.5, 2.5)}),
            ("parametric", {"mu_range": (1.0, -1.0)}),
        ],
    )
    def test_domain_checks(self, family, options):
        with pytest.raises(DomainError):
            make_problem(family, 2, **options)

    def test_batch_lies_in_ball_and_time_window(self, root_key):
        problem = ForwardADE(d=3, horizon=2.0)
        batch = problem.sample_batch(500, root_key)
        assert len(batch) == 500
        assert np.all(np.linalg.norm(batch.x, axis=-1) <= 1.0)
        assert np.all(batch.t > T_MIN_FRACTION * 2.0) and np.all(batch.t <= 2.0)
        assert batch.forcing.shape == (500,)

    def test_batch_is_reproducible(self, root_key):
        problem = ForwardLaplacian(d=2)
        a, b = problem.sample_batch(10, root_key), problem.sample_batch(10, root_key)
        np.testing.assert_array_equal(a.x, b.x)

    def test_default_velocity(self):
        problem = ForwardADE(d=4)
        np.testing.assert_allclose(problem.velocity, np.full(4, 0.5))

    def test_velocity_length_checked(self):
        with pytest.raises(ContractViolation):
            ForwardADE(d=2, v=(1.0,))

    def test_initial_data_at_time_zero(self, root_key):
        problem = ForwardADE(d=2, n_initial=40)
        data = problem.dataset(root_key)
        assert data.n_g == 40 and data.n_u == 0
        np.testing.assert_array_equal(data.d_g.t, np.zeros(40))
        np.testing.assert_allclose(data.d_g.values, problem.exact(data.d_g.x, data.d_g.t))

    @pytest.mark.parametrize("d, expected", [(1, 20), (3, 80), (5, 100), (2, 40)])
    def test_sensor_counts(self, d, expected, root_key):
        assert default_sensor_count(d) == expected
        problem = InverseADE(d=d)
        sensors = make_sensor_data(problem, root_key)
        assert len(sensors) == expected
        np.testing.assert_array_equal(sensors.t, np.full(expected, problem.horizon))

    def test_inverse_pde_blocks(self, root_key):
        problem = InverseADE(d=3, initial_v_range=(0.0, 0.1))
        assert problem.pde_sizes() == {"alpha": 1, "gamma": 1, "c": 1, "v": 3}
        values = problem.initial_pde_values(root_key)
        assert values["alpha"] == 1.7 and values["gamma"] == 0.9 and values["c"] == 0.5
        assert np.all((values["v"] >= 0.0) & (values["v"] <= 0.1))

    def test_sensor_data_needs_inverse_problem(self, root_key):
        with pytest.raises(ContractViolation):
            make_sensor_data(ForwardADE(d=1), root_key)

    def test_parametric_batch_inputs(self, root_key):
        problem = ParametricDiffusion(d=2)
        batch = problem.sample_batch(300, root_key)
        alpha, mu = batch.inputs[:, 0], batch.inputs[:, 1]
        assert np.all((alpha >= 0.5) & (alpha <= 1.5))
        assert np.all((mu >= -0.5) & (mu <= 0.5))

    def test_parametric_exact_only_on_reference_slice(self):
        problem = ParametricDiffusion(d=2)
        x = np.zeros((3, 2))
        assert problem.exact(x, None, problem.reference_inputs(3)) is not None
        assert problem.exact(x, None, np.tile([0.7, 0.2], (3, 1))) is None

    def test_parametric_residual_shape(self, root_key):
        problem = ParametricDiffusion(d=2).with_network((6,))
        u = surrogate_for(problem)
        cfg = EstimatorConfig(m=4)
        x = np.array([[0.1, 0.2], [0.0, -0.5]])
        group = draw_sample_group(root_key, cfg.m, 2, batch=(2,))
        residual = parametric_residual(u, x, 1.2, 0.3, cfg, group)
        assert tape.value_of(residual).shape == (2,)

    def test_describe(self):
        info = InverseADE(d=1).describe()
        assert info["family"] == "inverse_ade"
        assert info["n_sensors"] == 20
