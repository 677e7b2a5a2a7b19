"""Tests for the MLP surrogate, its parameter layout and checkpoints."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcpinns.autodiff import tape
from mcpinns.autodiff.checkpoint import load_checkpoint, save_checkpoint
from mcpinns.autodiff.network import (
    NetworkSpec,
    ParamVector,
    directional_derivative,
    forward,
    forward_with_tangent,
    grad_wrt_params,
    init_params,
    record,
)
from mcpinns.core.rng import RngKey
from mcpinns.errors import ContractViolation
from mcpinns.instrumentation import EvalCounter


class TestLayout:
    """Test the flat parameter layout."""

    def test_parameter_count(self):
        spec = NetworkSpec(input_dim=2, hidden_layers=(64, 64, 64, 64))
        assert spec.parameter_count() == 2 * 64 + 64 + 3 * (64 * 64 + 64) + 64 + 1

    def test_pde_blocks_follow_weights(self, small_spec, root_key):
        params = init_params(small_spec, root_key, {"v": 3, "alpha": 1, "c": 1})
        assert params.trainable_pde == ("alpha", "c", "v")
        assert len(params) == small_spec.parameter_count() + 5
        assert params.slot("alpha").offset == small_spec.parameter_count()
        assert params.get("v").shape == (3,)

    def test_with_block_is_a_copy(self, small_params):
        updated = small_params.with_block("b0", 1.0)
        np.testing.assert_array_equal(updated.get("b0"), np.ones(8))
        np.testing.assert_array_equal(small_params.get("b0"), np.zeros(8))

    def test_values_are_read_only(self, small_params):
        with pytest.raises(ValueError):
            small_params.values[0] = 1.0

    def test_wrong_size_rejected(self, small_params):
        with pytest.raises(ContractViolation):
            ParamVector(np.zeros(3), small_params.layout)

    def test_unknown_block(self, small_params):
        with pytest.raises(ContractViolation, match="no parameter block"):
            small_params.get("beta")

    @pytest.mark.parametrize(
        "kwargs",
        [{"input_dim": 0}, {"input_dim": 2, "hidden_layers": (0,)}, {"input_dim": 2, "activation": "relu6"}],
    )
    def test_bad_spec(self, kwargs):
        with pytest.raises(ContractViolation):
            NetworkSpec(**kwargs)

    def test_init_is_reproducible(self, small_spec):
        a = init_params(small_spec, RngKey(3))
        b = init_params(small_spec, RngKey(3))
        np.testing.assert_array_equal(a.values, b.values)


class TestForward:
    """Test evaluation, tangents and parameter gradients."""

    def test_output_shape_and_counter(self, small_spec, small_params):
        counter = EvalCounter()
        out = forward(small_params, small_spec, np.zeros((5, 3, 2)), counter)
        assert out.shape == (5, 3)
        assert counter.to_dict() == {"calls": 1, "points": 15}

    def test_input_dimension_checked(self, small_spec, small_params):
        with pytest.raises(ContractViolation):
            forward(small_params, small_spec, np.zeros((4, 3)))

    def test_tangent_matches_finite_difference(self, small_spec, small_params, interior_points):
        direction = np.array([0.6, -0.8])
        h = 1e-6
        value, tangent = forward_with_tangent(small_params, small_spec, interior_points, direction)
        up = forward(small_params, small_spec, interior_points + h * direction)
        down = forward(small_params, small_spec, interior_points - h * direction)
        np.testing.assert_allclose(value, forward(small_params, small_spec, interior_points))
        np.testing.assert_allclose(tangent, (up - down) / (2 * h), rtol=1e-6, atol=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(
        a=st.floats(-3.0, 3.0),
        b=st.floats(-3.0, 3.0),
        u=st.lists(st.floats(-1.0, 1.0), min_size=2, max_size=2),
        w=st.lists(st.floats(-1.0, 1.0), min_size=2, max_size=2),
    )
    def test_tangent_is_linear_in_direction(self, a, b, u, w):
        spec = NetworkSpec(input_dim=2, hidden_layers=(5,))
        params = init_params(spec, RngKey(3))
        x = np.array([[0.2, -0.1], [0.4, 0.3]])
        u, w = np.array(u), np.array(w)
        combined = directional_derivative(params, spec, x, a * u + b * w)
        separate = a * directional_derivative(params, spec, x, u) + b * directional_derivative(params, spec, x, w)
        np.testing.assert_allclose(combined, separate, rtol=1e-9, atol=1e-12)

    def test_short_direction_is_padded(self, root_key):
        spec = NetworkSpec(input_dim=3, hidden_layers=(6,))
        params = init_params(spec, root_key)
        x = np.array([[0.1, 0.2, 0.5]])
        partial = directional_derivative(params, spec, x, np.array([1.0, 0.0]))
        full = directional_derivative(params, spec, x, np.array([1.0, 0.0, 0.0]))
        np.testing.assert_allclose(partial, full)

    def test_gradient_matches_finite_difference(self, small_spec, small_params, interior_points):
        """Test the reverse-mode gradient of a tangent-based loss against central differences."""
        direction = np.array([1.0, 0.0])

        def build(p):
            du = directional_derivative(p, small_spec, interior_points, direction)
            u = forward(p, small_spec, interior_points)
            return tape.mean(tape.add(tape.mul(du, du), u))

        rec = record(small_params, build)
        grad = grad_wrt_params(rec)
        h = 1e-6
        numeric = np.zeros_like(grad)
        for i in range(len(small_params)):
            bump = np.zeros(len(small_params))
            bump[i] = h
            plus = float(build(small_params.with_values(small_params.values + bump)))
            minus = float(build(small_params.with_values(small_params.values - bump)))
            numeric[i] = (plus - minus) / (2 * h)
        np.testing.assert_allclose(grad, numeric, rtol=1e-5, atol=1e-8)

    def test_record_replay(self, small_spec, small_params, interior_points):
        rec = record(small_params, lambda p: tape.sum(forward(p, small_spec, interior_points)))
        assert rec.replay() == rec.value

    def test_constant_computation_has_zero_gradient(self, small_params):
        rec = record(small_params, lambda p: np.float64(2.0))
        np.testing.assert_array_equal(grad_wrt_params(rec), np.zeros(len(small_params)))

    def test_non_scalar_record_rejected(self, small_spec, small_params, interior_points):
        with pytest.raises(ContractViolation, match="scalar"):
            record(small_params, lambda p: forward(p, small_spec, interior_points))


class TestCheckpoint:
    """Test parameter checkpoints on disk."""

    def test_roundtrip_is_exact(self, tmp_path, small_spec, root_key):
        params = init_params(small_spec, root_key, {"alpha": 1, "v": 2}).with_block("alpha", 1.3)
        path = save_checkpoint(tmp_path / "ckpt.txt", params, small_spec)
        loaded, spec = load_checkpoint(path, expected=small_spec)
        assert spec == small_spec
        np.testing.assert_array_equal(loaded.values, params.values)
        assert loaded.trainable_pde == ("alpha", "v")

    def test_architecture_mismatch(self, tmp_path, small_spec, small_params):
        path = save_checkpoint(tmp_path / "ckpt.txt", small_params, small_spec)
        with pytest.raises(ContractViolation, match="does not match"):
            load_checkpoint(path, expected=NetworkSpec(input_dim=2, hidden_layers=(8,)))

    def test_not_a_checkpoint(self, tmp_path):
        path = tmp_path / "junk.txt"
        path.write_text("hello\n")
        with pytest.raises(ContractViolation):
            load_checkpoint(path)
