"""Tests for path-keyed random streams and the samplers built on them."""

import numpy as np
import pytest

from mcpinns.core.rng import RngKey, Stream
from mcpinns.core.sampling import (
    sample_beta_power,
    sample_unit_ball,
    sample_unit_sphere,
    uniform_open_left,
)
from mcpinns.errors import DomainError


class TestRngKey:
    """Test stream identity and independence."""

    def test_same_path_same_draws(self):
        a = RngKey(5).child(1, 2, 3).generator().random(8)
        b = RngKey(5, (1, 2, 3)).generator().random(8)
        np.testing.assert_array_equal(a, b)

    def test_different_paths_differ(self):
        a = RngKey(5).child(1, 2).generator().random(8)
        b = RngKey(5).child(2, 1).generator().random(8)
        assert not np.array_equal(a, b)

    def test_streams_do_not_depend_on_consumption_order(self):
        """Test that drawing from one stream leaves every other stream unchanged."""
        root = RngKey(11)
        first = root.child(Stream.EPOCH, 3).generator().random(4)
        root.child(Stream.EPOCH, 2).generator().random(10_000)
        again = root.child(Stream.EPOCH, 3).generator().random(4)
        np.testing.assert_array_equal(first, again)

    def test_root_seed_matters(self):
        assert not np.array_equal(
            RngKey(1).generator().random(4), RngKey(2).generator().random(4)
        )

    @pytest.mark.parametrize("seed, path", [(-1, ()), (2**64, ()), (0, (1, -2))])
    def test_invalid_keys(self, seed, path):
        with pytest.raises(DomainError):
            RngKey(seed, path)

    def test_str(self):
        assert str(RngKey(3).child(1, 4)) == "RngKey(3:1/4)"
        assert str(RngKey(3)) == "RngKey(3:-)"


class TestSampling:
    """Test the distributional contracts of the samplers."""

    def test_unit_sphere_norms(self):
        xi = sample_unit_sphere(3, RngKey(1), (50, 4))
        assert xi.shape == (50, 4, 3)
        np.testing.assert_allclose(np.linalg.norm(xi, axis=-1), 1.0, rtol=1e-14)

    def test_unit_sphere_is_centred(self):
        xi = sample_unit_sphere(4, RngKey(2), 200_000)
        np.testing.assert_allclose(xi.mean(axis=0), 0.0, atol=0.01)

    def test_unit_sphere_one_dimension_is_sign(self):
        xi = sample_unit_sphere(1, RngKey(3), 1000)
        assert set(np.unique(xi)) == {-1.0, 1.0}

    def test_unit_ball_radius_law(self):
        """Test P(|x| < 1/2) = 2^-d for uniform points in the ball."""
        x = sample_unit_ball(2, RngKey(4), 200_000)
        r = np.linalg.norm(x, axis=-1)
        assert r.max() <= 1.0
        assert np.mean(r < 0.5) == pytest.approx(0.25, abs=0.005)

    def test_beta_power_keeps_uniform(self):
        draw = sample_beta_power(0.7, RngKey(5), 1000)
        np.testing.assert_allclose(draw.value, draw.uniform ** (1.0 / 0.7))

    @pytest.mark.parametrize("k", [0.3, 1.0, 2.5])
    def test_beta_power_mean(self, k):
        """Test E[Beta(k, 1)] = k / (k + 1)."""
        draw = sample_beta_power(k, RngKey(6), 200_000)
        assert np.mean(draw.value) == pytest.approx(k / (k + 1.0), abs=0.003)

    def test_beta_power_rejects_nonpositive_k(self):
        with pytest.raises(DomainError):
            sample_beta_power(0.0, RngKey(7))

    def test_uniform_open_left(self):
        u = uniform_open_left(RngKey(8).generator(), 100_000)
        assert np.all(u > 0.0) and np.all(u <= 1.0)

    def test_dimension_must_be_positive(self):
        with pytest.raises(DomainError):
            sample_unit_ball(0, RngKey(9))
