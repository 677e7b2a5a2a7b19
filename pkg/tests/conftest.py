"""
Pytest configuration and shared fixtures for mcpinns tests.
"""

from pathlib import Path

import numpy as np
import pytest

from mcpinns.autodiff.network import NetworkSpec, init_params
from mcpinns.core.rng import RngKey
from mcpinns.operators.estimators import EstimatorConfig


@pytest.fixture
def root_key() -> RngKey:
    return RngKey(20240611)


@pytest.fixture
def small_spec() -> NetworkSpec:
    """A [2, 8, 8, 1] network, small enough for finite-difference checks."""
    return NetworkSpec(input_dim=2, hidden_layers=(8, 8))


@pytest.fixture
def small_params(small_spec: NetworkSpec, root_key: RngKey):
    return init_params(small_spec, root_key.child(0))


@pytest.fixture
def estimator_cfg() -> EstimatorConfig:
    return EstimatorConfig(m=20, r0=0.2, eps=1e-3, eps_t=1e-6)


@pytest.fixture
def interior_points(root_key: RngKey) -> np.ndarray:
    """A handful of points strictly inside the 2D unit ball."""
    gen = root_key.child(99).generator()
    directions = gen.standard_normal((6, 2))
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    return directions * gen.uniform(0.0, 0.8, size=(6, 1))


@pytest.fixture
def write_config(tmp_path: Path):
    """Write a TOML run config into the test's temporary directory."""

    def _write(text: str, name: str = "run.toml") -> Path:
        path = tmp_path / name
        path.write_text(text)
        return path

    return _write


@pytest.fixture
def forward_config(write_config, tmp_path: Path) -> Path:
    """Tiny forward 2D run: a few epochs on a narrow network."""
    return write_config(
        f"""
seed = 7
workers = 1
out = "{(tmp_path / "out").as_posix()}"

[problem]
family = "forward_laplacian"
d = 2
alpha = 1.5

[network]
hidden_layers = [8, 8]

[estimator]
m = 4
r0 = 0.2

[train]
epochs = 10
batch_size = 16
chunk_size = 8
trace_every = 2
log_every = 5
n_test = 50
"""
    )


# Pytest configuration
def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line(
        "markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')"
    )
    config.addinivalue_line("markers", "integration: marks tests as integration tests")
    config.addinivalue_line("markers", "unit: marks tests as unit tests")
