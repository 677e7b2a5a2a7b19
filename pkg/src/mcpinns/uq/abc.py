"""Rejection ABC over (alpha, mu) and one-dimensional kernel density estimates."""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from mcpinns._typing import checked
from mcpinns.autodiff import tape
from mcpinns.autodiff.network import ParamVector
from mcpinns.core.rng import RngKey
from mcpinns.errors import ContractViolation, DomainError
from mcpinns.problems.families import ParametricDiffusion

logger = logging.getLogger("mcpinns.uq")

# Sensor locations of the two-dimensional posterior study.
DEFAULT_SENSORS: tuple[tuple[float, float], ...] = (
    (-0.0120, -0.2170),
    (0.0321, 0.7628),
    (0.6677, 0.1095),
    (0.5411, 0.5840),
    (-0.2382, -0.7787),
)

BANDWIDTH_FLOOR = 1e-4

# model(sensors (K, d), alpha (n,), mu (n,)) -> predictions (n, K)
ParametricModel = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class AbcConfig:
    n_draws: int = 100_000
    tolerance: float = 2.5e-4
    alpha_prior: tuple[float, float] = (0.5, 1.5)
    mu_prior: tuple[float, float] = (-0.5, 0.5)
    sensors: tuple[tuple[float, ...], ...] = DEFAULT_SENSORS
    sensor_values: tuple[float, ...] | None = None
    true_alpha: float = 1.0
    true_mu: float = 0.0
    chunk_size: int = 8192

    def __post_init__(self) -> None:
        if self.n_draws < 1:
            raise DomainError(f"n_draws must be >= 1, got {self.n_draws}")
        if self.tolerance < 0.0:
            raise DomainError(f"tolerance must be non-negative, got {self.tolerance}")
        for name, (low, high) in (("alpha", self.alpha_prior), ("mu", self.mu_prior)):
            if low > high:
                raise DomainError(f"empty {name} prior range ({low}, {high})")
        if not (0.0 < self.alpha_prior[0] and self.alpha_prior[1] < 2.0):
            raise DomainError(f"alpha prior must lie in (0, 2), got {self.alpha_prior}")
        if len({len(s) for s in self.sensors}) != 1:
            raise ContractViolation("all sensors must have the same dimension")
        if self.sensor_values is not None and len(self.sensor_values) != len(self.sensors):
            raise ContractViolation(
                f"{len(self.sensor_values)} sensor values for {len(self.sensors)} sensors"
            )

    @property
    def sensor_array(self) -> np.ndarray:
        return np.asarray(self.sensors, dtype=np.float64)

    @property
    def d(self) -> int:
        return len(self.sensors[0])


@dataclass
class PosteriorSample:
    """Accepted (alpha, mu) pairs in draw order."""

    alpha: np.ndarray
    mu: np.ndarray
    discrepancy: np.ndarray
    n_draws: int
    tolerance: float
    diagnostic: str | None = field(default=None)

    @property
    def n_accepted(self) -> int:
        return int(self.alpha.size)

    @property
    def acceptance_rate(self) -> float:
        return self.n_accepted / self.n_draws

    def means(self) -> dict[str, float | None]:
        if self.n_accepted == 0:
            return {"alpha": None, "mu": None}
        return {"alpha": float(self.alpha.mean()), "mu": float(self.mu.mean())}


def stand_in_model(sensors: np.ndarray, alpha: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Closed-form test family u(x | alpha, mu) = (1 - |x|^2)_+^(1 + alpha/2) / (1 + mu).

    It solves the parametric equation only at (alpha, mu) = (1, 0); elsewhere it
    is a cheap stand-in forward model, so its posterior shape carries no physics.
    """
    inside = np.maximum(1.0 - np.sum(sensors * sensors, axis=-1), 0.0)
    alpha = np.asarray(alpha, dtype=np.float64)[..., None]
    mu = np.asarray(mu, dtype=np.float64)[..., None]
    return inside ** (1.0 + alpha / 2.0) / (1.0 + mu)


def surrogate_model(problem: ParametricDiffusion, params: ParamVector) -> ParametricModel:
    """A trained parametric surrogate in the ABC model signature."""
    surrogate = problem.make_surrogate(params)

    def model(sensors: np.ndarray, alpha: np.ndarray, mu: np.ndarray) -> np.ndarray:
        n, k = alpha.size, sensors.shape[0]
        x = np.broadcast_to(sensors, (n, k, sensors.shape[1]))
        return np.asarray(
            tape.value_of(surrogate.at(x, alpha[:, None], mu[:, None]))
        )

    return model


def observed_values(cfg: AbcConfig, model: ParametricModel = stand_in_model) -> np.ndarray:
    """Configured sensor values, or the model at the true parameters."""
    if cfg.sensor_values is not None:
        return np.asarray(cfg.sensor_values, dtype=np.float64)
    return model(cfg.sensor_array, np.array([cfg.true_alpha]), np.array([cfg.true_mu]))[0]


def discrepancy(predicted: np.ndarray, observed: np.ndarray) -> np.ndarray:
    """Sum over sensors of squared misfits, one value per draw."""
    return np.sum((predicted - observed) ** 2, axis=-1)


def abc_rejection(
    model: ParametricModel,
    cfg: AbcConfig,
    key: RngKey,
    observed: np.ndarray | None = None,
) -> PosteriorSample:
    """Draw from the uniform prior and keep draws whose discrepancy is <= tolerance."""
    sensors = cfg.sensor_array
    observed = observed_values(cfg, model) if observed is None else np.asarray(observed)
    gen = key.generator()
    kept_alpha: list[np.ndarray] = []
    kept_mu: list[np.ndarray] = []
    kept_dist: list[np.ndarray] = []
    remaining = cfg.n_draws
    while remaining > 0:
        n = min(cfg.chunk_size, remaining)
        alpha = gen.uniform(*cfg.alpha_prior, size=n)
        mu = gen.uniform(*cfg.mu_prior, size=n)
        dist = discrepancy(model(sensors, alpha, mu), observed)
        accept = dist <= cfg.tolerance
        kept_alpha.append(alpha[accept])
        kept_mu.append(mu[accept])
        kept_dist.append(dist[accept])
        remaining -= n

    sample = PosteriorSample(
        alpha=np.concatenate(kept_alpha),
        mu=np.concatenate(kept_mu),
        discrepancy=np.concatenate(kept_dist),
        n_draws=cfg.n_draws,
        tolerance=cfg.tolerance,
    )
    if sample.n_accepted == 0:
        sample.diagnostic = (
            f"no draw out of {cfg.n_draws} met tolerance {cfg.tolerance:g}; "
            "try a larger tolerance or more draws"
        )
        logger.warning(sample.diagnostic)
    else:
        logger.debug("accepted %d of %d draws", sample.n_accepted, cfg.n_draws)
    return sample


def scott_bandwidth(samples: np.ndarray, floor: float = BANDWIDTH_FLOOR) -> float:
    samples = np.asarray(samples, dtype=np.float64)
    return max(samples.size ** (-1.0 / 5.0) * float(np.std(samples, ddof=1)), floor)


def kde_grid(samples: np.ndarray, n: int = 201, bandwidth: float | None = None) -> np.ndarray:
    """Reporting grid covering the samples plus six bandwidths on either side."""
    samples = np.asarray(samples, dtype=np.float64)
    h = scott_bandwidth(samples) if bandwidth is None else bandwidth
    return np.linspace(samples.min() - 6.0 * h, samples.max() + 6.0 * h, n)


@checked
def kde_1d(
    samples: np.ndarray,
    grid: np.ndarray,
    bandwidth: float | None = None,
    floor: float = BANDWIDTH_FLOOR,
) -> np.ndarray:
    """Gaussian-kernel density on ``grid``; Scott's rule bandwidth by default."""
    samples = np.asarray(samples, dtype=np.float64).ravel()
    if samples.size < 2:
        raise DomainError(f"kernel density needs at least 2 samples, got {samples.size}")
    h = scott_bandwidth(samples, floor) if bandwidth is None else max(bandwidth, floor)
    grid = np.asarray(grid, dtype=np.float64)
    density = np.zeros(grid.shape)
    # Blocks over samples keep the (grid x samples) kernel matrix small.
    for start in range(0, samples.size, 4096):
        block = samples[start : start + 4096]
        density += stats.norm.pdf((grid[..., None] - block) / h).sum(axis=-1)
    return density / (samples.size * h)
