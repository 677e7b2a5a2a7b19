"""Configuration system for mcpinns.

Provides TOML-based configuration with environment-specific overrides, a
discovery chain for finding configuration files, and a typed, validated
``RunConfig`` view used by the command line.
"""

import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from beartype import BeartypeConf
from beartype.door import is_bearable

from mcpinns.errors import ContractViolation, DomainError, McPinnsError

DEFAULT_ENVIRONMENT = "desk"
ENV_VAR = "MCPINNS_ENV"

ESTIMATE_FIELDS = ("manufactured", "parabolic", "constant", "exp_t")
ORACLE_TARGETS = ("frac_laplacian", "caputo", "forcing")


class ConfigError(McPinnsError):
    """Raised when configuration loading or validation fails."""

    pass


class Config:
    """Configuration container with dot-notation access."""

    def __init__(self, data: dict[str, Any]):
        self._data = data

    def __getattr__(self, key: str) -> Any:
        """Enable dot notation access to config values."""
        if key.startswith("_"):
            return super().__getattribute__(key)

        if key not in self._data:
            raise AttributeError(f"Config has no attribute '{key}'")

        value = self._data[key]
        if isinstance(value, dict):
            return Config(value)
        return value

    def __getitem__(self, key: str) -> Any:
        return self._data[key]

    def __contains__(self, key: str) -> bool:
        return key in self._data

    def get(self, key: str, default: Any = None) -> Any:
        """Safe get with default value."""
        return self._data.get(key, default)

    def to_dict(self) -> dict[str, Any]:
        return self._data.copy()

    def __repr__(self) -> str:
        return f"Config({self._data})"


class ConfigLoader:
    """Loads configuration from TOML files with environment support."""

    DEFAULT_SEARCH_PATHS = [
        Path("mcpinns.toml"),
        Path("pyproject.toml"),
        Path(".mcpinns/config.toml"),
    ]

    def __init__(self, search_paths: list[Path] | None = None):
        self.search_paths = search_paths or self.DEFAULT_SEARCH_PATHS.copy()

    def find_config_file(self, start_dir: Path | None = None) -> Path | None:
        """First config file found walking up from ``start_dir``."""
        current = (start_dir or Path.cwd()).resolve()
        while True:
            for search_path in self.search_paths:
                config_path = current / search_path
                if config_path.exists() and self._has_section(config_path):
                    return config_path
            if current == current.parent:
                return None
            current = current.parent

    def _has_section(self, path: Path) -> bool:
        # A pyproject.toml only counts when it carries [tool.mcpinns].
        if path.name != "pyproject.toml":
            return True
        try:
            return bool(self.load_file(path))
        except ConfigError:
            return False

    def load_file(self, path: Path) -> dict[str, Any]:
        """Load a TOML file."""
        try:
            with open(path, "rb") as f:
                data = tomllib.load(f)
        except (OSError, tomllib.TOMLDecodeError) as e:
            raise ConfigError(f"Failed to load config from {path}: {e}") from e

        if path.name == "pyproject.toml":
            return data.get("tool", {}).get("mcpinns", {})
        return data

    def load(
        self,
        config_file: Path | None = None,
        environment: str | None = None,
        overrides: dict[str, Any] | None = None,
    ) -> Config:
        """Load configuration with environment-specific overrides.

        Args:
            config_file: Explicit config file path
            environment: Environment name (desk, full, ...)
            overrides: Dictionary of values to override

        Returns:
            Loaded configuration object
        """
        requested = environment or os.getenv(ENV_VAR)
        env = requested or DEFAULT_ENVIRONMENT

        if config_file:
            path = Path(config_file)
            if not path.exists():
                raise ConfigError(f"Config file not found: {path}")
        else:
            path = self.find_config_file()

        data = self.load_file(path) if path else {}
        environments = data.get("environments", {})
        if requested and env != DEFAULT_ENVIRONMENT and env not in environments:
            raise ConfigError(
                f"unknown environment {env!r}; {path} defines {sorted(environments)}"
            )
        merged = self._deep_merge(data, environments.get(env, {}))
        merged.pop("environments", None)
        if overrides:
            merged = self._deep_merge(merged, overrides)
        merged["environment"] = env
        merged["source"] = str(path) if path else None
        return Config(merged)

    def _deep_merge(self, base: dict[str, Any], updates: dict[str, Any]) -> dict[str, Any]:
        """Deep merge two dictionaries."""
        result = base.copy()

        for key, value in updates.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._deep_merge(result[key], value)
            else:
                result[key] = value

        return result


_loader = ConfigLoader()


def load_config(
    config_file: str | Path | None = None,
    environment: str | None = None,
    overrides: dict[str, Any] | None = None,
) -> Config:
    """Load configuration using the global loader."""
    if isinstance(config_file, str):
        config_file = Path(config_file)
    return _loader.load(config_file, environment, overrides)


# -- typed sections -----------------------------------------------------------


@dataclass(frozen=True)
class ProblemSection:
    family: str = "forward_laplacian"
    d: int = 2
    alpha: float = 1.5
    gamma: float = 0.5
    c: float = 0.1
    true_v: tuple[float, ...] | None = None
    horizon: float = 1.0
    profile: str = "smooth"
    n_initial: int = 128
    n_sensors: int | None = None
    initial_alpha: float = 1.7
    initial_gamma: float = 0.9
    initial_c: float = 0.5
    initial_v_range: tuple[float, float] = (0.0, 0.1)
    alpha_range: tuple[float, float] = (0.5, 1.5)
    mu_range: tuple[float, float] = (-0.5, 0.5)
    alpha0: float = 1.0


@dataclass(frozen=True)
class NetworkSection:
    hidden_layers: tuple[int, ...] = (64, 64, 64, 64)
    activation: str = "tanh"


@dataclass(frozen=True)
class EstimatorSection:
    m: int = 20
    r0: float = 0.2
    eps: float = 1e-3
    eps_t: float = 1e-6


@dataclass(frozen=True)
class TrainSection:
    epochs: int = 10_000
    batch_size: int = 128
    lr: float = 1e-3
    decay_at: tuple[float, ...] = (0.5, 0.75)
    decay_factor: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    mode: str = "paired"
    w_equ: float = 1.0
    w_g: float = 1.0
    w_u: float = 1.0
    chunk_size: int = 32
    trace_every: int = 100
    log_every: int = 100
    n_test: int = 1000


@dataclass(frozen=True)
class AbcSection:
    source: str = "stand_in"
    n_draws: int = 100_000
    tolerance: float = 2.5e-4
    alpha_prior: tuple[float, float] = (0.5, 1.5)
    mu_prior: tuple[float, float] = (-0.5, 0.5)
    sensors: tuple[tuple[float, ...], ...] | None = None
    sensor_values: tuple[float, ...] | None = None
    true_alpha: float = 1.0
    true_mu: float = 0.0
    grid_points: int = 201


@dataclass(frozen=True)
class EstimateSection:
    field: str = "manufactured"
    d: int = 1
    alpha: float = 1.5
    gamma: float = 0.5
    point: tuple[float, ...] | None = None
    t: float = 0.5
    constant: float = 1.0
    m_values: tuple[int, ...] = (5, 10, 20, 40)
    r0_values: tuple[float, ...] = (0.2,)
    n_estimates: int = 2000


@dataclass(frozen=True)
class OracleSection:
    target: str = "frac_laplacian"
    field: str = "manufactured"
    d: int = 1
    alpha: float = 1.5
    gamma: float = 0.5
    points: tuple[tuple[float, ...], ...] = ()
    times: tuple[float, ...] = ()
    abs_tol: float = 1e-9


@dataclass(frozen=True)
class LoggingSection:
    level: str = "INFO"


SECTIONS: dict[str, type] = {
    "problem": ProblemSection,
    "network": NetworkSection,
    "estimator": EstimatorSection,
    "train": TrainSection,
    "abc": AbcSection,
    "estimate": EstimateSection,
    "oracle": OracleSection,
    "logging": LoggingSection,
}
TOP_LEVEL = {"seed", "workers", "out", "environment", "source", "metadata"}

_CONF = BeartypeConf(is_pep484_tower=True)


def _tupled(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(_tupled(v) for v in value)
    return value


def _build_section(cls: type, name: str, data: Any) -> Any:
    if not isinstance(data, dict):
        raise ConfigError(f"[{name}] must be a table, got {type(data).__name__}")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"[{name}] unknown key(s): {', '.join(unknown)}")
    values: dict[str, Any] = {}
    for key, raw in data.items():
        value = _tupled(raw)
        hint = known[key].type
        if not is_bearable(value, hint, conf=_CONF):
            raise ConfigError(f"[{name}] {key} = {raw!r} does not match the expected type {hint}")
        values[key] = value
    return cls(**values)


@dataclass(frozen=True)
class RunConfig:
    """Validated, typed view of one run's configuration."""

    seed: int
    workers: int = 1
    out: str = "runs/latest"
    environment: str = DEFAULT_ENVIRONMENT
    source: str | None = None
    problem: ProblemSection = field(default_factory=ProblemSection)
    network: NetworkSection = field(default_factory=NetworkSection)
    estimator: EstimatorSection = field(default_factory=EstimatorSection)
    train: TrainSection = field(default_factory=TrainSection)
    abc: AbcSection = field(default_factory=AbcSection)
    estimate: EstimateSection = field(default_factory=EstimateSection)
    oracle: OracleSection = field(default_factory=OracleSection)
    logging: LoggingSection = field(default_factory=LoggingSection)
    raw: dict[str, Any] = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_config(cls, config: Config) -> "RunConfig":
        data = config.to_dict()
        unknown = sorted(set(data) - set(SECTIONS) - TOP_LEVEL)
        if unknown:
            raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
        seed = data.get("seed")
        if seed is None:
            raise ConfigError("a root seed is required: set `seed` in the config or pass --seed")
        if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
        workers = data.get("workers", 1)
        if not isinstance(workers, int) or workers < 1:
            raise ConfigError(f"workers must be a positive integer, got {workers!r}")
        sections = {
            name: _build_section(section_cls, name, data.get(name, {}))
            for name, section_cls in SECTIONS.items()
        }
        run = cls(
            seed=seed,
            workers=workers,
            out=str(data.get("out", "runs/latest")),
            environment=str(data.get("environment", DEFAULT_ENVIRONMENT)),
            source=data.get("source"),
            raw=data,
            **sections,
        )
        run.validate()
        return run

    # -- domain objects -----------------------------------------------------

    def estimator_config(self) -> Any:
        from mcpinns.operators.estimators import EstimatorConfig

        e = self.estimator
        return EstimatorConfig(m=e.m, r0=e.r0, eps=e.eps, eps_t=e.eps_t)

    def train_config(self) -> Any:
        from mcpinns.training.loss import LossWeights
        from mcpinns.training.optim import AdamConfig
        from mcpinns.training.trainer import TrainConfig

        t = self.train
        return TrainConfig(
            epochs=t.epochs,
            batch_size=t.batch_size,
            adam=AdamConfig(
                lr=t.lr,
                beta1=t.beta1,
                beta2=t.beta2,
                eps=t.adam_eps,
                decay_at=t.decay_at,
                decay_factor=t.decay_factor,
            ),
            estimator=self.estimator_config(),
            mode=t.mode,
            weights=LossWeights(t.w_equ, t.w_g, t.w_u),
            seed=self.seed,
            workers=self.workers,
            chunk_size=t.chunk_size,
            trace_every=t.trace_every,
            log_every=t.log_every,
            n_test=t.n_test,
        )

    def build_problem(self) -> Any:
        from mcpinns.problems.families import make_problem

        p = self.problem
        options: dict[str, Any] = {"horizon": p.horizon}
        if p.family == "forward_laplacian":
            options["alpha"] = p.alpha
        elif p.family in ("forward_ade", "inverse_ade"):
            options.update(
                alpha=p.alpha, gamma=p.gamma, c=p.c, v=p.true_v, profile=p.profile, n_initial=p.n_initial
            )
            if p.family == "inverse_ade":
                options.update(
                    n_sensors=p.n_sensors,
                    initial={"alpha": p.initial_alpha, "gamma": p.initial_gamma, "c": p.initial_c},
                    initial_v_range=p.initial_v_range,
                )
        elif p.family == "parametric":
            options.update(alpha_range=p.alpha_range, mu_range=p.mu_range, alpha0=p.alpha0)
        problem = make_problem(p.family, p.d, **options)
        return problem.with_network(self.network.hidden_layers, self.network.activation)

    def abc_config(self) -> Any:
        from mcpinns.uq.abc import DEFAULT_SENSORS, AbcConfig

        a = self.abc
        return AbcConfig(
            n_draws=a.n_draws,
            tolerance=a.tolerance,
            alpha_prior=a.alpha_prior,
            mu_prior=a.mu_prior,
            sensors=a.sensors if a.sensors is not None else DEFAULT_SENSORS,
            sensor_values=a.sensor_values,
            true_alpha=a.true_alpha,
            true_mu=a.true_mu,
        )

    def validate(self) -> None:
        """Build every domain object once so range errors surface as ConfigError."""
        checks = (
            ("estimator", self.estimator_config),
            ("train", self.train_config),
            ("problem", self.build_problem),
            ("abc", self.abc_config),
        )
        for section, build in checks:
            try:
                build()
            except (DomainError, ContractViolation) as e:
                raise ConfigError(f"[{section}] {e}") from e
        if self.abc.source not in ("stand_in", "checkpoint"):
            raise ConfigError(f"[abc] source must be 'stand_in' or 'checkpoint', got {self.abc.source!r}")
        if self.estimate.field not in ESTIMATE_FIELDS:
            raise ConfigError(f"[estimate] field must be one of {ESTIMATE_FIELDS}, got {self.estimate.field!r}")
        if self.estimate.point is not None and len(self.estimate.point) != self.estimate.d:
            raise ConfigError(f"[estimate] point has {len(self.estimate.point)} coordinates, d = {self.estimate.d}")
        if self.oracle.target not in ORACLE_TARGETS:
            raise ConfigError(f"[oracle] target must be one of {ORACLE_TARGETS}, got {self.oracle.target!r}")
        if self.oracle.field not in ("manufactured", "parabolic"):
            raise ConfigError(f"[oracle] field must be 'manufactured' or 'parabolic', got {self.oracle.field!r}")
        if self.logging.level.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ConfigError(f"[logging] unknown level {self.logging.level!r}")


def load_run_config(
    path: str | Path | None = None,
    environment: str | None = None,
    overrides: dict[str, Any] | None = None,
) -> RunConfig:
    """Load, merge and validate a run configuration."""
    clean = {k: v for k, v in (overrides or {}).items() if v is not None}
    return RunConfig.from_config(load_config(path, environment, clean))
