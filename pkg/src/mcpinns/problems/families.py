"""The four problem families: forward Laplacian, forward/inverse ADE, parametric diffusion."""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, ClassVar

import numpy as np

from mcpinns.autodiff.network import ParamSource
from mcpinns.core.rng import RngKey, Stream
from mcpinns.core.sampling import unit_ball_from
from mcpinns.errors import ContractViolation, DomainError
from mcpinns.operators.estimators import (
    EstimatorConfig,
    PdeCoefficients,
    SampleGroup,
    residual_estimate,
)
from mcpinns.oracle.manufactured import (
    PROFILES,
    caputo_exp_decay,
    exact_solution_ade,
    exact_solution_laplacian,
    forcing_ade,
    forcing_laplacian,
)
from mcpinns.oracle.quadrature import MAX_ORACLE_DIM, RadialForcingTable, build_radial_table
from mcpinns.problems.base import (
    Dataset,
    ObservationSet,
    Problem,
    ResidualBatch,
    pde_block,
)

logger = logging.getLogger("mcpinns.problems")

# Sensor counts per dimension for inverse runs.
DEFAULT_SENSORS = {1: 20, 3: 80, 5: 100}


def default_sensor_count(d: int) -> int:
    if d in DEFAULT_SENSORS:
        return DEFAULT_SENSORS[d]
    return 20 * d


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")


def _check_gamma(gamma: float) -> None:
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")


@dataclass
class ForwardLaplacian(Problem):
    """(-Delta)^(alpha/2) u = f in the ball, u = 0 outside."""

    family: ClassVar[str] = "forward_laplacian"

    alpha: float = 1.5

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        super().__post_init__()

    def coefficients(self, params: ParamSource, batch: ResidualBatch) -> PdeCoefficients:
        return PdeCoefficients(alpha=self.alpha)

    def forcing(self, x: np.ndarray, t: np.ndarray | None, inputs: np.ndarray | None) -> np.ndarray:
        return forcing_laplacian(x, self.d, self.alpha)

    def exact(
        self, x: np.ndarray, t: np.ndarray | None = None, inputs: np.ndarray | None = None
    ) -> np.ndarray:
        return exact_solution_laplacian(x, self.d, self.alpha)

    def describe(self) -> dict[str, Any]:
        return {**super().describe(), "alpha": self.alpha}


@dataclass
class ForwardADE(Problem):
    """Time-fractional advection-diffusion with known coefficients.

    The ``smooth`` profile uses the closed-form forcing. The ``parabolic`` profile,
    (1 - |x|^2)_+ e^(-t), takes its spatial forcing from a quadrature table and
    is limited to d <= 3.
    """

    family: ClassVar[str] = "forward_ade"

    alpha: float = 1.5
    gamma: float = 0.5
    c: float = 0.1
    v: tuple[float, ...] | None = None
    profile: str = "smooth"
    n_initial: int = 128

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        _check_gamma(self.gamma)
        if self.profile not in PROFILES:
            raise ContractViolation(f"unknown profile {self.profile!r}; choose from {PROFILES}")
        if self.profile == "parabolic" and self.d > MAX_ORACLE_DIM:
            raise ContractViolation(f"the parabolic profile needs quadrature forcing, d <= {MAX_ORACLE_DIM}")
        if self.v is None:
            self.v = tuple([1.0 / np.sqrt(self.d)] * self.d)
        if len(self.v) != self.d:
            raise ContractViolation(f"velocity has {len(self.v)} components, expected {self.d}")
        super().__post_init__()

    @property
    def time_dependent(self) -> bool:
        return True

    @property
    def velocity(self) -> np.ndarray:
        return np.asarray(self.v, dtype=np.float64)

    @cached_property
    def _parabolic_table(self) -> RadialForcingTable:
        logger.info("building quadrature forcing table (d=%d, alpha=%s)", self.d, self.alpha)
        return build_radial_table(
            lambda p: float(max(1.0 - float(np.dot(p, p)), 0.0)), self.d, self.alpha
        )

    def coefficients(self, params: ParamSource, batch: ResidualBatch) -> PdeCoefficients:
        return PdeCoefficients(alpha=self.alpha, gamma=self.gamma, c=self.c, v=self.velocity)

    def _forcing_with(
        self, x: np.ndarray, t: np.ndarray, alpha: float, gamma: float, c: float, v: np.ndarray
    ) -> np.ndarray:
        if self.profile == "smooth":
            return forcing_ade(x, t, self.d, alpha, gamma, c, v)
        decay = np.exp(-t)
        inside = np.maximum(1.0 - np.sum(x * x, axis=-1), 0.0)
        grad_dot_v = np.where(inside > 0.0, -2.0 * (x @ v), 0.0)
        return (
            caputo_exp_decay(t, gamma) * inside
            + c * decay * self._parabolic_table(x)
            + decay * grad_dot_v
        )

    def forcing(self, x: np.ndarray, t: np.ndarray | None, inputs: np.ndarray | None) -> np.ndarray:
        if t is None:
            raise ContractViolation("ADE forcing needs residual times")
        return self._forcing_with(x, t, self.alpha, self.gamma, self.c, self.velocity)

    def exact(
        self, x: np.ndarray, t: np.ndarray | None = None, inputs: np.ndarray | None = None
    ) -> np.ndarray:
        t = np.full(x.shape[:-1], self.horizon) if t is None else t
        return exact_solution_ade(x, t, self.alpha, self.profile)

    def initial_data(self, key: RngKey) -> ObservationSet:
        """N_g fixed points at t = 0 with g(x) = u(x, 0)."""
        x = unit_ball_from(key.generator(), self.d, self.n_initial)
        t = np.zeros(self.n_initial)
        return ObservationSet(x=x, t=t, values=self.exact(x, t))

    def dataset(self, key: RngKey) -> Dataset:
        return Dataset(d_g=self.initial_data(key.child(0)), d_u=ObservationSet.empty(self.d))

    def describe(self) -> dict[str, Any]:
        return {
            **super().describe(),
            "alpha": self.alpha,
            "gamma": self.gamma,
            "c": self.c,
            "v": list(self.velocity),
            "profile": self.profile,
        }


@dataclass
class InverseADE(ForwardADE):
    """ADE with unknown (alpha, gamma, c, v) identified from sensor data.

    The forcing is known and built from the hidden true coefficients; the
    residual operator uses the trainable ones.
    """

    family: ClassVar[str] = "inverse_ade"

    n_sensors: int | None = None
    initial: dict[str, float] = field(
        default_factory=lambda: {"alpha": 1.7, "gamma": 0.9, "c": 0.5}
    )
    initial_v_range: tuple[float, float] = (0.0, 0.1)

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.n_sensors is None:
            self.n_sensors = default_sensor_count(self.d)
        if self.n_sensors < 1:
            raise ContractViolation("inverse runs need at least one sensor")
        _check_alpha(self.initial["alpha"])
        _check_gamma(self.initial["gamma"])

    def pde_sizes(self) -> dict[str, int]:
        return {"alpha": 1, "gamma": 1, "c": 1, "v": self.d}

    def initial_pde_values(self, key: RngKey) -> dict[str, Any]:
        low, high = self.initial_v_range
        v0 = key.child(Stream.PDE_INIT).generator().uniform(low, high, size=self.d)
        return {
            "alpha": self.initial["alpha"],
            "gamma": self.initial["gamma"],
            "c": self.initial["c"],
            "v": v0,
        }

    @property
    def true_values(self) -> dict[str, Any]:
        return {"alpha": self.alpha, "gamma": self.gamma, "c": self.c, "v": list(self.velocity)}

    def coefficients(self, params: ParamSource, batch: ResidualBatch) -> PdeCoefficients:
        return PdeCoefficients(
            alpha=pde_block(params, "alpha"),
            gamma=pde_block(params, "gamma"),
            c=pde_block(params, "c"),
            v=pde_block(params, "v"),
        )

    def dataset(self, key: RngKey) -> Dataset:
        return Dataset(d_g=self.initial_data(key.child(0)), d_u=make_sensor_data(self, key.child(1)))

    def describe(self) -> dict[str, Any]:
        return {**super().describe(), "family": self.family, "n_sensors": self.n_sensors}


def make_sensor_data(problem: InverseADE, key: RngKey) -> ObservationSet:
    """Noiseless sensors uniform in the ball at t = T, valued by the exact solution."""
    if not isinstance(problem, InverseADE):
        raise ContractViolation("sensor data is generated for inverse problems only")
    n = int(problem.n_sensors or default_sensor_count(problem.d))
    x = unit_ball_from(key.generator(), problem.d, n)
    t = np.full(n, problem.horizon)
    return ObservationSet(x=x, t=t, values=problem.exact(x, t))


@dataclass
class ParametricDiffusion(Problem):
    """(-Delta)^(alpha/2) u + mu u = f(x; alpha0), surrogate over (x, alpha, mu)."""

    family: ClassVar[str] = "parametric"

    alpha_range: tuple[float, float] = (0.5, 1.5)
    mu_range: tuple[float, float] = (-0.5, 0.5)
    alpha0: float = 1.0

    def __post_init__(self) -> None:
        lo, hi = self.alpha_range
        if not 0.0 < lo <= hi < 2.0:
            raise DomainError(f"alpha range must lie in (0, 2), got {self.alpha_range}")
        if self.mu_range[0] > self.mu_range[1]:
            raise DomainError(f"empty mu range {self.mu_range}")
        _check_alpha(self.alpha0)
        super().__post_init__()

    @property
    def n_inputs(self) -> int:
        return 2

    def coefficients(self, params: ParamSource, batch: ResidualBatch) -> PdeCoefficients:
        if batch.inputs is None:
            raise ContractViolation("parametric residual points need (alpha, mu) inputs")
        return PdeCoefficients(alpha=batch.inputs[:, 0], mu=batch.inputs[:, 1])

    def forcing(self, x: np.ndarray, t: np.ndarray | None, inputs: np.ndarray | None) -> np.ndarray:
        return forcing_laplacian(x, self.d, self.alpha0)

    def sample_batch(self, n: int, key: RngKey) -> ResidualBatch:
        """Uniform points plus alpha ~ U(alpha_range), mu ~ U(mu_range) per point."""
        if n < 1:
            raise ContractViolation(f"batch size must be >= 1, got {n}")
        x, _t, gen = self._draw_space_time(n, key)
        alpha = gen.uniform(*self.alpha_range, size=n)
        mu = gen.uniform(*self.mu_range, size=n)
        inputs = np.stack([alpha, mu], axis=-1)
        return ResidualBatch(x=x, forcing=self.forcing(x, None, inputs), inputs=inputs)

    def exact(
        self, x: np.ndarray, t: np.ndarray | None = None, inputs: np.ndarray | None = None
    ) -> np.ndarray | None:
        """Known only on the slice (alpha0, 0)."""
        if inputs is not None and not np.allclose(inputs, [self.alpha0, 0.0]):
            return None
        return exact_solution_laplacian(x, self.d, self.alpha0)

    def reference_inputs(self, n: int) -> np.ndarray:
        return np.tile([self.alpha0, 0.0], (n, 1))

    def test_points(self, key: RngKey, n: int = 1000) -> tuple[np.ndarray, np.ndarray | None]:
        x = unit_ball_from(key.generator(), self.d, n)
        return x, self.reference_inputs(n)

    def aux_at(self, t: np.ndarray | None, n: int) -> np.ndarray | None:
        return self.reference_inputs(n)

    def exact_at(self, x: np.ndarray, aux: np.ndarray | None) -> np.ndarray | None:
        return self.exact(x, None, aux)

    def describe(self) -> dict[str, Any]:
        return {
            **super().describe(),
            "alpha_range": list(self.alpha_range),
            "mu_range": list(self.mu_range),
            "alpha0": self.alpha0,
        }


def parametric_residual(
    surrogate: Any,
    x: np.ndarray,
    alpha: np.ndarray | float,
    mu: np.ndarray | float,
    cfg: EstimatorConfig,
    g: SampleGroup,
    *,
    d: int | None = None,
    alpha0: float = 1.0,
) -> Any:
    """Estimate (-Delta)^(alpha/2) u + mu u - f(x; alpha0) at the point's own alpha."""
    x = np.asarray(x, dtype=np.float64)
    d = d or x.shape[-1]
    lead = x.shape[:-1]
    alpha_arr = np.broadcast_to(np.asarray(alpha, dtype=np.float64), lead)
    mu_arr = np.broadcast_to(np.asarray(mu, dtype=np.float64), lead)
    inputs = np.stack([alpha_arr, mu_arr], axis=-1)
    coeffs = PdeCoefficients(alpha=alpha_arr, mu=mu_arr)
    return residual_estimate(
        surrogate, x, None, coeffs, forcing_laplacian(x, d, alpha0), cfg, g, static_aux=inputs
    )


FAMILIES: dict[str, type[Problem]] = {
    cls.family: cls for cls in (ForwardLaplacian, ForwardADE, InverseADE, ParametricDiffusion)
}


def make_problem(family: str, d: int, **options: Any) -> Problem:
    """Instantiate a problem family by its tag."""
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise ContractViolation(
            f"unknown problem family {family!r}; choose from {sorted(FAMILIES)}"
        ) from None
    return cls(d=d, **options)
