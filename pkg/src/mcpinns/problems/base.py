"""Problem interface and the point sets a problem hands to the trainer."""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, ClassVar

import numpy as np

from mcpinns.autodiff import tape
from mcpinns.autodiff.network import NetworkSpec, ParamSource, TracedParams
from mcpinns.autodiff.tape import Tensor
from mcpinns.core.rng import RngKey
from mcpinns.core.sampling import uniform_open_left, unit_ball_from
from mcpinns.errors import ContractViolation
from mcpinns.instrumentation import EvalCounter
from mcpinns.operators.estimators import PdeCoefficients
from mcpinns.problems.ansatz import Surrogate

# Residual times start at T_MIN_FRACTION * T, away from the t^-gamma singularity.
T_MIN_FRACTION = 1e-4


@dataclass(frozen=True, eq=False)
class ResidualBatch:
    """Residual points with their forcing values.

    ``t`` is None for time-independent families; ``inputs`` holds per-point
    parametric inputs (alpha, mu) for the parametric family.
    """

    x: np.ndarray
    forcing: np.ndarray
    t: np.ndarray | None = None
    inputs: np.ndarray | None = None

    def __len__(self) -> int:
        return int(self.x.shape[0])

    def take(self, index: slice | np.ndarray) -> "ResidualBatch":
        return ResidualBatch(
            x=self.x[index],
            forcing=self.forcing[index],
            t=None if self.t is None else self.t[index],
            inputs=None if self.inputs is None else self.inputs[index],
        )


@dataclass(frozen=True, eq=False)
class ObservationSet:
    """Points with target values: initial data or sensor measurements."""

    x: np.ndarray
    values: np.ndarray
    t: np.ndarray | None = None

    def __len__(self) -> int:
        return int(self.x.shape[0])

    def aux(self) -> np.ndarray | None:
        return None if self.t is None else self.t[:, None]

    @classmethod
    def empty(cls, d: int) -> "ObservationSet":
        return cls(x=np.zeros((0, d)), values=np.zeros(0))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Initial-condition data D_g and observations D_u.

    Residual points D_f are redrawn every epoch by ``Problem.sample_batch`` and
    are not stored here.
    """

    d_g: ObservationSet
    d_u: ObservationSet

    @property
    def n_g(self) -> int:
        return len(self.d_g)

    @property
    def n_u(self) -> int:
        return len(self.d_u)


def pde_block(params: ParamSource, name: str) -> Tensor:
    """A PDE parameter from either a plain or a traced parameter source."""
    if isinstance(params, TracedParams):
        return params[name]
    return params.get(name)


@dataclass
class Problem(ABC):
    """One problem family on the unit ball.

    Subclasses define the residual operator, forcing, data sets and (when
    known) the exact solution.
    """

    family: ClassVar[str] = ""

    d: int
    network: NetworkSpec = field(init=False)
    horizon: float = field(default=1.0, kw_only=True)

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ContractViolation(f"dimension must be >= 1, got {self.d}")
        self.network = NetworkSpec(input_dim=self.input_dim)

    # -- shape ------------------------------------------------------------

    @property
    def time_dependent(self) -> bool:
        return False

    @property
    def n_inputs(self) -> int:
        """Non-spatial network inputs (time, parametric inputs)."""
        return 1 if self.time_dependent else 0

    @property
    def input_dim(self) -> int:
        return self.d + self.n_inputs

    def with_network(self, hidden_layers: tuple[int, ...], activation: str = "tanh") -> "Problem":
        self.network = NetworkSpec(self.input_dim, tuple(hidden_layers), activation)
        return self

    def pde_sizes(self) -> dict[str, int]:
        """Trainable PDE parameter blocks; empty for forward problems."""
        return {}

    def initial_pde_values(self, key: RngKey) -> dict[str, Any]:
        return {}

    # -- model ------------------------------------------------------------

    def make_surrogate(self, params: ParamSource, counter: EvalCounter | None = None) -> Surrogate:
        return Surrogate(params, self.network, counter)

    @abstractmethod
    def coefficients(self, params: ParamSource, batch: ResidualBatch) -> PdeCoefficients: ...

    @abstractmethod
    def forcing(self, x: np.ndarray, t: np.ndarray | None, inputs: np.ndarray | None) -> np.ndarray: ...

    def exact(
        self, x: np.ndarray, t: np.ndarray | None = None, inputs: np.ndarray | None = None
    ) -> np.ndarray | None:
        """Exact solution at the given points, or None when it is unknown."""
        return None

    def aux_for(self, batch: ResidualBatch) -> np.ndarray | None:
        """Network aux inputs of the batch, excluding time."""
        return batch.inputs

    # -- points -----------------------------------------------------------

    def _draw_space_time(self, n: int, key: RngKey) -> tuple[np.ndarray, np.ndarray | None, Any]:
        gen = key.generator()
        x = unit_ball_from(gen, self.d, n)
        t = None
        if self.time_dependent:
            t_min = T_MIN_FRACTION * self.horizon
            t = t_min + (self.horizon - t_min) * uniform_open_left(gen, n)
        return x, t, gen

    def sample_batch(self, n: int, key: RngKey) -> ResidualBatch:
        """n residual points uniform in the ball (and in (t_min, T]) with forcing."""
        if n < 1:
            raise ContractViolation(f"batch size must be >= 1, got {n}")
        x, t, _gen = self._draw_space_time(n, key)
        return ResidualBatch(x=x, t=t, forcing=self.forcing(x, t, None))

    def dataset(self, key: RngKey) -> Dataset:
        return Dataset(d_g=ObservationSet.empty(self.d), d_u=ObservationSet.empty(self.d))

    def test_points(self, key: RngKey, n: int = 1000) -> tuple[np.ndarray, np.ndarray | None]:
        """Fixed evaluation set for the relative-L2 report: (x, aux)."""
        gen = key.generator()
        x = unit_ball_from(gen, self.d, n)
        if self.time_dependent:
            return x, (self.horizon * gen.random(n))[:, None]
        return x, None

    def aux_at(self, t: np.ndarray | None, n: int) -> np.ndarray | None:
        """Network aux inputs for n points at times ``t`` (reporting slices)."""
        if not self.time_dependent:
            return None
        t = np.full(n, self.horizon) if t is None else np.asarray(t, dtype=np.float64)
        return t[:, None]

    def exact_at(self, x: np.ndarray, aux: np.ndarray | None) -> np.ndarray | None:
        """Exact solution at test points given in network-aux form."""
        t = aux[:, 0] if self.time_dependent and aux is not None else None
        return self.exact(x, t)

    def describe(self) -> dict[str, Any]:
        return {"family": self.family, "d": self.d, "horizon": self.horizon}


def evaluate(surrogate: Surrogate, x: np.ndarray, aux: np.ndarray | None) -> np.ndarray:
    """Plain (untraced) surrogate values."""
    return np.asarray(tape.value_of(surrogate(x, aux)))


def make_surrogate(
    problem: Problem, params: ParamSource, counter: EvalCounter | None = None
) -> Surrogate:
    """The ansatz-wrapped surrogate of ``problem`` over ``params``."""
    return problem.make_surrogate(params, counter)
