"""Problem families, the boundary ansatz and generated point sets."""

from mcpinns.problems.ansatz import Surrogate
from mcpinns.problems.base import (
    T_MIN_FRACTION,
    Dataset,
    ObservationSet,
    Problem,
    ResidualBatch,
    evaluate,
    make_surrogate,
    pde_block,
)
from mcpinns.problems.families import (
    DEFAULT_SENSORS,
    FAMILIES,
    ForwardADE,
    ForwardLaplacian,
    InverseADE,
    ParametricDiffusion,
    default_sensor_count,
    make_problem,
    make_sensor_data,
    parametric_residual,
)

__all__ = [
    "DEFAULT_SENSORS",
    "FAMILIES",
    "T_MIN_FRACTION",
    "Dataset",
    "ForwardADE",
    "ForwardLaplacian",
    "InverseADE",
    "ObservationSet",
    "ParametricDiffusion",
    "Problem",
    "ResidualBatch",
    "Surrogate",
    "default_sensor_count",
    "evaluate",
    "make_problem",
    "make_sensor_data",
    "make_surrogate",
    "parametric_residual",
    "pde_block",
]
