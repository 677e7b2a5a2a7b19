"""Accuracy metrics against known solutions."""

import numpy as np

from mcpinns.autodiff.network import ParamVector
from mcpinns.core.rng import RngKey, Stream
from mcpinns.errors import DomainError
from mcpinns.problems.base import Problem, evaluate

DEFAULT_TEST_POINTS = 1000
GRID_POINTS = 101


def relative_l2(predicted: np.ndarray, exact: np.ndarray) -> float:
    """||predicted - exact||_2 / ||exact||_2 over a discrete point set."""
    predicted = np.asarray(predicted, dtype=np.float64).ravel()
    exact = np.asarray(exact, dtype=np.float64).ravel()
    norm = float(np.linalg.norm(exact))
    if norm == 0.0:
        raise DomainError("relative L2 error is undefined for a zero reference")
    return float(np.linalg.norm(predicted - exact)) / norm


def surrogate_relative_l2(
    problem: Problem, params: ParamVector, root: RngKey, n: int = DEFAULT_TEST_POINTS
) -> float | None:
    """Relative L2 error of the surrogate on the seeded test set, or None without an exact solution."""
    x, aux = problem.test_points(root.child(Stream.TEST), n)
    exact = problem.exact_at(x, aux)
    if exact is None:
        return None
    return relative_l2(evaluate(problem.make_surrogate(params), x, aux), exact)


def solution_grid(
    problem: Problem, params: ParamVector, n: int = GRID_POINTS
) -> tuple[list[str], np.ndarray, np.ndarray, np.ndarray | None]:
    """Surrogate values on a regular slice for external plotting.

    For d >= 2 the slice spans the first two coordinates with the rest at 0,
    at t = T (time-dependent) or on the reference inputs (parametric). For
    d = 1 it is the (x1, t) plane when time-dependent and a line otherwise.
    Returns (coordinate names, coordinates, surrogate values, exact values).
    """
    axis = np.linspace(-1.0, 1.0, n)
    t = None
    if problem.d == 1 and problem.time_dependent:
        xs, ts = np.meshgrid(axis, np.linspace(0.0, problem.horizon, n), indexing="ij")
        x = xs.reshape(-1, 1)
        t = ts.ravel()
        names, coords = ["x1", "t"], np.column_stack([x[:, 0], t])
    elif problem.d == 1:
        x = axis[:, None]
        names, coords = ["x1"], x
    else:
        a, b = np.meshgrid(axis, axis, indexing="ij")
        x = np.zeros((n * n, problem.d))
        x[:, 0], x[:, 1] = a.ravel(), b.ravel()
        names, coords = ["x1", "x2"], x[:, :2]
    aux = problem.aux_at(t, len(x))
    predicted = evaluate(problem.make_surrogate(params), x, aux)
    return names, coords, predicted, problem.exact_at(x, aux)
