"""Instrumental-variable samplers used by the Monte Carlo estimators.

Each public sampler takes an RngKey and returns the same draws for the same
key. The ``*_from`` variants take a live numpy Generator so several draws can
come from a single stream.
"""

from typing import NamedTuple

import numpy as np

from mcpinns._typing import checked
from mcpinns.core.rng import RngKey
from mcpinns.errors import DomainError

Shape = int | tuple[int, ...] | None


def _shape(size: Shape) -> tuple[int, ...]:
    if size is None:
        return ()
    if isinstance(size, int):
        return (size,)
    return tuple(size)


class BetaPowerDraw(NamedTuple):
    """A Beta(k, 1) draw together with the uniform it was made from."""

    value: np.ndarray | float
    uniform: np.ndarray | float


def uniform_open_left(gen: np.random.Generator, size: Shape = None) -> np.ndarray | float:
    """Uniform draws on (0, 1]."""
    return 1.0 - gen.random(size)


def beta_power(uniform: np.ndarray | float, k: float | np.ndarray) -> np.ndarray | float:
    """Inverse-CDF map U -> U**(1/k) of the Beta(k, 1) law."""
    return np.power(uniform, 1.0 / np.asarray(k, dtype=np.float64))


def unit_sphere_from(gen: np.random.Generator, d: int, size: Shape = None) -> np.ndarray:
    """Uniform directions on S^{d-1}, shape ``size + (d,)``."""
    shape = _shape(size) + (d,)
    draws = gen.standard_normal(shape)
    norms = np.linalg.norm(draws, axis=-1)
    # A zero normal vector has probability zero; redraw it if it ever shows up.
    while np.any(norms == 0.0):
        bad = norms == 0.0
        draws[bad] = gen.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(draws, axis=-1)
    return draws / norms[..., None]


def unit_ball_from(gen: np.random.Generator, d: int, size: Shape = None) -> np.ndarray:
    """Uniform points in the closed unit ball, shape ``size + (d,)``."""
    directions = unit_sphere_from(gen, d, size)
    radii = gen.random(_shape(size)) ** (1.0 / d)
    return directions * np.asarray(radii)[..., None]


@checked
def sample_unit_sphere(d: int, stream: RngKey, size: Shape = None) -> np.ndarray:
    """Uniform direction(s) on the unit sphere S^{d-1}."""
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    return unit_sphere_from(stream.generator(), d, size)


@checked
def sample_beta_power(k: float, stream: RngKey, size: Shape = None) -> BetaPowerDraw:
    """Beta(k, 1) draw(s) by inverse CDF, keeping the underlying uniform(s).

    The retained uniform lets callers rebuild the draw as a differentiable
    function of k.
    """
    if k <= 0.0:
        raise DomainError(f"Beta(k, 1) requires k > 0, got k={k}")
    u = uniform_open_left(stream.generator(), size)
    return BetaPowerDraw(value=beta_power(u, k), uniform=u)


@checked
def sample_unit_ball(d: int, stream: RngKey, size: Shape = None) -> np.ndarray:
    """Uniform point(s) in the unit ball of R^d."""
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    return unit_ball_from(stream.generator(), d, size)
