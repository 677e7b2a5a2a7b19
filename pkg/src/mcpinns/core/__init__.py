"""Special functions, random streams and samplers."""

from mcpinns.core.rng import RngKey, Stream
from mcpinns.core.sampling import (
    BetaPowerDraw,
    beta_power,
    sample_beta_power,
    sample_unit_ball,
    sample_unit_sphere,
    unit_ball_from,
    unit_sphere_from,
    uniform_open_left,
)
from mcpinns.core.special import (
    FracConstants,
    frac_constants,
    gamma,
    log_abs_gamma,
    mittag_leffler,
    sphere_area,
)

__all__ = [
    "RngKey",
    "Stream",
    "BetaPowerDraw",
    "beta_power",
    "sample_beta_power",
    "sample_unit_ball",
    "sample_unit_sphere",
    "uniform_open_left",
    "unit_ball_from",
    "unit_sphere_from",
    "FracConstants",
    "frac_constants",
    "gamma",
    "log_abs_gamma",
    "mittag_leffler",
    "sphere_area",
]
