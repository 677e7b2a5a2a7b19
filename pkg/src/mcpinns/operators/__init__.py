"""Monte Carlo fractional operators and the assembled residual."""

from mcpinns.operators.diagnostics import (
    DIAGNOSTIC_FIELDS,
    CountingField,
    SweepCell,
    caputo_sweep,
    laplacian_reference,
    laplacian_sweep,
)
from mcpinns.operators.estimators import (
    EstimatorConfig,
    Field,
    PdeCoefficients,
    SampleGroup,
    TangentField,
    draw_sample_group,
    frac_laplacian_constant,
    mc_caputo,
    mc_frac_laplacian,
    residual_estimate,
)

__all__ = [
    "DIAGNOSTIC_FIELDS",
    "CountingField",
    "EstimatorConfig",
    "Field",
    "PdeCoefficients",
    "SampleGroup",
    "SweepCell",
    "TangentField",
    "caputo_sweep",
    "draw_sample_group",
    "frac_laplacian_constant",
    "laplacian_reference",
    "laplacian_sweep",
    "mc_caputo",
    "mc_frac_laplacian",
    "residual_estimate",
]
