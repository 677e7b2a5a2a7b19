"""Deterministic reference computations: quadrature and manufactured solutions."""

from mcpinns.oracle.manufactured import (
    PROFILES,
    ConstantField,
    ManufacturedField,
    caputo_exp_decay,
    exact_solution_ade,
    exact_solution_laplacian,
    exp_decay,
    forcing_ade,
    forcing_laplacian,
    monomial_caputo,
    profile_gradient,
)
from mcpinns.oracle.quadrature import (
    MAX_ORACLE_DIM,
    QuadResult,
    QuadSpec,
    RadialForcingTable,
    build_radial_table,
    quad_caputo,
    quad_caputo_with_error,
    quad_frac_laplacian,
    quad_frac_laplacian_with_error,
    radial_integral,
)

__all__ = [
    "MAX_ORACLE_DIM",
    "PROFILES",
    "ConstantField",
    "ManufacturedField",
    "QuadResult",
    "QuadSpec",
    "RadialForcingTable",
    "build_radial_table",
    "caputo_exp_decay",
    "exact_solution_ade",
    "exact_solution_laplacian",
    "exp_decay",
    "forcing_ade",
    "forcing_laplacian",
    "monomial_caputo",
    "profile_gradient",
    "quad_caputo",
    "quad_caputo_with_error",
    "quad_frac_laplacian",
    "quad_frac_laplacian_with_error",
    "radial_integral",
]
