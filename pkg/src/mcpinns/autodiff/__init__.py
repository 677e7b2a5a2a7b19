"""Surrogate network and the differentiation engine behind it."""

from mcpinns.autodiff.checkpoint import load_checkpoint, save_checkpoint
from mcpinns.autodiff.network import (
    EvalRecord,
    NetworkSpec,
    ParamVector,
    Slot,
    TracedParams,
    build_layout,
    directional_derivative,
    forward,
    forward_with_tangent,
    grad_wrt_params,
    init_params,
    record,
)
from mcpinns.autodiff.tape import Node, Tensor

__all__ = [
    "EvalRecord",
    "NetworkSpec",
    "Node",
    "ParamVector",
    "Slot",
    "Tensor",
    "TracedParams",
    "build_layout",
    "directional_derivative",
    "forward",
    "forward_with_tangent",
    "grad_wrt_params",
    "init_params",
    "load_checkpoint",
    "record",
    "save_checkpoint",
]
