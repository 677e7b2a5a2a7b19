"""Plain-text parameter checkpoints.

Layout::

    # mcpinns-checkpoint v1
    # widths: 2,64,64,64,64,1
    # activation: tanh
    # trainable_pde: alpha,gamma,c,v
    # pde_layout: alpha:16961:1,gamma:16962:1,c:16963:1,v:16964:1
    <one float per line, repr round-trip precision>

``trainable_pde`` and ``pde_layout`` are empty when no PDE parameter is trained.
"""

import os
from pathlib import Path

import numpy as np

from mcpinns.autodiff.network import NetworkSpec, ParamVector, build_layout
from mcpinns.errors import ContractViolation

MAGIC = "# mcpinns-checkpoint v1"


def save_checkpoint(path: str | Path, params: ParamVector, spec: NetworkSpec) -> Path:
    """Write ``params`` atomically (temp file then rename)."""
    path = Path(path)
    pde_slots = [s for s in params.layout if s.name in params.trainable_pde]
    lines = [
        MAGIC,
        "# widths: " + ",".join(str(w) for w in spec.widths),
        f"# activation: {spec.activation}",
        "# trainable_pde: " + ",".join(s.name for s in pde_slots),
        "# pde_layout: " + ",".join(f"{s.name}:{s.offset}:{s.size}" for s in pde_slots),
    ]
    lines.extend(repr(float(v)) for v in params.values)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    os.replace(tmp, path)
    return path


def _header_value(line: str, key: str) -> str:
    prefix = f"# {key}:"
    if not line.startswith(prefix):
        raise ContractViolation(f"checkpoint header expected {prefix!r}, got {line!r}")
    return line[len(prefix) :].strip()


def load_checkpoint(
    path: str | Path, expected: NetworkSpec | None = None
) -> tuple[ParamVector, NetworkSpec]:
    """Read a checkpoint; if ``expected`` is given, the header must match it."""
    lines = Path(path).read_text().splitlines()
    if len(lines) < 5 or lines[0].strip() != MAGIC:
        raise ContractViolation(f"{path} is not an mcpinns checkpoint")
    widths = tuple(int(w) for w in _header_value(lines[1], "widths").split(","))
    activation = _header_value(lines[2], "activation")
    names = [n for n in _header_value(lines[3], "trainable_pde").split(",") if n]
    pde_sizes: dict[str, int] = {}
    for entry in filter(None, _header_value(lines[4], "pde_layout").split(",")):
        name, _offset, size = entry.split(":")
        pde_sizes[name] = int(size)
    if sorted(pde_sizes) != sorted(names):
        raise ContractViolation("checkpoint pde_layout disagrees with trainable_pde")

    spec = NetworkSpec(
        input_dim=widths[0],
        hidden_layers=widths[1:-1],
        activation=activation,
        output_dim=widths[-1],
    )
    if expected is not None and (expected.widths, expected.activation) != (spec.widths, spec.activation):
        raise ContractViolation(
            f"checkpoint network {spec.widths}/{spec.activation} does not match "
            f"expected {expected.widths}/{expected.activation}"
        )
    values = np.array([float(v) for v in lines[5:] if v.strip()])
    return ParamVector(values, build_layout(spec, pde_sizes)), spec
