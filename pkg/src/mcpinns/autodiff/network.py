"""Multilayer-perceptron surrogate on top of the tape.

The network and any trainable PDE parameters live in one flat ``ParamVector``.
Evaluations either read it directly (plain numpy) or through a
``TracedParams`` view whose entries are tape leaves, in which case the result
can be differentiated with ``grad_wrt_params``.
"""

from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from mcpinns._typing import checked
from mcpinns.autodiff import tape
from mcpinns.autodiff.tape import Node, Tensor
from mcpinns.core.rng import RngKey
from mcpinns.errors import ContractViolation
from mcpinns.instrumentation import EvalCounter

ACTIVATIONS: dict[str, Callable[[Tensor], Tensor]] = {
    "tanh": tape.tanh,
    "identity": lambda z: z,
}

# Order in which PDE parameters are appended after the network weights.
PDE_PARAMETER_ORDER = ("alpha", "gamma", "c", "v")


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture of the surrogate body."""

    input_dim: int
    hidden_layers: tuple[int, ...] = (64, 64, 64, 64)
    activation: str = "tanh"
    output_dim: int = 1

    def __post_init__(self) -> None:
        if self.input_dim < 1:
            raise ContractViolation(f"input_dim must be positive, got {self.input_dim}")
        if any(w < 1 for w in self.hidden_layers):
            raise ContractViolation(f"hidden widths must be positive, got {self.hidden_layers}")
        if self.output_dim != 1:
            raise ContractViolation("the surrogate has a single scalar output")
        if self.activation not in ACTIVATIONS:
            raise ContractViolation(
                f"unknown activation {self.activation!r}; choose from {sorted(ACTIVATIONS)}"
            )

    @property
    def widths(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_layers, self.output_dim)

    @property
    def n_layers(self) -> int:
        return len(self.widths) - 1

    def parameter_count(self) -> int:
        w = self.widths
        return sum(w[i] * w[i + 1] + w[i + 1] for i in range(self.n_layers))


@dataclass(frozen=True)
class Slot:
    """Location of one named block inside the flat parameter array."""

    name: str
    offset: int
    shape: tuple[int, ...]

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64)) if self.shape else 1

    @property
    def stop(self) -> int:
        return self.offset + self.size


def build_layout(spec: NetworkSpec, pde_sizes: Mapping[str, int] | None = None) -> tuple[Slot, ...]:
    """Weights and biases layer by layer, then PDE parameters in canonical order."""
    slots: list[Slot] = []
    offset = 0
    w = spec.widths
    for i in range(spec.n_layers):
        for name, shape in ((f"W{i}", (w[i], w[i + 1])), (f"b{i}", (w[i + 1],))):
            slot = Slot(name, offset, shape)
            slots.append(slot)
            offset = slot.stop
    pde_sizes = dict(pde_sizes or {})
    unknown = set(pde_sizes) - set(PDE_PARAMETER_ORDER)
    if unknown:
        raise ContractViolation(f"unknown PDE parameters: {sorted(unknown)}")
    for name in PDE_PARAMETER_ORDER:
        if name in pde_sizes:
            shape: tuple[int, ...] = (pde_sizes[name],) if name == "v" else ()
            slot = Slot(name, offset, shape)
            slots.append(slot)
            offset = slot.stop
    return tuple(slots)


@dataclass(frozen=True, eq=False)
class ParamVector:
    """Every trainable scalar of a run in one flat float64 array."""

    values: np.ndarray
    layout: tuple[Slot, ...]
    _index: dict[str, Slot] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64, copy=True)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_index", {s.name: s for s in self.layout})
        expected = self.layout[-1].stop if self.layout else 0
        if values.ndim != 1 or values.size != expected:
            raise ContractViolation(
                f"parameter array has {values.size} entries, layout needs {expected}"
            )

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def trainable_pde(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.layout if s.name in PDE_PARAMETER_ORDER)

    def has(self, name: str) -> bool:
        return name in self._index

    def slot(self, name: str) -> Slot:
        try:
            return self._index[name]
        except KeyError:
            raise ContractViolation(f"no parameter block named {name!r}") from None

    def get(self, name: str) -> np.ndarray:
        s = self.slot(name)
        return self.values[s.offset : s.stop].reshape(s.shape)

    def unpack(self) -> dict[str, np.ndarray]:
        return {s.name: self.get(s.name) for s in self.layout}

    @classmethod
    def pack(cls, layout: tuple[Slot, ...], arrays: Mapping[str, Any]) -> "ParamVector":
        flat = np.zeros(layout[-1].stop if layout else 0)
        for s in layout:
            block = np.asarray(arrays[s.name], dtype=np.float64)
            if block.shape != s.shape:
                raise ContractViolation(f"block {s.name!r} has shape {block.shape}, expected {s.shape}")
            flat[s.offset : s.stop] = block.ravel()
        return cls(flat, layout)

    def with_values(self, values: np.ndarray) -> "ParamVector":
        return ParamVector(values, self.layout)

    def with_block(self, name: str, value: Any) -> "ParamVector":
        s = self.slot(name)
        block = np.broadcast_to(np.asarray(value, dtype=np.float64), s.shape)
        flat = self.values.copy()
        flat[s.offset : s.stop] = block.ravel()
        return ParamVector(flat, self.layout)


class TracedParams(Mapping[str, Node]):
    """Tape leaves for every block of a ParamVector."""

    def __init__(self, params: ParamVector):
        self.params = params
        self._leaves = {s.name: tape.leaf(params.get(s.name), name=s.name) for s in params.layout}

    def __getitem__(self, name: str) -> Node:
        return self._leaves[name]

    def __iter__(self):  # type: ignore[override]
        return iter(self._leaves)

    def __len__(self) -> int:
        return len(self._leaves)


ParamSource = ParamVector | TracedParams


def _blocks(params: ParamSource) -> Mapping[str, Tensor]:
    if isinstance(params, TracedParams):
        return params
    return params.unpack()


@checked
def init_params(
    spec: NetworkSpec,
    seed: RngKey,
    pde_sizes: Mapping[str, int] | None = None,
) -> ParamVector:
    """Glorot-uniform weights, zero biases, zero-filled PDE slots.

    PDE parameter blocks are reserved here and set by the caller afterwards
    with ``ParamVector.with_block``.
    """
    layout = build_layout(spec, pde_sizes)
    gen = seed.generator()
    arrays: dict[str, np.ndarray] = {}
    for slot in layout:
        if slot.name.startswith("W"):
            fan_in, fan_out = slot.shape
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            arrays[slot.name] = gen.uniform(-limit, limit, size=slot.shape)
        else:
            arrays[slot.name] = np.zeros(slot.shape)
    return ParamVector.pack(layout, arrays)


def _check_input(spec: NetworkSpec, inputs: Tensor) -> tuple[int, ...]:
    shape = tape.value_of(inputs).shape
    if not shape or shape[-1] != spec.input_dim:
        raise ContractViolation(
            f"network expects inputs with last dimension {spec.input_dim}, got shape {shape}"
        )
    return shape[:-1]


def forward(
    params: ParamSource,
    spec: NetworkSpec,
    inputs: Tensor,
    counter: EvalCounter | None = None,
) -> Tensor:
    """Evaluate the MLP on inputs of shape ``(..., input_dim)``; output has shape ``(...)``."""
    lead = _check_input(spec, inputs)
    if counter is not None:
        counter.record(int(np.prod(lead, dtype=np.int64)))
    blocks = _blocks(params)
    act = ACTIVATIONS[spec.activation]
    h = tape.reshape(inputs, (-1, spec.input_dim))
    for i in range(spec.n_layers):
        h = tape.add(tape.matmul(h, blocks[f"W{i}"]), blocks[f"b{i}"])
        if i < spec.n_layers - 1:
            h = act(h)
    return tape.reshape(h, lead)


def forward_with_tangent(
    params: ParamSource,
    spec: NetworkSpec,
    inputs: Tensor,
    direction: Tensor,
    counter: EvalCounter | None = None,
) -> tuple[Tensor, Tensor]:
    """Value and input-directional derivative in one pass (forward-mode tangents).

    ``direction`` covers the spatial slots only (its last dimension is at most
    ``input_dim``) and is padded with zeros for the time and parametric slots.
    The tangent ops are recorded like any other, so the result stays
    differentiable with respect to the parameters.
    """
    lead = _check_input(spec, inputs)
    dir_value = tape.value_of(direction)
    if dir_value.ndim == 0 or dir_value.shape[-1] > spec.input_dim:
        raise ContractViolation(
            f"direction of shape {dir_value.shape} does not fit input_dim {spec.input_dim}"
        )
    pad = spec.input_dim - dir_value.shape[-1]
    if pad:
        zeros = np.zeros(dir_value.shape[:-1] + (pad,))
        direction = tape.concat([direction, zeros], axis=-1)
    direction = tape.broadcast_to(direction, lead + (spec.input_dim,))

    if counter is not None:
        counter.record(int(np.prod(lead, dtype=np.int64)))
    blocks = _blocks(params)
    h = tape.reshape(inputs, (-1, spec.input_dim))
    dh = tape.reshape(direction, (-1, spec.input_dim))
    for i in range(spec.n_layers):
        weight = blocks[f"W{i}"]
        h = tape.add(tape.matmul(h, weight), blocks[f"b{i}"])
        dh = tape.matmul(dh, weight)
        if i < spec.n_layers - 1:
            if spec.activation == "tanh":
                h = tape.tanh(h)
                dh = tape.mul(tape.sub(1.0, tape.mul(h, h)), dh)
            else:
                h = ACTIVATIONS[spec.activation](h)
    return tape.reshape(h, lead), tape.reshape(dh, lead)


def directional_derivative(
    params: ParamSource,
    spec: NetworkSpec,
    inputs: Tensor,
    direction: Tensor,
    counter: EvalCounter | None = None,
) -> Tensor:
    """direction . grad_x of the network output at ``inputs``."""
    return forward_with_tangent(params, spec, inputs, direction, counter)[1]


@dataclass
class EvalRecord:
    """A recorded scalar computation over one ParamVector.

    ``build`` is kept so the primal value can be reproduced by replaying it.
    """

    params: ParamVector
    traced: TracedParams
    output: Node
    build: Callable[[TracedParams], Tensor]

    @property
    def value(self) -> float:
        return float(self.output.value)

    def replay(self) -> float:
        """Re-run the computation on fresh leaves and return its primal value."""
        return record(self.params, self.build).value


def record(params: ParamVector, build: Callable[[TracedParams], Tensor]) -> EvalRecord:
    """Trace ``build`` against leaves of ``params``; it must return a scalar."""
    traced = TracedParams(params)
    out = build(traced)
    if not isinstance(out, Node):
        # The computation ignored every parameter; keep a constant node so the
        # gradient comes out as zeros.
        out = Node(out, op="leaf")
    if out.value.shape != ():
        raise ContractViolation(f"recorded computation must be scalar, got shape {out.value.shape}")
    return EvalRecord(params=params, traced=traced, output=out, build=build)


def grad_wrt_params(rec: EvalRecord) -> np.ndarray:
    """Exact reverse-mode gradient of the recorded scalar, in ParamVector layout."""
    grads = tape.backward(rec.output)
    flat = np.zeros(len(rec.params))
    for slot in rec.params.layout:
        g = grads.get(id(rec.traced[slot.name]))
        if g is not None:
            flat[slot.offset : slot.stop] = np.asarray(g).ravel()
    return flat
