"""Array-valued reverse-mode differentiation over a fixed primitive set.

Every primitive accepts plain numbers, numpy arrays or ``Node`` objects. When
none of the inputs is a Node the primitive simply returns the numpy result, so
the same estimator code runs untraced (fast sampling studies) and traced
(training). Traced results are Nodes that remember their parents together with
a vector-Jacobian product for each parent; ``backward`` walks them in reverse
topological order.
"""

from collections.abc import Callable, Iterable, Sequence
from typing import Any, Union

import numpy as np
from scipy import special as sp_special

from mcpinns.core.special import gamma as _gamma
from mcpinns.errors import ContractViolation

VJP = Callable[[np.ndarray], np.ndarray]

SUPPORTED_PRIMITIVES = frozenset(
    {
        "leaf",
        "add",
        "sub",
        "mul",
        "div",
        "neg",
        "power",
        "exp",
        "log",
        "tanh",
        "relu",
        "maximum",
        "matmul",
        "sum",
        "reshape",
        "concat",
        "getitem",
        "gamma",
        "broadcast",
    }
)


class Node:
    """One value on the tape."""

    # Make numpy defer binary operators to the reflected Node methods.
    __array_ufunc__ = None
    __slots__ = ("value", "parents", "op", "name")

    def __init__(
        self,
        value: Any,
        parents: Sequence[tuple["Node", VJP]] = (),
        op: str = "leaf",
        name: str | None = None,
    ):
        self.value = np.asarray(value, dtype=np.float64)
        self.parents = tuple(parents)
        self.op = op
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"Node({self.op}{label}, shape={self.shape})"

    def __add__(self, other: Any) -> "Tensor":
        return add(self, other)

    def __radd__(self, other: Any) -> "Tensor":
        return add(other, self)

    def __sub__(self, other: Any) -> "Tensor":
        return sub(self, other)

    def __rsub__(self, other: Any) -> "Tensor":
        return sub(other, self)

    def __mul__(self, other: Any) -> "Tensor":
        return mul(self, other)

    def __rmul__(self, other: Any) -> "Tensor":
        return mul(other, self)

    def __truediv__(self, other: Any) -> "Tensor":
        return div(self, other)

    def __rtruediv__(self, other: Any) -> "Tensor":
        return div(other, self)

    def __neg__(self) -> "Tensor":
        return neg(self)

    def __pow__(self, exponent: float) -> "Tensor":
        return power(self, exponent)

    def __matmul__(self, other: Any) -> "Tensor":
        return matmul(self, other)

    def __getitem__(self, index: Any) -> "Tensor":
        return getitem(self, index)


Tensor = Union[Node, np.ndarray, float]


def leaf(value: Any, name: str | None = None) -> Node:
    """A differentiable input."""
    return Node(value, op="leaf", name=name)


def is_traced(*values: Any) -> bool:
    return any(isinstance(v, Node) for v in values)


def value_of(x: Tensor) -> np.ndarray:
    """Primal value of a tensor as an array."""
    if isinstance(x, Node):
        return x.value
    return np.asarray(x, dtype=np.float64)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _make(value: np.ndarray, op: str, links: Iterable[tuple[Any, VJP]]) -> Node:
    parents = [(x, vjp) for x, vjp in links if isinstance(x, Node)]
    return Node(value, parents, op=op)


# -- elementwise arithmetic -------------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    if not is_traced(a, b):
        return np.add(a, b)
    av, bv = value_of(a), value_of(b)
    return _make(
        av + bv,
        "add",
        [(a, lambda g: _unbroadcast(g, av.shape)), (b, lambda g: _unbroadcast(g, bv.shape))],
    )


def sub(a: Tensor, b: Tensor) -> Tensor:
    if not is_traced(a, b):
        return np.subtract(a, b)
    av, bv = value_of(a), value_of(b)
    return _make(
        av - bv,
        "sub",
        [(a, lambda g: _unbroadcast(g, av.shape)), (b, lambda g: _unbroadcast(-g, bv.shape))],
    )


def mul(a: Tensor, b: Tensor) -> Tensor:
    if not is_traced(a, b):
        return np.multiply(a, b)
    av, bv = value_of(a), value_of(b)
    return _make(
        av * bv,
        "mul",
        [
            (a, lambda g: _unbroadcast(g * bv, av.shape)),
            (b, lambda g: _unbroadcast(g * av, bv.shape)),
        ],
    )


def div(a: Tensor, b: Tensor) -> Tensor:
    if not is_traced(a, b):
        return np.divide(a, b)
    av, bv = value_of(a), value_of(b)
    out = av / bv
    return _make(
        out,
        "div",
        [
            (a, lambda g: _unbroadcast(g / bv, av.shape)),
            (b, lambda g: _unbroadcast(-g * out / bv, bv.shape)),
        ],
    )


def neg(a: Tensor) -> Tensor:
    if not is_traced(a):
        return np.negative(a)
    return _make(-value_of(a), "neg", [(a, lambda g: -g)])


def power(a: Tensor, exponent: float) -> Tensor:
    """a**exponent for a constant exponent."""
    if not is_traced(a):
        return np.power(a, exponent)
    av = value_of(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = exponent * av ** (exponent - 1.0)
    # Zero slope at a == 0 (the ansatz boundary), where the power may be singular.
    slope = np.where(av == 0.0, 0.0 if exponent != 1.0 else 1.0, slope)
    return _make(av**exponent, "power", [(a, lambda g: g * slope)])


def exp(a: Tensor) -> Tensor:
    if not is_traced(a):
        return np.exp(a)
    out = np.exp(value_of(a))
    return _make(out, "exp", [(a, lambda g: g * out)])


def log(a: Tensor) -> Tensor:
    if not is_traced(a):
        return np.log(a)
    av = value_of(a)
    return _make(np.log(av), "log", [(a, lambda g: g / av)])


def tanh(a: Tensor) -> Tensor:
    if not is_traced(a):
        return np.tanh(a)
    out = np.tanh(value_of(a))
    return _make(out, "tanh", [(a, lambda g: g * (1.0 - out * out))])


def relu(a: Tensor) -> Tensor:
    if not is_traced(a):
        return np.maximum(a, 0.0)
    av = value_of(a)
    active = av > 0.0
    return _make(np.where(active, av, 0.0), "relu", [(a, lambda g: g * active)])


def maximum(a: Tensor, floor: float | np.ndarray) -> Tensor:
    """Elementwise max(a, floor) with a constant floor; no gradient where clamped."""
    if not is_traced(a):
        return np.maximum(a, floor)
    av = value_of(a)
    active = av > floor
    return _make(np.where(active, av, floor), "maximum", [(a, lambda g: g * active)])


def gamma(a: Tensor) -> Tensor:
    """Gamma function as a primitive; derivative Gamma(x) * digamma(x)."""
    if not is_traced(a):
        return _gamma(a)
    av = value_of(a)
    out = np.asarray(_gamma(av), dtype=np.float64)
    return _make(out, "gamma", [(a, lambda g: g * out * sp_special.digamma(av))])


# -- structural -------------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of 2-D operands."""
    if not is_traced(a, b):
        return np.matmul(a, b)
    av, bv = value_of(a), value_of(b)
    if av.ndim != 2 or bv.ndim != 2:
        raise ContractViolation(f"matmul expects 2-D operands, got {av.shape} and {bv.shape}")
    return _make(av @ bv, "matmul", [(a, lambda g: g @ bv.T), (b, lambda g: av.T @ g)])


def sum(a: Tensor, axis: int | tuple[int, ...] | None = None) -> Tensor:  # noqa: A001
    if not is_traced(a):
        return np.sum(a, axis=axis)
    av = value_of(a)

    def vjp(g: np.ndarray) -> np.ndarray:
        if axis is not None:
            g = np.expand_dims(g, axis)
        return np.broadcast_to(g, av.shape).copy()

    return _make(np.sum(av, axis=axis), "sum", [(a, vjp)])


def mean(a: Tensor, axis: int | None = None) -> Tensor:
    count = value_of(a).size if axis is None else value_of(a).shape[axis]
    return div(sum(a, axis=axis), float(count))


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    if not is_traced(a):
        return np.reshape(a, shape)
    av = value_of(a)
    return _make(av.reshape(shape), "reshape", [(a, lambda g: g.reshape(av.shape))])


def broadcast_to(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    if not is_traced(a):
        return np.broadcast_to(a, shape)
    av = value_of(a)
    return _make(
        np.broadcast_to(av, shape).copy(),
        "broadcast",
        [(a, lambda g: _unbroadcast(g, av.shape))],
    )


def concat(parts: Sequence[Tensor], axis: int = -1) -> Tensor:
    if not is_traced(*parts):
        return np.concatenate([np.asarray(p, dtype=np.float64) for p in parts], axis=axis)
    values = [value_of(p) for p in parts]
    bounds = np.cumsum([v.shape[axis] for v in values])[:-1]

    def piece(i: int) -> VJP:
        return lambda g: np.split(g, bounds, axis=axis)[i]

    return _make(
        np.concatenate(values, axis=axis),
        "concat",
        [(p, piece(i)) for i, p in enumerate(parts)],
    )


def getitem(a: Tensor, index: Any) -> Tensor:
    if not is_traced(a):
        return np.asarray(a)[index]
    av = value_of(a)

    def vjp(g: np.ndarray) -> np.ndarray:
        full = np.zeros_like(av)
        np.add.at(full, index, g)
        return full

    return _make(av[index], "getitem", [(a, vjp)])


# -- reverse sweep ----------------------------------------------------------


def _topological_order(root: Node) -> list[Node]:
    order: list[Node] = []
    seen: set[int] = set()
    stack: list[tuple[Node, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        if node.op not in SUPPORTED_PRIMITIVES:
            raise ContractViolation(f"unsupported primitive on tape: {node.op!r}")
        stack.append((node, True))
        for parent, _ in node.parents:
            if id(parent) not in seen:
                stack.append((parent, False))
    return order


def backward(root: Node, seed: np.ndarray | None = None) -> dict[int, np.ndarray]:
    """Reverse sweep from ``root``; returns gradients keyed by ``id(node)``."""
    grads: dict[int, np.ndarray] = {
        id(root): np.ones_like(root.value) if seed is None else np.asarray(seed, dtype=np.float64)
    }
    for node in reversed(_topological_order(root)):
        g = grads.get(id(node))
        if g is None:
            continue
        for parent, vjp in node.parents:
            contribution = vjp(g)
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + contribution
            else:
                grads[key] = contribution
    return grads
