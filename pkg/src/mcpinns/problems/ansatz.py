"""Boundary-enforcing surrogate: u(x, aux) = relu(1 - |x|^2) * body(x, aux)."""

import numpy as np

from mcpinns.autodiff import tape
from mcpinns.autodiff.network import NetworkSpec, ParamSource, forward, forward_with_tangent
from mcpinns.autodiff.tape import Tensor
from mcpinns.instrumentation import EvalCounter


class Surrogate:
    """The ansatz-wrapped network as a field ``u(x, aux)``.

    The output is exactly zero for |x| >= 1, whatever the body returns there.
    Every call is one network forward call on the counter.
    """

    def __init__(self, params: ParamSource, spec: NetworkSpec, counter: EvalCounter | None = None):
        self.params = params
        self.spec = spec
        self.counter = counter

    def _inputs(self, x: Tensor, aux: Tensor | None) -> Tensor:
        if aux is None:
            return x
        return tape.concat([x, aux], axis=-1)

    @staticmethod
    def _inside(x: Tensor) -> Tensor:
        return tape.sub(1.0, tape.sum(tape.mul(x, x), axis=-1))

    def __call__(self, x: Tensor, aux: Tensor | None = None) -> Tensor:
        body = forward(self.params, self.spec, self._inputs(x, aux), self.counter)
        return tape.mul(tape.relu(self._inside(x)), body)

    def with_tangent(
        self, x: Tensor, aux: Tensor | None, direction: Tensor
    ) -> tuple[Tensor, Tensor]:
        """Value and direction . grad_x u, by the product rule on the ansatz."""
        body, d_body = forward_with_tangent(
            self.params, self.spec, self._inputs(x, aux), direction, self.counter
        )
        inside = self._inside(x)
        mask = (tape.value_of(inside) > 0.0).astype(np.float64)
        multiplier = tape.relu(inside)
        d_multiplier = tape.mul(-2.0 * mask, tape.sum(tape.mul(x, direction), axis=-1))
        value = tape.mul(multiplier, body)
        tangent = tape.add(tape.mul(d_multiplier, body), tape.mul(multiplier, d_body))
        return value, tangent

    def at(self, x: np.ndarray, alpha: float | np.ndarray, mu: float | np.ndarray) -> Tensor:
        """Parametric evaluation u(x | alpha, mu)."""
        x = np.asarray(x, dtype=np.float64)
        lead = x.shape[:-1]
        aux = np.stack(
            [np.broadcast_to(alpha, lead), np.broadcast_to(mu, lead)], axis=-1
        ).astype(np.float64)
        return self(x, aux)
