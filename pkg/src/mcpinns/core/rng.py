"""Path-keyed, counter-based random streams.

A stream is identified by a root seed and a path of non-negative integers
(for example epoch, point index, group index). The path is fed to numpy's
SeedSequence as its spawn key and drives a Philox generator, so the draws of
one stream never depend on how many other streams were consumed before it or
on which thread consumes it.
"""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from mcpinns.errors import DomainError

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class RngKey:
    """Identifier of one reproducible random stream."""

    root_seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.root_seed < 0 or self.root_seed > _SEED_MASK:
            raise DomainError(f"root seed must be a 64-bit unsigned integer, got {self.root_seed}")
        if any(p < 0 for p in self.path):
            raise DomainError(f"stream path entries must be non-negative, got {self.path}")

    def child(self, *indices: int) -> "RngKey":
        """Key of the sub-stream reached by appending indices to the path."""
        return RngKey(self.root_seed, self.path + tuple(int(i) for i in indices))

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(entropy=self.root_seed, spawn_key=self.path)

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        return np.random.Generator(np.random.Philox(self.seed_sequence()))

    def __str__(self) -> str:
        path = "/".join(str(p) for p in self.path) or "-"
        return f"RngKey({self.root_seed}:{path})"


class Stream(IntEnum):
    """First path entry of every stream a run draws from."""

    INIT = 0
    EPOCH = 1
    DATA = 2
    TEST = 3
    PDE_INIT = 4
    ABC = 5
    ESTIMATE = 6
