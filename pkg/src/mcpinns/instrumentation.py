"""Evaluation counters and run statistics."""

import time
from dataclasses import dataclass, field
from typing import Any

import psutil


@dataclass
class EvalCounter:
    """Counts surrogate forward calls and the points evaluated by them.

    Each worker owns its own counter; totals are combined with ``merge``.
    """

    calls: int = 0
    points: int = 0

    def record(self, n_points: int) -> None:
        self.calls += 1
        self.points += n_points

    def merge(self, other: "EvalCounter") -> None:
        self.calls += other.calls
        self.points += other.points

    def reset(self) -> None:
        self.calls = 0
        self.points = 0

    def to_dict(self) -> dict[str, int]:
        return {"calls": self.calls, "points": self.points}


@dataclass
class RunStats:
    """Wall time, memory and evaluation totals for one CLI run."""

    started_at: float = field(default_factory=time.time)
    finished_at: float | None = None
    peak_rss_mb: float = 0.0
    counter: EvalCounter = field(default_factory=EvalCounter)
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._process = psutil.Process()
        self.sample_memory()

    def sample_memory(self) -> None:
        rss = self._process.memory_info().rss / 1024 / 1024
        self.peak_rss_mb = max(self.peak_rss_mb, rss)

    def finish(self) -> None:
        self.sample_memory()
        self.finished_at = time.time()

    @property
    def duration_s(self) -> float:
        end = self.finished_at if self.finished_at is not None else time.time()
        return end - self.started_at

    def to_dict(self) -> dict[str, Any]:
        return {
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "duration_s": round(self.duration_s, 3),
            "peak_rss_mb": round(self.peak_rss_mb, 2),
            "evaluations": self.counter.to_dict(),
            **self.extra,
        }
