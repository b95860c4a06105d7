"""Stage timing and memory accounting for the cost comparison."""

from __future__ import annotations

import statistics
import time
import tracemalloc
from dataclasses import asdict, dataclass

STAGES = ("data_loading", "preprocessing", "model_training", "prediction")


@dataclass(frozen=True)
class StageTimings:
    data_loading: float
    preprocessing: float
    model_training: float
    prediction: float
    peak_memory_bytes: int = 0
    feature_bytes: int = 0

    def __post_init__(self):
        for name in STAGES:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def total(self) -> float:
        return self.data_loading + self.preprocessing + self.model_training + self.prediction

    def as_dict(self) -> dict:
        d = asdict(self)
        d["total"] = self.total
        return d


def time_call(fn, repeats: int = 3, warmup: int = 1):
    """Median wall-clock seconds of ``fn()`` over ``repeats`` runs after ``warmup`` discarded runs.

    Returns (median_seconds, last_result, seconds_spent_in_all_calls).
    """
    result = None
    spent = 0.0
    for _ in range(warmup):
        t0 = time.perf_counter()
        result = fn()
        spent += time.perf_counter() - t0
    samples = []
    for _ in range(max(1, repeats)):
        t0 = time.perf_counter()
        result = fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples), result, spent + sum(samples)


def peak_allocation(fn) -> tuple[int, object]:
    """Peak bytes traced by tracemalloc while running ``fn()`` once."""
    was_tracing = tracemalloc.is_tracing()
    if not was_tracing:
        tracemalloc.start()
    tracemalloc.reset_peak()
    try:
        result = fn()
        _, peak = tracemalloc.get_traced_memory()
    finally:
        if not was_tracing:
            tracemalloc.stop()
    return int(peak), result
