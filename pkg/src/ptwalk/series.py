from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["MeasureSeries"]


@dataclass
class MeasureSeries:
    """A scalar diagnostic sampled at integer times.

    ``flags`` holds one status string per time point (empty when nothing is
    noteworthy) and ``extra`` carries companion columns of the same length.
    """

    label: str
    times: np.ndarray
    values: np.ndarray
    flags: list[str] = field(default_factory=list)
    extra: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=int)
        self.values = np.asarray(self.values)
        if self.times.ndim != 1 or self.values.shape[:1] != self.times.shape:
            raise ValueError("times and values must be 1-d and of equal length")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not self.flags:
            self.flags = [""] * self.times.size
        if len(self.flags) != self.times.size:
            raise ValueError("one flag per time point required")

    def __len__(self):
        return self.times.size

    def at(self, t: int):
        return self.values[int(np.searchsorted(self.times, t))]
