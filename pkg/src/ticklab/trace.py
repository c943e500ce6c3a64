"""Tick traces: ordered sequences of absolute tick times."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TickTrace:
    """Strictly increasing absolute tick times of one clock or protocol run.

    ``truncated`` is set when the producing run hit its time horizon before
    emitting the requested number of ticks.  ``n_ignored_inputs`` counts
    input ticks that arrived while the consumer could not act on them.
    """

    times: np.ndarray
    truncated: bool = False
    n_ignored_inputs: int = 0

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.times, dtype=float))
        if t.ndim != 1:
            raise ValueError("tick times must be one-dimensional")
        if t.size and t[0] < 0:
            raise ValueError("tick times must be nonnegative")
        if np.any(np.diff(t) <= 0):
            raise ValueError("tick times must be strictly increasing")
        object.__setattr__(self, "times", t)

    def __len__(self) -> int:
        return self.times.size

    def __getitem__(self, i):
        return self.times[i]

    @property
    def gaps(self) -> np.ndarray:
        """Inter-tick durations."""
        return np.diff(self.times)
