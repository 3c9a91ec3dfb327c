"""Fixed-depth ring buffer of past solution points."""
from __future__ import annotations

import numpy as np

from .errors import InsufficientHistory, StaleHistory, StepMismatch


class StateHistory:
    """Past values, first and second derivatives of ``n_vars`` variables.

    Entry 0 is the most recent. Entries carry their time stamp and a stale
    flag; :meth:`mark_stale` is called at discontinuities so multistep
    kernels never span one.
    """

    def __init__(self, n_vars: int, depth: int = 4):
        if depth < 3:
            raise ValueError("history depth must be at least 3")
        self.n_vars = n_vars
        self.depth = depth
        self.values = np.full((depth, n_vars), np.nan)
        self.d1 = np.full((depth, n_vars), np.nan)
        self.d2 = np.full((depth, n_vars), np.nan)
        self.times = np.full(depth, np.nan)
        self.stale = np.zeros(depth, dtype=bool)
        self._head = -1
        self._count = 0

    def __len__(self):
        return self._count

    def _slot(self, i):
        if not 0 <= i < self._count:
            raise InsufficientHistory(f"history holds {self._count} entries, asked for #{i}")
        return (self._head - i) % self.depth

    def push(self, t, values, d1=None, d2=None):
        self._head = (self._head + 1) % self.depth
        k = self._head
        self.times[k] = t
        self.values[k] = values
        self.d1[k] = np.nan if d1 is None else d1
        self.d2[k] = np.nan if d2 is None else d2
        self.stale[k] = False
        self._count = min(self._count + 1, self.depth)

    def mark_stale(self):
        self.stale[:] = True

    @property
    def t_last(self):
        return float(self.times[self._slot(0)])

    def last(self, field="values"):
        return getattr(self, field)[self._slot(0)]

    def entry(self, i=0):
        k = self._slot(i)
        return self.times[k], self.values[k], self.d1[k], self.d2[k], bool(self.stale[k])

    def window(self, count: int, h: float, fresh=True) -> np.ndarray:
        """Slots of the ``count`` most recent entries, checked to be ``h`` apart.

        Raises InsufficientHistory, StepMismatch or StaleHistory.
        """
        if count > self._count:
            raise InsufficientHistory(f"need {count} past entries, have {self._count}")
        # scalar loop: count is at most a handful and this runs every step
        slots = [(self._head - i) % self.depth for i in range(count)]
        times, stale = self.times, self.stale
        tol = 1e-9 * h
        for i, k in enumerate(slots):
            if fresh and stale[k]:
                raise StaleHistory("history spans a discontinuity")
            if i and abs(times[slots[i - 1]] - times[k] - h) > tol:
                raise StepMismatch(f"history spacing does not match h={h}")
        return np.array(slots)

    def get(self, field, count, h, cols=None, fresh=True):
        """``(count, n)`` array of ``field`` over the checked window."""
        arr = getattr(self, field)[self.window(count, h, fresh)]
        return arr if cols is None else arr[:, cols]
