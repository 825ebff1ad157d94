"""Live-element accounting for contraction engines.

Engines report memory as dense float64 elements they own: every array an
engine allocates is registered on creation and released when the engine
drops it. Caller-owned inputs are never counted.
"""

from __future__ import annotations

import threading

import numpy as np


class ElementMeter:
    """Tracks currently live and peak element counts."""

    __slots__ = ("live", "peak")

    def __init__(self) -> None:
        self.live = 0
        self.peak = 0

    def alloc(self, item) -> None:
        """Register `item` (an ndarray or an element count) as live."""
        self.live += self._size(item)
        if self.live > self.peak:
            self.peak = self.live

    def free(self, item) -> None:
        self.live -= self._size(item)

    @staticmethod
    def _size(item) -> int:
        if isinstance(item, np.ndarray):
            return item.size
        return int(item)


class LockedMeter(ElementMeter):
    """ElementMeter safe to share between worker threads."""

    __slots__ = ("_lock",)

    def __init__(self) -> None:
        super().__init__()
        self._lock = threading.Lock()

    def alloc(self, item) -> None:
        with self._lock:
            super().alloc(item)

    def free(self, item) -> None:
        with self._lock:
            super().free(item)
