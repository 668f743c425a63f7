"""Clock sources: a steppable virtual clock and a wall-clock adapter.

All experiment code reads time in integer microseconds through this
interface, so the same channel/agent code runs bit-reproducibly on the
virtual timeline and in real time behind the live bridge.
"""

from __future__ import annotations

import time


class VirtualClock:
    """Integer-microsecond clock that advances only when told to."""

    def __init__(self, start_us: int = 0):
        self._now_us = int(start_us)

    @property
    def now_us(self) -> int:
        return self._now_us

    def advance_to(self, t_us: int) -> int:
        if t_us < self._now_us:
            raise ValueError(f"clock cannot go backwards: {t_us} < {self._now_us}")
        self._now_us = int(t_us)
        return self._now_us


class WallClock:
    """Monotonic wall clock in microseconds since construction."""

    def __init__(self):
        self._t0 = time.monotonic_ns()

    @property
    def now_us(self) -> int:
        return (time.monotonic_ns() - self._t0) // 1000
