"""Deterministic discrete-event virtual clock.

Occurrences fire in (time, tiebreak id) order; insertion order breaks exact
ties. Time only moves forward, and it jumps straight to the next occurrence,
so simulated runs cost no wall time.
"""
from __future__ import annotations

import heapq
from typing import Any

from .errors import PastTime

__all__ = ["VirtualClock", "Occurrence"]


class Occurrence:
    """One scheduled cause of a slice boundary (a completion or a feedback)."""

    __slots__ = ("kind", "key", "payload", "handle")

    def __init__(self, kind: str, key: str, payload: Any = None):
        self.kind = kind          # completion | feedback | resume
        self.key = key            # tiebreak id (event id / feedback id)
        self.payload = payload
        self.handle: int = -1     # assigned when scheduled

    def __repr__(self):
        return f"Occurrence({self.kind!r}, {self.key!r})"


class VirtualClock:
    """Single-threaded priority queue over virtual time."""

    def __init__(self, start: float = 0.0):
        self.now = float(start)
        self._heap: list[tuple[float, str, int, Occurrence]] = []
        self._cancelled: set[int] = set()
        self._next_handle = 0

    def schedule_occurrence(self, at: float, occurrence: Occurrence) -> int:
        if at < self.now:
            raise PastTime(f"cannot schedule at {at} (now {self.now})")
        occurrence.handle = self._next_handle
        self._next_handle += 1
        heapq.heappush(self._heap, (float(at), occurrence.key, occurrence.handle, occurrence))
        return occurrence.handle

    def cancel(self, handle: int):
        self._cancelled.add(handle)

    def next_occurrence(self) -> tuple[float, Occurrence] | None:
        """Pop the next live occurrence and advance ``now``; None when drained."""
        while self._heap:
            at, _, handle, occ = heapq.heappop(self._heap)
            if handle in self._cancelled:
                self._cancelled.discard(handle)
                continue
            self.now = at
            return at, occ
        return None

    def pending(self) -> int:
        return sum(1 for *_, h, _o in self._heap if h not in self._cancelled)

    def has_pending_at(self, at: float, kind: str) -> bool:
        """True when an uncancelled occurrence of ``kind`` is queued for ``at``."""
        return any(t == at and occ.kind == kind
                   for t, _, h, occ in self._heap if h not in self._cancelled)

    def __bool__(self) -> bool:
        return self.pending() > 0
