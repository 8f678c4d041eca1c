"""In-memory tile cache: bounded LRU with single-flight computation.

At most one computation per key runs at any time; concurrent requests for
the same key wait for the winner and share its result. Entries are stored
as read-only arrays and never mutate. Cross-edit coherence is the
orchestrator's job (edits drain readers first), so the cache itself only
guarantees key-level consistency.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable

import numpy as np


@dataclass
class CacheEntry:
    value: np.ndarray
    inputs_hash: str
    meta: dict = field(default_factory=dict)


class _Flight:
    __slots__ = ("event",)

    def __init__(self) -> None:
        self.event = threading.Event()


class TileCache:
    def __init__(self, capacity: int = 4096):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._entries: OrderedDict[Hashable, CacheEntry] = OrderedDict()
        self._inflight: dict[Hashable, _Flight] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        self.evictions = 0

    def get_or_compute(self, key: Hashable,
                       compute: Callable[[], CacheEntry]) -> CacheEntry:
        """Return the cached entry, computing it at most once per key."""
        while True:
            with self._lock:
                entry = self._entries.get(key)
                if entry is not None:
                    self._entries.move_to_end(key)
                    self.hits += 1
                    return entry
                flight = self._inflight.get(key)
                if flight is None:
                    flight = _Flight()
                    self._inflight[key] = flight
                    self.misses += 1
                    break
            # Someone else is computing this key; wait and re-check. The
            # retry loop also covers failed or invalidated computations.
            flight.event.wait()

        try:
            entry = compute()
        except BaseException:
            with self._lock:
                self._inflight.pop(key, None)
            flight.event.set()
            raise
        if entry.value is not None and isinstance(entry.value, np.ndarray):
            entry.value.setflags(write=False)
        with self._lock:
            self._entries[key] = entry
            self._entries.move_to_end(key)
            self._inflight.pop(key, None)
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)
                self.evictions += 1
        flight.event.set()
        return entry

    def peek(self, key: Hashable) -> CacheEntry | None:
        """Look up without recording a hit or touching LRU order."""
        with self._lock:
            return self._entries.get(key)

    def __contains__(self, key: Hashable) -> bool:
        with self._lock:
            return key in self._entries

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def keys(self) -> list[Hashable]:
        with self._lock:
            return list(self._entries.keys())

    def invalidate(self, keys) -> list[Hashable]:
        """Drop the given keys; returns those that were actually cached."""
        removed = []
        with self._lock:
            for key in keys:
                if key in self._entries:
                    del self._entries[key]
                    removed.append(key)
        return removed

    def invalidate_where(self, predicate: Callable[[Hashable], bool]) -> list[Hashable]:
        with self._lock:
            doomed = [k for k in self._entries if predicate(k)]
            for k in doomed:
                del self._entries[k]
        return doomed

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()

    def stats(self) -> dict[str, Any]:
        with self._lock:
            return {
                "size": len(self._entries),
                "capacity": self.capacity,
                "hits": self.hits,
                "misses": self.misses,
                "evictions": self.evictions,
            }
