"""The fetcher queue: priority frontier with anti-starvation aging.

Effective priority is min(1.0, base + delta * age-in-cycles), a cycle being
one dequeue operation. Priorities are held internally as integer nano-units
so the aging arithmetic and the documented starvation bound (an item is
dequeued within ceil((1 - base)/delta) cycles) are exact, not subject to
float rounding. A URL is accepted once, ever: re-sightings are duplicates
regardless of priority.
"""

from __future__ import annotations

from dataclasses import dataclass

_SCALE = 10**9


def _quantize(value: float) -> int:
    return round(value * _SCALE)


@dataclass(frozen=True)
class FrontierItem:
    url: str
    base_priority: float
    effective_priority: float
    enqueue_cycle: int


class Frontier:
    def __init__(self, aging_delta: float = 0.001, fifo: bool = False):
        if aging_delta <= 0:
            raise ValueError("aging delta must be positive")
        self.aging_delta = aging_delta
        self.fifo = fifo
        self._delta_n = max(1, _quantize(aging_delta))
        self._entries: list[list] = []  # [url, base_n, enqueue_cycle, seq]
        self._seen: set[str] = set()
        self._next_seq = 0

    def __len__(self) -> int:
        return len(self._entries)

    def seen_count(self) -> int:
        return len(self._seen)

    def __contains__(self, url: str) -> bool:
        return url in self._seen

    def enqueue(self, url: str, priority: float, cycle: int) -> bool:
        """True when accepted; False when the URL was ever seen before."""
        if not 0 < priority <= 1:
            raise ValueError(f"priority {priority} not in (0, 1]")
        if url in self._seen:
            return False
        self._seen.add(url)
        self._entries.append([url, max(1, _quantize(priority)), cycle, self._next_seq])
        self._next_seq += 1
        return True

    def _effective_n(self, entry: list, current_cycle: int) -> int:
        url, base_n, enqueue_cycle, _ = entry
        age = max(0, current_cycle - enqueue_cycle)
        return min(_SCALE, base_n + self._delta_n * age)

    def dequeue_highest(self, current_cycle: int) -> FrontierItem | None:
        """Remove and return the maximum-effective-priority item.

        Ties break by earlier enqueue cycle, then lexicographic URL. An
        empty frontier returns None (the crawl termination signal).
        """
        if not self._entries:
            return None
        if self.fifo:
            best_index = min(range(len(self._entries)), key=lambda i: self._entries[i][3])
        else:
            best_index = min(
                range(len(self._entries)),
                key=lambda i: (
                    -self._effective_n(self._entries[i], current_cycle),
                    self._entries[i][2],
                    self._entries[i][0],
                ),
            )
        entry = self._entries.pop(best_index)
        effective_n = self._effective_n(entry, current_cycle)
        url, base_n, enqueue_cycle, _ = entry
        return FrontierItem(
            url=url,
            base_priority=base_n / _SCALE,
            effective_priority=effective_n / _SCALE,
            enqueue_cycle=enqueue_cycle,
        )

    def snapshot(self) -> dict:
        """Checkpointable state; restore() reproduces the exact frontier."""
        return {
            "aging_delta": self.aging_delta,
            "fifo": self.fifo,
            "entries": [list(e) for e in self._entries],
            "seen": sorted(self._seen),
            "next_seq": self._next_seq,
        }

    @classmethod
    def restore(cls, state: dict) -> "Frontier":
        frontier = cls(aging_delta=state["aging_delta"], fifo=state["fifo"])
        frontier._entries = [list(e) for e in state["entries"]]
        frontier._seen = set(state["seen"])
        frontier._next_seq = state["next_seq"]
        return frontier
