"""Bounded per-edge store of previously computed results.

Entries are keyed by (service, input descriptor). A lookup resolves to
one of three kinds:

- Full: an entry with the identical descriptor exists; nothing is left
  to compute.
- Partial: some same-service entry shares a digest prefix; the overlap
  fraction says how much of the stored computation applies and the
  residual complexity is what still has to run.
- Miss: no usable entry. Misses never mutate the table; the caller
  inserts after computing from scratch.

Eviction is least-frequently-used with insertion order breaking ties.
Hit counters deliberately survive window boundaries: popularity is a
long-lived signal, unlike the per-window matching statistics.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import ContractError, DomainError
from .model import InputDescriptor, common_prefix_len


class LookupKind(Enum):
    FULL = "full"
    PARTIAL = "partial"
    MISS = "miss"


@dataclass(frozen=True)
class LookupOutcome:
    kind: LookupKind
    overlap: float  # 1.0 full, (0, 1) partial, 0.0 miss
    residual_complexity: float  # compute units still required
    matched_key: InputDescriptor | None = None


@dataclass
class ReuseEntry:
    service: int
    key: InputDescriptor
    output_size: float
    complexity_saved: float  # compute units a full hit avoids
    frequency: int  # accesses: 1 at insert, +1 per hit
    inserted_at: int  # monotone insertion counter, breaks LFU ties


class ReuseTable:
    def __init__(self, capacity: int):
        if capacity < 1:
            raise DomainError("reuse table capacity must be >= 1")
        self.capacity = capacity
        self._entries: dict[tuple[int, tuple[int, ...]], ReuseEntry] = {}
        # first digest -> entries, so prefix candidates are found without a scan
        self._by_head: dict[tuple[int, int], list[ReuseEntry]] = {}
        self._insert_counter = 0
        self.window_full_hits = 0
        self.window_partial_overlap = 0.0

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: tuple[int, InputDescriptor]) -> bool:
        service, descriptor = key
        return (service, descriptor.items) in self._entries

    def lookup(self, service: int, descriptor: InputDescriptor,
               complexity: float) -> LookupOutcome:
        if complexity <= 0:
            raise DomainError("complexity must be > 0")
        exact = self._entries.get((service, descriptor.items))
        if exact is not None:
            exact.frequency += 1
            self.window_full_hits += 1
            return LookupOutcome(LookupKind.FULL, 1.0, 0.0, exact.key)

        best = None
        best_lcp = 0
        for entry in self._by_head.get((service, descriptor.items[0]), ()):
            lcp = common_prefix_len(descriptor, entry.key)
            if lcp > best_lcp or (lcp == best_lcp and best is not None
                                  and entry.inserted_at < best.inserted_at):
                best, best_lcp = entry, lcp
        if best is None or best_lcp == 0:
            return LookupOutcome(LookupKind.MISS, 0.0, complexity)

        overlap = best_lcp / max(len(descriptor), len(best.key))
        best.frequency += 1
        self.window_partial_overlap += overlap
        return LookupOutcome(LookupKind.PARTIAL, overlap,
                             (1.0 - overlap) * complexity, best.key)

    def insert(self, service: int, descriptor: InputDescriptor,
               output_size: float = 0.0,
               complexity_saved: float = 0.0) -> ReuseEntry | None:
        """Store a freshly computed result. Returns the evicted entry, if any."""
        key = (service, descriptor.items)
        if key in self._entries:
            raise ContractError(f"duplicate insert for service {service}")
        evicted = None
        if len(self._entries) >= self.capacity:
            evicted = self._evict_one()
        self._insert_counter += 1
        entry = ReuseEntry(service, descriptor, output_size, complexity_saved,
                           1, self._insert_counter)
        self._entries[key] = entry
        self._by_head.setdefault((service, descriptor.items[0]), []).append(entry)
        return evicted

    def _evict_one(self) -> ReuseEntry:
        victim = min(self._entries.values(),
                     key=lambda e: (e.frequency, e.inserted_at))
        del self._entries[(victim.service, victim.key.items)]
        bucket = self._by_head[(victim.service, victim.key.items[0])]
        bucket.remove(victim)
        if not bucket:
            del self._by_head[(victim.service, victim.key.items[0])]
        return victim

    def reset_window_counters(self) -> None:
        """Zero the per-window hit tallies; entry frequencies are kept."""
        self.window_full_hits = 0
        self.window_partial_overlap = 0.0

    def entries(self) -> list[ReuseEntry]:
        """Entries ordered most-used first (frequency desc, oldest first)."""
        return sorted(self._entries.values(),
                      key=lambda e: (-e.frequency, e.inserted_at))


def reuse_ratio(table: ReuseTable, received_count: int) -> float:
    """Window reuse ratio: (full hits + overlap-weighted partial hits) / tasks."""
    if received_count < 0:
        raise DomainError("received_count must be >= 0")
    if received_count == 0:
        return 0.0
    return (table.window_full_hits + table.window_partial_overlap) / received_count
