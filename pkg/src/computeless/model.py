"""Entities and per-window service statistics.

A service is summarised by three sigmoid-shaped quantities derived from
what its tasks looked like during an observation window:

- granularity: sigmoid(received / distinct), how repetitive the inputs
  were (identical-input tasks push it toward 1),
- potential reusability: sigmoid(1 / granularity), the expected share of
  a computation a cached result covers,
- punishment: the reusability itself while the service is in good
  standing, flipped to 1 - reusability once an edge has evicted it.

All three live in (0, 1) and feed the preference utilities in
``matching``. The offloading gain pairs reusability with the mean input
size and mean complexity to express what hosting the service saves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError


_BELOW_ONE = math.nextafter(1.0, 0.0)


def _sigmoid(x: float) -> float:
    if x >= 0:
        # clamp one ulp under 1: the true value never reaches 1, but the
        # float rounds there near x ~ 37 and callers rely on the open interval
        return min(1.0 / (1.0 + math.exp(-x)), _BELOW_ONE)
    e = math.exp(x)  # avoid overflow for large negative x
    return e / (1.0 + e)


@dataclass(frozen=True)
class InputDescriptor:
    """Ordered content digests identifying a task's input items."""

    items: tuple[int, ...]

    def __post_init__(self):
        if not self.items:
            raise DomainError("input descriptor needs at least one item")
        if any(d < 0 for d in self.items):
            raise DomainError("digests are unsigned integers")

    def __len__(self) -> int:
        return len(self.items)

    def to_hex(self) -> str:
        return ";".join(format(d, "x") for d in self.items)

    @classmethod
    def from_hex(cls, text: str) -> "InputDescriptor":
        parts = [p for p in text.split(";") if p]
        try:
            items = tuple(int(p, 16) for p in parts)
        except ValueError as exc:
            raise DomainError(f"bad digest field {text!r}") from exc
        return cls(items)


def common_prefix_len(a: InputDescriptor, b: InputDescriptor) -> int:
    n = 0
    for x, y in zip(a.items, b.items):
        if x != y:
            break
        n += 1
    return n


@dataclass(frozen=True)
class Task:
    id: int
    service: int
    arrival_time: float  # seconds from trace start
    input: InputDescriptor
    input_size: float  # megabits
    complexity: float  # compute units
    output_size: float = 0.0  # megabits
    origin_edge: int | None = None  # edge the user is attached to

    def __post_init__(self):
        if self.complexity <= 0:
            raise DomainError(f"task {self.id}: complexity must be > 0")
        if self.input_size < 0 or self.output_size < 0:
            raise DomainError(f"task {self.id}: sizes must be >= 0")
        if self.arrival_time < 0:
            raise DomainError(f"task {self.id}: arrival_time must be >= 0")


@dataclass(frozen=True)
class OffloadingGain:
    """Expected per-task savings from hosting a service at an edge."""

    saved_input: float = 0.0  # megabits
    saved_complexity: float = 0.0  # compute units

    def __post_init__(self):
        if self.saved_input < 0 or self.saved_complexity < 0:
            raise DomainError("offloading gain components must be >= 0")


@dataclass(frozen=True)
class Service:
    id: int
    granularity: float
    reusability: float
    gain: OffloadingGain = OffloadingGain()
    evicted: bool = False  # dropped before by the edge under consideration

    @property
    def punishment(self) -> float:
        return compute_punishment(self.reusability, self.evicted)


@dataclass
class EdgeServer:
    id: int
    bandwidth: float  # effective user->edge megabits/s (link / hops)
    compute: float  # compute units/s
    service_quota: int  # max concurrently hosted services
    redirect_bandwidth: float | None = None  # edge->edge path; defaults to bandwidth
    neighbors: frozenset[int] = frozenset()  # one-hop edge ids
    hosted: set[int] = field(default_factory=set)  # current service ids
    reuse_table: object | None = None  # ReuseTable, attached by the simulator

    def __post_init__(self):
        if self.bandwidth <= 0 or self.compute <= 0:
            raise DomainError(f"edge {self.id}: bandwidth and compute must be > 0")
        if self.service_quota < 0:
            raise DomainError(f"edge {self.id}: service_quota must be >= 0")
        if self.redirect_bandwidth is not None and self.redirect_bandwidth <= 0:
            raise DomainError(f"edge {self.id}: redirect_bandwidth must be > 0")

    @property
    def redirect_bw(self) -> float:
        return self.redirect_bandwidth if self.redirect_bandwidth is not None else self.bandwidth


@dataclass
class CloudServer:
    bandwidth: float  # effective user->cloud megabits/s (link / hops)
    compute: float  # compute units/s

    def __post_init__(self):
        if self.bandwidth <= 0 or self.compute <= 0:
            raise DomainError("cloud: bandwidth and compute must be > 0")


@dataclass
class WindowStats:
    """Running statistics for one service over one observation window."""

    window_length: float
    received_count: int = 0
    distinct_count: int = 0
    mean_input_size: float = 0.0
    mean_complexity: float = 0.0
    mean_comm_cost: float = 0.0  # mean observed transfer seconds
    mean_comp_cost: float = 0.0  # mean observed scratch execution seconds
    mean_reuse_cost: float = 0.0  # mean observed reuse execution seconds
    comm_samples: int = 0
    comp_samples: int = 0
    reuse_samples: int = 0
    # tallies by origin edge, needed to cost a placement against real demand
    origin_counts: dict[int, int] = field(default_factory=dict)
    origin_input_sums: dict[int, float] = field(default_factory=dict)
    origin_complexity_sums: dict[int, float] = field(default_factory=dict)
    _seen: set[tuple[int, ...]] = field(default_factory=set, repr=False)

    def __post_init__(self):
        if self.window_length <= 0:
            raise DomainError("window_length must be > 0")

    @property
    def repeat_ratio(self) -> float:
        """Fraction of the window's tasks whose input was already seen."""
        if self.received_count == 0:
            return 0.0
        return (self.received_count - self.distinct_count) / self.received_count


def _fold_mean(mean: float, count: int, sample: float) -> tuple[float, int]:
    count += 1
    return mean + (sample - mean) / count, count


def update_window_stats(stats: WindowStats, task: Task, comm_cost: float | None = None,
                        comp_cost: float | None = None, reuse_cost: float | None = None,
                        *, count: bool = True) -> WindowStats:
    """Fold one task (and any observed costs) into the window's statistics.

    With count=False only the cost observations are folded; the simulator
    uses that to attach execution costs that become known after arrival.
    """
    if count:
        stats.received_count += 1
        if task.input.items not in stats._seen:
            stats._seen.add(task.input.items)
            stats.distinct_count += 1
        n = stats.received_count
        stats.mean_input_size += (task.input_size - stats.mean_input_size) / n
        stats.mean_complexity += (task.complexity - stats.mean_complexity) / n
        if task.origin_edge is not None:
            e = task.origin_edge
            stats.origin_counts[e] = stats.origin_counts.get(e, 0) + 1
            stats.origin_input_sums[e] = stats.origin_input_sums.get(e, 0.0) + task.input_size
            stats.origin_complexity_sums[e] = (
                stats.origin_complexity_sums.get(e, 0.0) + task.complexity)
    if comm_cost is not None:
        stats.mean_comm_cost, stats.comm_samples = _fold_mean(
            stats.mean_comm_cost, stats.comm_samples, comm_cost)
    if comp_cost is not None:
        stats.mean_comp_cost, stats.comp_samples = _fold_mean(
            stats.mean_comp_cost, stats.comp_samples, comp_cost)
    if reuse_cost is not None:
        stats.mean_reuse_cost, stats.reuse_samples = _fold_mean(
            stats.mean_reuse_cost, stats.reuse_samples, reuse_cost)
    return stats


def compute_granularity(received: int, distinct: int) -> float:
    """sigmoid(received / distinct); strictly increasing in the ratio."""
    if distinct < 1:
        raise DomainError("distinct count must be >= 1")
    if received < distinct:
        raise DomainError("received count cannot be below distinct count")
    return _sigmoid(received / distinct)


def compute_reusability(granularity: float) -> float:
    """sigmoid(1 / granularity); strictly decreasing in granularity."""
    if not 0.0 < granularity < 1.0:
        raise DomainError("granularity must lie in (0, 1)")
    return _sigmoid(1.0 / granularity)


def compute_punishment(reusability: float, evicted: bool) -> float:
    if not 0.0 < reusability < 1.0:
        raise DomainError("reusability must lie in (0, 1)")
    return 1.0 - reusability if evicted else reusability


def compute_offloading_gain(reusability: float, mean_input_size: float,
                            mean_complexity: float) -> OffloadingGain:
    if not 0.0 < reusability < 1.0:
        raise DomainError("reusability must lie in (0, 1)")
    if mean_input_size < 0 or mean_complexity < 0:
        raise DomainError("mean sizes must be >= 0")
    return OffloadingGain(reusability * mean_input_size, reusability * mean_complexity)


def service_from_stats(service_id: int, stats: WindowStats, evicted: bool = False) -> Service:
    """Build the matchable view of a service from one window of statistics."""
    if stats.received_count < 1:
        raise DomainError(f"service {service_id}: no tasks observed this window")
    granularity = compute_granularity(stats.received_count, stats.distinct_count)
    reusability = compute_reusability(granularity)
    gain = compute_offloading_gain(reusability, stats.mean_input_size, stats.mean_complexity)
    return Service(service_id, granularity, reusability, gain, evicted)
