"""Discrete-event engine: queues, windowed re-matching, reuse tables.

One trial is one event loop. Windows of length tau partition the trace;
window 0 runs everything remotely while statistics warm up, and every
boundary after that re-runs the configured placement scheme on the
previous window's statistics. Tasks queue FIFO at single-task servers,
consult the edge's reuse table when they start executing, and insert
their result on a miss.
"""

from __future__ import annotations

import bisect
import hashlib
import heapq
import itertools
import random
import warnings
from collections import deque
from dataclasses import dataclass, field, replace

from .baselines import (GaParams, SaParams, annealing, cloud_only, genetic,
                        greedy_frequency, matching_no_reuse, random_edge)
from .errors import ConfigError, ContractError, DomainError
from .matching import Assignment, extended_match, whistle_match
from .model import (CloudServer, EdgeServer, InputDescriptor, Task,
                    WindowStats, service_from_stats, update_window_stats)
from .reuse import LookupKind, ReuseTable
from .trace import fingerprint

# event ordering at equal timestamps: boundaries fire before the tasks
# they re-route, starts before the ends that would free the server
BOUNDARY, ARRIVAL, START, END = 0, 1, 2, 3

CLOUD = "cloud"

# scheme name -> (reuse tables on by default, override allowed)
SCHEMES = {
    "cloud": (False, False),
    "random": (False, True),
    "greedy": (True, True),
    "ga": (True, True),
    "sa": (True, True),
    "matching-no-reuse": (False, False),
    "whistle": (True, True),
    "extended-whistle": (True, True),
}

LOC_CLOUD = "cloud"
LOC_SCRATCH = "edge-scratch"
LOC_FULL = "edge-full-reuse"
LOC_PARTIAL = "edge-partial-reuse"


@dataclass(frozen=True)
class TrialConfig:
    scheme: str = "whistle"
    seed: int = 0
    n_edges: int = 2
    link_mbps: float = 100.0
    hops_to_edge: int = 1
    hops_to_cloud: int = 6
    edge_compute: float = 300.0  # units/s
    cloud_compute: float = 3000.0
    service_quota: int = 8
    replica_quota: int | None = None  # None: one placement per edge allowed
    lookup_s: float = 0.0005
    reuse_capacity: int = 4096
    window_s: float | None = None  # None: a tenth of the trace duration
    gain_sign: str = "literal"
    reuse: bool | None = None  # None: the scheme's default
    redirect_mbps: float | None = None  # edge-to-edge path; None: edge bandwidth
    origin_weights: tuple[float, ...] | None = None  # None: uniform
    ga: GaParams = field(default_factory=GaParams)
    sa: SaParams = field(default_factory=SaParams)

    @property
    def edge_bandwidth(self) -> float:
        return self.link_mbps / self.hops_to_edge

    @property
    def cloud_bandwidth(self) -> float:
        return self.link_mbps / self.hops_to_cloud

    def reuse_enabled(self) -> bool:
        default, overridable = SCHEMES[self.scheme]
        if self.reuse is None or not overridable:
            return default
        return self.reuse

    def validate(self) -> None:
        """Reject impossible values; warn when outside the usual operating ranges."""
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme: unknown scheme {self.scheme!r}, "
                              f"expected one of {sorted(SCHEMES)}")
        if self.n_edges < 1:
            raise ConfigError("n_edges: must be >= 1")
        if self.link_mbps <= 0:
            raise ConfigError("link_mbps: must be > 0")
        if self.hops_to_edge < 1:
            raise ConfigError("hops_to_edge: must be >= 1")
        if self.hops_to_cloud < 1:
            raise ConfigError("hops_to_cloud: must be >= 1")
        if self.edge_compute <= 0:
            raise ConfigError("edge_compute: must be > 0")
        if self.cloud_compute <= 0:
            raise ConfigError("cloud_compute: must be > 0")
        if self.service_quota < 1:
            raise ConfigError("service_quota: must be >= 1")
        if self.replica_quota is not None and self.replica_quota < 1:
            raise ConfigError("replica_quota: must be >= 1 when set")
        if self.lookup_s < 0:
            raise ConfigError("lookup_s: must be >= 0")
        if self.reuse_capacity < 1:
            raise ConfigError("reuse_capacity: must be >= 1")
        if self.window_s is not None and self.window_s <= 0:
            raise ConfigError("window_s: must be > 0 when set")
        if self.gain_sign not in ("literal", "subtract"):
            raise ConfigError("gain_sign: must be 'literal' or 'subtract'")
        if self.redirect_mbps is not None and self.redirect_mbps <= 0:
            raise ConfigError("redirect_mbps: must be > 0 when set")
        if self.origin_weights is not None:
            w = self.origin_weights
            if len(w) != self.n_edges:
                raise ConfigError("origin_weights: need one weight per edge")
            if min(w) < 0 or sum(w) <= 0:
                raise ConfigError("origin_weights: must be >= 0 with a positive sum")
        if self.hops_to_edge != 1:
            warnings.warn("hops_to_edge is usually 1", stacklevel=2)
        if not 5 <= self.hops_to_cloud <= 10:
            warnings.warn("hops_to_cloud outside the usual 5..10", stacklevel=2)
        if not 6 <= self.service_quota <= 10:
            warnings.warn("service_quota outside the usual 6..10", stacklevel=2)


@dataclass(frozen=True)
class TaskRecord:
    task_id: int
    service: int
    window: int
    origin: int
    target: int | None  # executing edge id; None ran remotely
    redirected: bool
    location: str  # cloud | edge-scratch | edge-full-reuse | edge-partial-reuse
    reuse_kind: str  # none | miss | partial | full
    comm_s: float
    queue_s: float
    comp_s: float
    total_s: float
    executed_units: float
    core_mb: float  # megabits that crossed the cloud path
    redirect_mb: float  # megabits that crossed an edge-to-edge path


@dataclass
class WindowRecord:
    index: int
    start_s: float
    placements: tuple[tuple[int, int], ...]  # (service, edge), sorted
    evictions: tuple[tuple[int, int], ...]  # pairs dropped at this boundary
    flagged: tuple[tuple[int, int], ...]  # punishment flags live during matching
    stage1_proposals: int = 0
    stage2_proposals: int = 0
    busy_s: dict = field(default_factory=dict)  # server label -> busy seconds


@dataclass
class SimResult:
    scheme: str
    seed: int
    config: TrialConfig
    trace_fingerprint: str
    window_s: float
    horizon_s: float
    total_input_mb: float
    total_complexity: float
    tasks: list[TaskRecord] = field(default_factory=list)
    windows: list[WindowRecord] = field(default_factory=list)
    busy_s: dict = field(default_factory=dict)  # server label -> total busy seconds
    reuse_tables: dict | None = None  # edge id -> final ReuseTable

    def location_counts(self) -> dict[str, int]:
        counts = {LOC_CLOUD: 0, LOC_SCRATCH: 0, LOC_FULL: 0, LOC_PARTIAL: 0}
        for rec in self.tasks:
            counts[rec.location] += 1
        return counts


def evict_services(previous: Assignment, next_assignment: Assignment):
    """Placements present before but gone now; the caller flags them."""
    return sorted(previous.pairs - next_assignment.pairs)


def mm1_expected_sojourn(arrival_rate: float, service_rate: float) -> float:
    """Mean time in a single FIFO queue with exponential arrivals and service."""
    if arrival_rate <= 0:
        raise DomainError("arrival_rate must be > 0")
    if service_rate <= arrival_rate:
        raise DomainError("queue is unstable unless service_rate > arrival_rate")
    return 1.0 / (service_rate - arrival_rate)


def _hash_unit(tag: str, seed: int, n: int) -> float:
    """Deterministic uniform draw in [0, 1) from (tag, seed, n)."""
    digest = hashlib.sha256(f"{tag}:{seed}:{n}".encode()).digest()
    return int.from_bytes(digest[:8], "big") / 2.0 ** 64


def assign_origins(tasks, n_edges: int, seed: int,
                   weights: tuple[float, ...] | None = None) -> list[Task]:
    """Attach each task to an edge, weighted, stable across schemes.

    Tasks that already carry an origin keep it. The draw hashes the task
    id so the attachment never depends on scheme or iteration order.
    """
    if weights is None:
        weights = tuple(1.0 for _ in range(n_edges))
    if len(weights) != n_edges:
        raise DomainError("need one origin weight per edge")
    cumulative = list(itertools.accumulate(weights))
    total = cumulative[-1]
    if total <= 0:
        raise DomainError("origin weights must have a positive sum")
    out = []
    for t in tasks:
        if t.origin_edge is not None:
            if not 0 <= t.origin_edge < n_edges:
                raise DomainError(f"task {t.id}: origin edge {t.origin_edge} "
                                  "out of range")
            out.append(t)
            continue
        u = _hash_unit("origin", seed, t.id) * total
        out.append(replace(t, origin_edge=bisect.bisect_right(cumulative, u)))
    return out


def _window_rng(seed: int, window: int) -> random.Random:
    digest = hashlib.sha256(f"window:{seed}:{window}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


@dataclass
class _TaskState:
    task: Task
    window: int
    target: int | None = None
    redirected: bool = False
    comm_s: float = 0.0
    join_s: float = 0.0
    queue_s: float = 0.0
    comp_s: float = 0.0
    reuse_kind: str = "none"
    location: str = LOC_CLOUD
    executed_units: float = 0.0
    core_mb: float = 0.0
    redirect_mb: float = 0.0
    pending_insert: bool = False


class _Server:
    __slots__ = ("label", "queue", "current", "busy")

    def __init__(self, label):
        self.label = label
        self.queue: deque = deque()
        self.current: _TaskState | None = None
        self.busy: list[tuple[float, float]] = []  # closed execution intervals


class _Trial:
    def __init__(self, config: TrialConfig, trace):
        self.cfg = config
        self.reuse_on = config.reuse_enabled()
        self.edges = [
            EdgeServer(i, config.edge_bandwidth, config.edge_compute,
                       config.service_quota,
                       redirect_bandwidth=config.redirect_mbps,
                       neighbors=frozenset(j for j in range(config.n_edges) if j != i),
                       reuse_table=ReuseTable(config.reuse_capacity))
            for i in range(config.n_edges)
        ]
        self.cloud = CloudServer(config.cloud_bandwidth, config.cloud_compute)
        self.tasks = assign_origins(trace, config.n_edges, config.seed,
                                    config.origin_weights)
        duration = self.tasks[-1].arrival_time if self.tasks else 0.0
        self.tau = config.window_s or (duration / 10 if duration > 0 else 1.0)
        self.last_window = int(duration / self.tau)
        self.assignment = Assignment()
        self.flagged: set[tuple[int, int]] = set()  # punishment flags by (service, edge)
        self.window_stats: dict[int, dict[int, WindowStats]] = {}
        self.match_stats: dict[int, WindowStats] = {}
        self.budgets: dict[int, float] = {}  # redirect headroom per edge, this window
        self.committed: dict[int, float] = {}
        self.windows: list[WindowRecord] = []
        self.records: list[TaskRecord] = []
        self.servers = {e.id: _Server(str(e.id)) for e in self.edges}
        self.servers[CLOUD] = _Server(CLOUD)
        self.heap: list = []
        self.seq = itertools.count()
        self.now = 0.0

    def push(self, time: float, priority: int, payload) -> None:
        heapq.heappush(self.heap, (time, priority, next(self.seq), payload))

    def run(self) -> SimResult:
        for k in range(self.last_window + 1):
            self.push(k * self.tau, BOUNDARY, k)
        for t in self.tasks:
            self.push(t.arrival_time, ARRIVAL, t)
        while self.heap:
            self.now, priority, _, payload = heapq.heappop(self.heap)
            if priority == BOUNDARY:
                self.on_boundary(payload)
            elif priority == ARRIVAL:
                self.on_arrival(payload)
            elif priority == START:
                self.on_start(*payload)
            else:
                self.on_end(*payload)
        return self.collect()

    # -- window boundaries ------------------------------------------------

    def on_boundary(self, k: int) -> None:
        stats = self.window_stats.get(k - 1, {}) if k > 0 else {}
        for pair in self.assignment.pairs:
            self.flagged.discard(pair)  # survived a full window in place
        flagged_now = tuple(sorted(self.flagged))
        new_assignment = self.place(stats)
        evictions = tuple(evict_services(self.assignment, new_assignment))
        self.flagged.update(evictions)
        self.assignment = new_assignment
        for e in self.edges:
            e.hosted = set(new_assignment.services_of(e.id))
            e.reuse_table.reset_window_counters()
        self.match_stats = stats
        if self.cfg.scheme == "extended-whistle":
            self.budgets = {
                e.id: max(0.0, e.compute * self.tau - sum(
                    stats[s].origin_complexity_sums.get(e.id, 0.0)
                    for s in e.hosted if s in stats))
                for e in self.edges
            }
            self.committed = {e.id: 0.0 for e in self.edges}
        self.windows.append(WindowRecord(
            k, k * self.tau, tuple(sorted(new_assignment.pairs)), evictions,
            flagged_now, new_assignment.stage1_proposals,
            new_assignment.stage2_proposals))

    def place(self, stats: dict[int, WindowStats]) -> Assignment:
        services = [service_from_stats(sid, st)
                    for sid, st in sorted(stats.items()) if st.received_count > 0]
        if not services or self.cfg.scheme == "cloud":
            return cloud_only(services, self.edges)
        scheme = self.cfg.scheme
        window = len(self.windows)
        if scheme == "random":
            return random_edge(services, self.edges,
                               _window_rng(self.cfg.seed, window), stats, self.tau)
        if scheme == "greedy":
            return greedy_frequency(services, self.edges, stats, self.tau)
        if scheme == "ga":
            return genetic(services, self.edges, stats,
                           _window_rng(self.cfg.seed, window), self.cfg.ga, self.tau)
        if scheme == "sa":
            return annealing(services, self.edges, stats, self.cloud,
                             _window_rng(self.cfg.seed, window), self.cfg.sa,
                             self.tau, lookup_s=self.cfg.lookup_s,
                             reuse_enabled=self.reuse_on)
        if scheme == "matching-no-reuse":
            return matching_no_reuse(services, self.edges, stats,
                                     self.cfg.replica_quota)
        return whistle_match(services, self.edges, stats, self.cfg.replica_quota,
                             lookup_s=self.cfg.lookup_s,
                             evicted=frozenset(self.flagged),
                             gain_sign=self.cfg.gain_sign)

    # -- task lifecycle ---------------------------------------------------

    def on_arrival(self, task: Task) -> None:
        window = min(int(task.arrival_time / self.tau), self.last_window)
        per_service = self.window_stats.setdefault(window, {})
        stats = per_service.setdefault(task.service, WindowStats(self.tau))
        update_window_stats(stats, task)
        state = _TaskState(task, window)
        origin = self.edges[task.origin_edge]
        if self.assignment.hosts(task.service, task.origin_edge):
            state.target = task.origin_edge
            state.comm_s = task.input_size / origin.bandwidth
        elif self.cfg.scheme == "extended-whistle":
            reachable = [e for e in self.edges if e.id in origin.neighbors]
            route = extended_match(task, origin, reachable, self.match_stats,
                                   can_accept=self._has_headroom(task))
            if route.target is not None:
                self.committed[route.target] += task.complexity
                state.target = route.target
                state.redirected = True
                state.comm_s = (task.input_size / origin.bandwidth
                                + task.input_size / origin.redirect_bw)
                state.redirect_mb = task.input_size
        if state.target is None:
            state.comm_s = task.input_size / self.cloud.bandwidth
            state.core_mb = task.input_size
        server = self.servers[CLOUD if state.target is None else state.target]
        self.push(self.now + state.comm_s, START, (server, state))

    def _has_headroom(self, task: Task):
        def ok(edge: EdgeServer) -> bool:
            return (self.committed[edge.id] + task.complexity
                    <= self.budgets.get(edge.id, 0.0))
        return ok

    def on_start(self, server: _Server, state: _TaskState) -> None:
        state.join_s = self.now
        if server.current is None:
            self.begin(server, state)
        else:
            server.queue.append(state)

    def begin(self, server: _Server, state: _TaskState) -> None:
        task = state.task
        state.queue_s = self.now - state.join_s
        if state.target is None:
            state.comp_s = task.complexity / self.cloud.compute
            state.executed_units = task.complexity
            state.location = LOC_CLOUD
        else:
            edge = self.edges[state.target]
            if self.reuse_on:
                outcome = edge.reuse_table.lookup(task.service, task.input,
                                                  task.complexity)
                lookup_units = self.cfg.lookup_s * edge.compute
                if outcome.kind is LookupKind.FULL:
                    state.comp_s = self.cfg.lookup_s
                    state.executed_units = lookup_units
                    state.location = LOC_FULL
                    state.reuse_kind = "full"
                elif outcome.kind is LookupKind.PARTIAL:
                    residual = outcome.residual_complexity
                    state.comp_s = self.cfg.lookup_s + residual / edge.compute
                    state.executed_units = residual + lookup_units
                    state.location = LOC_PARTIAL
                    state.reuse_kind = "partial"
                else:
                    state.comp_s = task.complexity / edge.compute
                    state.executed_units = task.complexity
                    state.location = LOC_SCRATCH
                    state.reuse_kind = "miss"
                    state.pending_insert = True
            else:
                state.comp_s = task.complexity / edge.compute
                state.executed_units = task.complexity
                state.location = LOC_SCRATCH
        server.current = state
        server.busy.append((self.now, self.now + state.comp_s))
        self.push(self.now + state.comp_s, END, (server, state))

    def on_end(self, server: _Server, state: _TaskState) -> None:
        task = state.task
        if state.pending_insert:
            table = self.edges[state.target].reuse_table
            # an identical in-flight task may have landed first
            if (task.service, task.input) not in table:
                table.insert(task.service, task.input, task.output_size,
                             task.complexity)
        stats = self.window_stats[state.window][task.service]
        update_window_stats(
            stats, task, comm_cost=state.comm_s,
            comp_cost=state.comp_s if state.reuse_kind in ("none", "miss") else None,
            reuse_cost=state.comp_s if state.reuse_kind in ("full", "partial") else None,
            count=False)
        self.records.append(TaskRecord(
            task.id, task.service, state.window, task.origin_edge, state.target,
            state.redirected, state.location, state.reuse_kind, state.comm_s,
            state.queue_s, state.comp_s, self.now - task.arrival_time,
            state.executed_units, state.core_mb, state.redirect_mb))
        server.current = None
        if server.queue:
            self.begin(server, server.queue.popleft())

    # -- wrap-up ----------------------------------------------------------

    def collect(self) -> SimResult:
        horizon = max(self.now, (self.last_window + 1) * self.tau)
        busy_totals = {}
        for server in self.servers.values():
            busy_totals[server.label] = sum(b - a for a, b in server.busy)
            # executions may straddle boundaries; split them across windows
            for a, b in server.busy:
                k = int(a / self.tau)
                while k < len(self.windows) and k * self.tau < b:
                    lo = max(a, k * self.tau)
                    hi = min(b, (k + 1) * self.tau)
                    if hi > lo:
                        record = self.windows[k]
                        record.busy_s[server.label] = (
                            record.busy_s.get(server.label, 0.0) + (hi - lo))
                    k += 1
        self.records.sort(key=lambda r: r.task_id)
        if len(self.records) != len(self.tasks):
            raise ContractError("some tasks never completed")
        return SimResult(
            self.cfg.scheme, self.cfg.seed, self.cfg, fingerprint(self.tasks),
            self.tau, horizon,
            sum(t.input_size for t in self.tasks),
            sum(t.complexity for t in self.tasks),
            self.records, self.windows, busy_totals,
            {e.id: e.reuse_table for e in self.edges})


def run_trial(config: TrialConfig, trace) -> SimResult:
    """Drive one trace through one scheme; deterministic for a given seed."""
    config.validate()
    for earlier, later in zip(trace, trace[1:]):
        if later.arrival_time < earlier.arrival_time:
            raise DomainError("trace must be sorted by arrival time")
    if not trace:
        return SimResult(config.scheme, config.seed, config, fingerprint(()),
                         config.window_s or 1.0, 0.0, 0.0, 0.0)
    mean_scratch = (sum(t.complexity for t in trace) / len(trace)) / config.edge_compute
    if config.lookup_s > 0.1 * mean_scratch:
        warnings.warn("lookup_s is not small next to edge execution time; "
                      "reuse hits will barely pay off", stacklevel=2)
    return _Trial(config, trace).run()


def write_sim_csv(result: SimResult, tasks_path, windows_path) -> None:
    """Per-task and per-window rows, fixed column order, 6-decimal floats."""
    with open(tasks_path, "w", newline="") as fh:
        fh.write("task_id,service,location,comm_s,comp_s,queue_s,total_s,reuse_kind\n")
        for r in result.tasks:
            fh.write(f"{r.task_id},{r.service},{r.location},{r.comm_s:.6f},"
                     f"{r.comp_s:.6f},{r.queue_s:.6f},{r.total_s:.6f},{r.reuse_kind}\n")
    with open(windows_path, "w", newline="") as fh:
        fh.write("window,scheme,placements,evictions\n")
        for w in result.windows:
            placed = ";".join(f"{s}:{e}" for s, e in w.placements)
            evicted = ";".join(f"{s}:{e}" for s, e in w.evictions)
            fh.write(f"{w.index},{result.scheme},{placed},{evicted}\n")


def mm1_calibration(arrival_rate: float, service_rate: float, n_tasks: int,
                    seed: int = 0) -> float:
    """Measured mean sojourn of an exponential workload through the real
    queue machinery; compare against mm1_expected_sojourn."""
    if n_tasks < 1:
        raise DomainError("n_tasks must be >= 1")
    mm1_expected_sojourn(arrival_rate, service_rate)  # validates stability
    rng = random.Random(seed)
    compute = 1000.0
    clock = 0.0
    tasks = []
    for i in range(n_tasks):
        clock += rng.expovariate(arrival_rate)
        complexity = max(rng.expovariate(service_rate) * compute, 1e-12)
        tasks.append(Task(i, 0, clock, InputDescriptor((i,)), 0.0, complexity))
    config = TrialConfig(scheme="cloud", seed=seed, n_edges=1,
                         cloud_compute=compute, window_s=clock + 1.0)
    result = run_trial(config, tasks)
    return sum(r.total_s for r in result.tasks) / n_tasks
