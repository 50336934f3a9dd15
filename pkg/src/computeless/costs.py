"""Static cost model for routed tasks.

All quantities are seconds. A task pays a transfer cost over the chosen
path plus an execution cost at the target: scratch execution when nothing
is reused, or a table lookup plus the residual computation when it is.
Queueing is measured by the simulator and is zero in the static view; the
placement objective below is the queueing-free sum of completion costs.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import ContractError, DomainError
from .matching import Acceptance, Assignment
from .model import CloudServer, EdgeServer, Task, WindowStats
from .reuse import LookupKind, LookupOutcome


@dataclass(frozen=True)
class RoutingDecision:
    """Where a task ran and whether reuse applied.

    Reuse only exists at edges, and a full hit leaves nothing to compute,
    so: full_reuse implies reuse_applied implies an edge target.
    """

    offload_target: int | None  # edge id; None routes to the cloud
    reuse_applied: bool = False
    full_reuse: bool = False
    residual_complexity: float = 0.0

    def __post_init__(self):
        if self.full_reuse and not self.reuse_applied:
            raise ContractError("full_reuse without reuse_applied")
        if self.reuse_applied and self.offload_target is None:
            raise ContractError("reuse requires an edge target")
        if self.full_reuse and self.residual_complexity != 0.0:
            raise ContractError("full reuse leaves no residual complexity")
        if self.residual_complexity < 0:
            raise DomainError("residual_complexity must be >= 0")

    @classmethod
    def cloud(cls, task: Task) -> "RoutingDecision":
        return cls(None, residual_complexity=task.complexity)

    @classmethod
    def edge(cls, edge_id: int, task: Task) -> "RoutingDecision":
        return cls(edge_id, residual_complexity=task.complexity)

    @classmethod
    def edge_reuse(cls, edge_id: int, outcome: LookupOutcome) -> "RoutingDecision":
        if outcome.kind is LookupKind.MISS:
            raise ContractError("a miss is not a reuse decision")
        return cls(edge_id, reuse_applied=True,
                   full_reuse=outcome.kind is LookupKind.FULL,
                   residual_complexity=outcome.residual_complexity)


@dataclass(frozen=True)
class CostBreakdown:
    communication: float
    computation: float
    queueing: float = 0.0

    def __post_init__(self):
        if min(self.communication, self.computation, self.queueing) < 0:
            raise DomainError("cost components must be >= 0")

    @property
    def total(self) -> float:
        return self.communication + self.computation + self.queueing


def communication_cost(task: Task, decision: RoutingDecision,
                       edge_bandwidth: float, cloud_bandwidth: float) -> float:
    bandwidth = cloud_bandwidth if decision.offload_target is None else edge_bandwidth
    if bandwidth <= 0:
        raise DomainError("bandwidth must be > 0")
    return task.input_size / bandwidth


def computation_cost(task: Task, decision: RoutingDecision,
                     edge_capacity: float, cloud_capacity: float) -> float:
    """Scratch execution seconds; reuse decisions cost via reuse_execution_cost."""
    if decision.reuse_applied:
        raise ContractError("computation_cost called on a reuse decision")
    capacity = cloud_capacity if decision.offload_target is None else edge_capacity
    if capacity <= 0:
        raise DomainError("compute capacity must be > 0")
    return task.complexity / capacity


def reuse_execution_cost(decision: RoutingDecision, lookup_s: float,
                         edge_capacity: float) -> float:
    """Lookup latency plus the residual computation, if any."""
    if not decision.reuse_applied:
        raise ContractError("reuse_execution_cost called without reuse")
    if lookup_s < 0:
        raise DomainError("lookup latency must be >= 0")
    if decision.full_reuse:
        return lookup_s
    if edge_capacity <= 0:
        raise DomainError("compute capacity must be > 0")
    return lookup_s + decision.residual_complexity / edge_capacity


def completion_cost(task: Task, decision: RoutingDecision, edges, cloud: CloudServer,
                    lookup_s: float, queueing_delay: float = 0.0) -> CostBreakdown:
    """Static completion cost of one routed task.

    edges maps edge id -> EdgeServer; only the decision's target is used.
    """
    if queueing_delay < 0:
        raise DomainError("queueing delay must be >= 0")
    if decision.offload_target is None:
        # the edge-side parameters are unused on the cloud path
        comm = communication_cost(task, decision, 1.0, cloud.bandwidth)
        execu = computation_cost(task, decision, 1.0, cloud.compute)
    else:
        try:
            edge = edges[decision.offload_target]
        except (KeyError, IndexError, TypeError):
            raise ContractError(f"unknown edge {decision.offload_target}") from None
        comm = communication_cost(task, decision, edge.bandwidth, 1.0)
        if decision.reuse_applied:
            execu = reuse_execution_cost(decision, lookup_s, edge.compute)
        else:
            execu = computation_cost(task, decision, edge.compute, 1.0)
    return CostBreakdown(comm, execu, queueing_delay)


def objective_value(tasks, decisions, edges, cloud: CloudServer,
                    lookup_s: float) -> float:
    """Sum of static completion costs over a batch (queueing excluded)."""
    if len(tasks) != len(decisions):
        raise ContractError("tasks and decisions differ in length")
    return sum(completion_cost(t, d, edges, cloud, lookup_s).total
               for t, d in zip(tasks, decisions))


@dataclass(frozen=True)
class Violation:
    kind: str  # "quota" | "compute" | "bandwidth"
    edge: int
    amount: float
    limit: float

    def __str__(self):
        return f"{self.kind} violated at edge {self.edge}: {self.amount:g} > {self.limit:g}"


def check_feasibility(assignment: Assignment, tasks, edges,
                      window_length: float) -> list[Violation]:
    """Quota and per-window rate constraints for one window's demand.

    A task loads its origin edge iff that edge hosts its service; compute
    demand must fit capacity * window and input bits must fit
    bandwidth * window, per edge.
    """
    if window_length <= 0:
        raise DomainError("window_length must be > 0")
    violations = []
    by_id = {e.id: e for e in edges}
    comp: dict[int, float] = {e.id: 0.0 for e in edges}
    band: dict[int, float] = {e.id: 0.0 for e in edges}
    for edge in sorted(edges, key=lambda e: e.id):
        hosted = assignment.services_of(edge.id)
        if len(hosted) > edge.service_quota:
            violations.append(Violation("quota", edge.id,
                                        len(hosted), edge.service_quota))
    for task in tasks:
        if task.origin_edge is None or not assignment.hosts(task.service, task.origin_edge):
            continue
        comp[task.origin_edge] += task.complexity
        band[task.origin_edge] += task.input_size
    for eid in sorted(comp):
        edge = by_id[eid]
        if comp[eid] > edge.compute * window_length:
            violations.append(Violation("compute", eid, comp[eid],
                                        edge.compute * window_length))
        if band[eid] > edge.bandwidth * window_length:
            violations.append(Violation("bandwidth", eid, band[eid],
                                        edge.bandwidth * window_length))
    return violations


def _group_cost(stats: WindowStats, count: int, hosted: bool, edge: EdgeServer,
                cloud: CloudServer, lookup_s: float, reuse_enabled: bool) -> float:
    """Expected static cost of `count` same-origin tasks of one service."""
    if hosted:
        comm = stats.mean_input_size / edge.bandwidth
        if reuse_enabled:
            rr = stats.repeat_ratio  # repeats resolve to full hits in expectation
            execu = rr * lookup_s + (1.0 - rr) * (stats.mean_complexity / edge.compute)
        else:
            execu = stats.mean_complexity / edge.compute
    else:
        comm = stats.mean_input_size / cloud.bandwidth
        execu = stats.mean_complexity / cloud.compute
    return count * (comm + execu)


def placement_objective(assignment: Assignment, stats, edges, cloud: CloudServer,
                        lookup_s: float, reuse_enabled: bool = True) -> float:
    """Static window objective of a placement against observed demand.

    Tasks are grouped by (service, origin edge); hosted groups pay the edge
    path with the service's expected reuse mix, un-hosted groups pay the
    cloud path.
    """
    total = 0.0
    for sid in sorted(stats):
        st = stats[sid]
        for edge in sorted(edges, key=lambda e: e.id):
            count = st.origin_counts.get(edge.id, 0)
            if count == 0:
                continue
            total += _group_cost(st, count, assignment.hosts(sid, edge.id),
                                 edge, cloud, lookup_s, reuse_enabled)
    return total


BRUTE_FORCE_MAX_SERVICES = 12
BRUTE_FORCE_MAX_EDGES = 4


def brute_force_offload(services, edges, stats, cloud: CloudServer,
                        window_length: float, lookup_s: float,
                        reuse_enabled: bool = True) -> Assignment:
    """Exhaustive optimum of the static window objective.

    A task can only be edge-served at its origin edge, so the objective
    decomposes per edge and each edge's best hosted subset can be chosen
    independently (subject to its quota and rate constraints). Guarded to
    stay enumerable; replica limits are not modelled here.
    """
    if len(services) > BRUTE_FORCE_MAX_SERVICES:
        raise DomainError(f"brute force capped at {BRUTE_FORCE_MAX_SERVICES} services")
    if len(edges) > BRUTE_FORCE_MAX_EDGES:
        raise DomainError(f"brute force capped at {BRUTE_FORCE_MAX_EDGES} edges")
    if window_length <= 0:
        raise DomainError("window_length must be > 0")
    sids = sorted(s.id for s in services)
    chosen: list[Acceptance] = []
    for edge in sorted(edges, key=lambda e: e.id):
        candidates = [sid for sid in sids if stats[sid].origin_counts.get(edge.id, 0) > 0]
        comp_budget = edge.compute * window_length
        band_budget = edge.bandwidth * window_length
        base = sum(_group_cost(stats[sid], stats[sid].origin_counts[edge.id], False,
                               edge, cloud, lookup_s, reuse_enabled)
                   for sid in candidates)
        best_cost, best_subset = base, ()
        for size in range(1, min(edge.service_quota, len(candidates)) + 1):
            for subset in combinations(candidates, size):
                comp = sum(stats[sid].origin_complexity_sums.get(edge.id, 0.0)
                           for sid in subset)
                band = sum(stats[sid].origin_input_sums.get(edge.id, 0.0)
                           for sid in subset)
                if comp > comp_budget or band > band_budget:
                    continue
                cost = sum(_group_cost(stats[sid], stats[sid].origin_counts[edge.id],
                                       sid in subset, edge, cloud, lookup_s,
                                       reuse_enabled)
                           for sid in candidates)
                if cost < best_cost:
                    best_cost, best_subset = cost, subset
        chosen.extend(Acceptance(sid, edge.id, None, None, None)
                      for sid in best_subset)
    return Assignment(chosen)
