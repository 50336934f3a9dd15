"""Preference construction and matching-based service placement.

Placement is a many-to-many matching between services and edge servers.
Services rank edges by how cheaply their tasks reach them, discounted by
the eviction punishment; edges rank services by how cheaply they can run
them once the expected reuse saving is folded in. A deferred-acceptance
pass with per-edge quotas produces the placement (stage 1); services left
unhosted get re-proposal passes until nothing moves (stage 2).

The one-to-many variant routes individual tasks of locally un-hosted
services across one-hop neighbors, again preference-ordered, falling back
to the cloud when nobody has room.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ContractError, DomainError
from .model import (CloudServer, EdgeServer, Service, Task, WindowStats,
                    compute_granularity, compute_reusability)


@dataclass(frozen=True)
class Acceptance:
    service: int
    edge: int
    theta: float | None  # service-side utility at acceptance
    phi: float | None  # edge-side utility at acceptance
    stage: int | None  # 1 = first pass, 2 = re-proposal pass


class Assignment:
    """An immutable set of (service, edge) placements with their records."""

    def __init__(self, acceptances=()):
        records = tuple(sorted(acceptances, key=lambda a: (a.service, a.edge)))
        pairs = frozenset((a.service, a.edge) for a in records)
        if len(pairs) != len(records):
            raise ContractError("duplicate placement pair")
        self._records = records
        self.pairs = pairs
        self._by_service: dict[int, list[int]] = {}
        self._by_edge: dict[int, list[int]] = {}
        for a in records:
            self._by_service.setdefault(a.service, []).append(a.edge)
            self._by_edge.setdefault(a.edge, []).append(a.service)
        self.stage1_proposals = 0
        self.stage2_proposals = 0

    def __len__(self) -> int:
        return len(self.pairs)

    def __eq__(self, other) -> bool:
        return isinstance(other, Assignment) and self.pairs == other.pairs

    def __hash__(self):
        return hash(self.pairs)

    def __repr__(self) -> str:
        return f"Assignment({sorted(self.pairs)})"

    def records(self) -> tuple[Acceptance, ...]:
        return self._records

    def edges_of(self, service: int) -> tuple[int, ...]:
        return tuple(self._by_service.get(service, ()))

    def services_of(self, edge: int) -> tuple[int, ...]:
        return tuple(self._by_edge.get(edge, ()))

    def hosts(self, service: int, edge: int | None) -> bool:
        return edge is not None and (service, edge) in self.pairs


def write_assignment_csv(assignment: Assignment, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["service_id", "edge_id", "theta", "phi", "stage"])
        for a in assignment.records():
            writer.writerow([
                a.service, a.edge,
                "" if a.theta is None else f"{a.theta:.6f}",
                "" if a.phi is None else f"{a.phi:.6f}",
                "" if a.stage is None else a.stage,
            ])


@dataclass(frozen=True)
class PreferenceList:
    owner: int
    ranked: tuple[tuple[int, float], ...]  # (candidate id, utility), best first
    excluded: tuple[int, ...] = ()  # dropped for non-positive denominators

    def __post_init__(self):
        seen = set()
        prev = None
        for cid, u in self.ranked:
            if cid in seen:
                raise ContractError(f"duplicate candidate {cid}")
            seen.add(cid)
            if u <= 0:
                raise ContractError("preference utilities must be positive")
            if prev is not None and (u, -cid) > (prev[1], -prev[0]):
                raise ContractError("ranking must descend (ties by ascending id)")
            prev = (cid, u)


def service_utility(service: Service, edge: EdgeServer,
                    stats: WindowStats) -> float | None:
    """1 / (mean transfer seconds to the edge + reusability - punishment).

    None when the denominator is not positive; the caller records the
    exclusion instead of raising.
    """
    comm = stats.mean_input_size / edge.bandwidth
    denom = comm + service.reusability - service.punishment
    if denom <= 0:
        return None
    return 1.0 / denom


def gain_scalar(edge: EdgeServer, service: Service) -> float:
    """Per-task savings in seconds on this edge's links and cores."""
    g = service.gain
    return g.saved_input / edge.bandwidth + g.saved_complexity / edge.compute


def estimate_reuse_cost(service: Service, edge: EdgeServer, stats: WindowStats,
                        lookup_s: float) -> float:
    """Expected reuse-execution seconds before any is observed: a full hit
    with probability reusability, lookup plus scratch otherwise."""
    chi = stats.mean_complexity / edge.compute
    sigma = service.reusability
    return sigma * lookup_s + (1.0 - sigma) * (lookup_s + chi)


def edge_utility(edge: EdgeServer, service: Service, stats: WindowStats,
                 gain: float, lookup_s: float,
                 gain_sign: str = "literal") -> float | None:
    """1 / (scratch seconds + reuse seconds +/- gain), None when non-positive.

    gain_sign selects where the offloading gain enters the denominator:
    "literal" adds it, "subtract" removes it (the sensitivity variant).
    """
    chi = stats.mean_complexity / edge.compute
    if stats.reuse_samples > 0:
        eta = stats.mean_reuse_cost
    else:
        eta = estimate_reuse_cost(service, edge, stats, lookup_s)
    if gain_sign == "literal":
        denom = chi + eta + gain
    elif gain_sign == "subtract":
        denom = chi + eta - gain
    else:
        raise DomainError(f"unknown gain_sign {gain_sign!r}")
    if denom <= 0:
        return None
    return 1.0 / denom


def neighbor_utility(reusability: float, neighbor: EdgeServer,
                     stats: WindowStats) -> float | None:
    """1 / (mean transfer seconds over the edge-to-edge path + reusability)."""
    denom = stats.mean_input_size / neighbor.redirect_bw + reusability
    if denom <= 0:
        return None
    return 1.0 / denom


def build_preference_lists(services, edges, stats, lookup_s: float,
                           evicted=frozenset(), gain_sign: str = "literal"):
    """Both sides' rankings. evicted is a set of (service_id, edge_id) pairs
    that trigger the punished utility on the service side."""
    svc_prefs: dict[int, PreferenceList] = {}
    edge_prefs: dict[int, PreferenceList] = {}
    edges_sorted = sorted(edges, key=lambda e: e.id)
    services_sorted = sorted(services, key=lambda s: s.id)
    for service in services_sorted:
        st = stats.get(service.id)
        if st is None:
            raise ContractError(f"no window statistics for service {service.id}")
        ranked, excluded = [], []
        for edge in edges_sorted:
            view = replace(service, evicted=(service.id, edge.id) in evicted)
            u = service_utility(view, edge, st)
            if u is None:
                excluded.append(edge.id)
            else:
                ranked.append((edge.id, u))
        ranked.sort(key=lambda t: (-t[1], t[0]))
        svc_prefs[service.id] = PreferenceList(service.id, tuple(ranked), tuple(excluded))
    for edge in edges_sorted:
        ranked, excluded = [], []
        for service in services_sorted:
            st = stats[service.id]
            u = edge_utility(edge, service, st, gain_scalar(edge, service),
                             lookup_s, gain_sign)
            if u is None:
                excluded.append(service.id)
            else:
                ranked.append((service.id, u))
        ranked.sort(key=lambda t: (-t[1], t[0]))
        edge_prefs[edge.id] = PreferenceList(edge.id, tuple(ranked), tuple(excluded))
    return svc_prefs, edge_prefs


def utility_maps(svc_prefs, edge_prefs):
    theta = {(s, e): u for s, pl in svc_prefs.items() for e, u in pl.ranked}
    phi = {(e, s): u for e, pl in edge_prefs.items() for s, u in pl.ranked}
    return theta, phi


def _run_matching(svc_prefs, edge_prefs, quotas, replica_quota):
    """Two-stage deferred acceptance. Returns (records dict, proposal counts)."""
    edge_rank = {e: dict(pl.ranked) for e, pl in edge_prefs.items()}
    held: dict[int, set[int]] = {e: set() for e in edge_prefs}
    placements: dict[int, set[int]] = {s: set() for s in svc_prefs}
    record: dict[tuple[int, int], Acceptance] = {}
    proposals = {1: 0, 2: 0}
    n_s, n_e = len(svc_prefs), len(edge_prefs)

    def edge_key(e, s):
        # lower sorts better: highest utility first, then smallest id
        return (-edge_rank[e][s], s)

    def run_pass(proposers, stage):
        changed = False
        pointer = {s: 0 for s in proposers}
        active = deque(sorted(pointer))
        budget = n_s * n_e + 1
        while active:
            s = active.popleft()
            prefs = svc_prefs[s].ranked
            while len(placements[s]) < replica_quota and pointer[s] < len(prefs):
                e, theta = prefs[pointer[s]]
                pointer[s] += 1
                proposals[stage] += 1
                if proposals[stage] > budget:
                    raise ContractError("proposal budget exceeded; matching did not settle")
                if e in placements[s]:
                    continue
                rank = edge_rank.get(e, {})
                if s not in rank:
                    continue  # the edge excluded this service
                if len(held[e]) < quotas[e]:
                    accept = True
                else:
                    worst = max(held[e], key=lambda w: edge_key(e, w))
                    accept = edge_key(e, s) < edge_key(e, worst)
                    if accept:
                        held[e].discard(worst)
                        placements[worst].discard(e)
                        del record[(worst, e)]
                        if worst in pointer:
                            active.append(worst)
                        # a bumped outsider joins the next stage-2 pass
                if accept:
                    held[e].add(s)
                    placements[s].add(e)
                    record[(s, e)] = Acceptance(s, e, theta, rank[s], stage)
                    changed = True
        return changed

    run_pass(list(svc_prefs), 1)
    rounds = 0
    while True:
        unhosted = [s for s, placed in placements.items()
                    if not placed and svc_prefs[s].ranked]
        if not unhosted:
            break
        rounds += 1
        if rounds > n_s * n_e + 1:
            raise ContractError("re-proposal passes did not settle")
        if not run_pass(unhosted, 2):
            break
    return record, proposals


def whistle_match(services, edges, stats, replica_quota: int | None = None, *,
                  lookup_s: float, evicted=frozenset(),
                  gain_sign: str = "literal") -> Assignment:
    """Match services onto edges; replica_quota caps placements per service
    (defaults to the number of edges, i.e. unbounded replication)."""
    if replica_quota is None:
        replica_quota = len(edges)
    if replica_quota < 0:
        raise DomainError("replica_quota must be >= 0")
    if not services or not edges or replica_quota == 0:
        return Assignment()
    svc_prefs, edge_prefs = build_preference_lists(
        services, edges, stats, lookup_s, evicted, gain_sign)
    quotas = {e.id: e.service_quota for e in edges}
    record, proposals = _run_matching(svc_prefs, edge_prefs, quotas, replica_quota)
    out = Assignment(record.values())
    out.stage1_proposals = proposals[1]
    out.stage2_proposals = proposals[2]
    return out


def is_exchange_stable(assignment: Assignment, theta, phi):
    """Check two-sided exchange stability against raw utility maps.

    A violation is a pair of placements (s1,e1), (s2,e2) whose services
    could swap hosts with all four utilities no worse and at least one
    strictly better. Returns (stable, list of (s1, e1, s2, e2))."""
    pairs = sorted(assignment.pairs)
    violations = []
    for i, (s1, e1) in enumerate(pairs):
        for s2, e2 in pairs[i + 1:]:
            if s1 == s2 or e1 == e2:
                continue
            if (s1, e2) in assignment.pairs or (s2, e1) in assignment.pairs:
                continue
            swap = (theta.get((s1, e2)), theta.get((s2, e1)),
                    phi.get((e1, s2)), phi.get((e2, s1)))
            stay = (theta.get((s1, e1)), theta.get((s2, e2)),
                    phi.get((e1, s1)), phi.get((e2, s2)))
            if any(u is None for u in swap) or any(u is None for u in stay):
                continue  # someone finds the swap unacceptable
            deltas = [a - b for a, b in zip(swap, stay)]
            if all(d >= 0 for d in deltas) and any(d > 0 for d in deltas):
                violations.append((s1, e1, s2, e2))
    return (not violations, violations)


@dataclass(frozen=True)
class NeighborRoute:
    task_id: int
    service: int
    target: int | None  # neighbor edge id; None means the cloud
    utility: float | None = None


def _stats_reusability(stats: WindowStats) -> float | None:
    if stats.received_count < 1:
        return None
    return compute_reusability(
        compute_granularity(stats.received_count, stats.distinct_count))


def extended_match(task: Task, local_edge: EdgeServer, neighbors, stats,
                   can_accept=None) -> NeighborRoute:
    """Route one task whose service the local edge does not host.

    Hosting one-hop neighbors are tried best-utility-first (ties to the
    smaller id); the first one with room, per can_accept, takes the task.
    Falls back to the cloud when nobody accepts."""
    if task.service in local_edge.hosted:
        raise ContractError(f"task {task.id}: service is hosted locally")
    st = stats.get(task.service)
    if st is None:
        return NeighborRoute(task.id, task.service, None)
    sigma = _stats_reusability(st)
    if sigma is None:
        return NeighborRoute(task.id, task.service, None)
    ranked = []
    for nb in neighbors:
        if nb.id == local_edge.id or task.service not in nb.hosted:
            continue
        u = neighbor_utility(sigma, nb, st)
        if u is not None:
            ranked.append((u, nb))
    ranked.sort(key=lambda t: (-t[0], t[1].id))
    for u, nb in ranked:
        if can_accept is None or can_accept(nb):
            return NeighborRoute(task.id, task.service, nb.id, u)
    return NeighborRoute(task.id, task.service, None)


def find_blocking_pair(routes, tasks, neighbors, stats, budgets):
    """Replay neighbor routings in order, looking for a task sent past a
    strictly better hosting neighbor that still had room at decision time.

    budgets maps edge id -> compute units available for redirected work in
    the window; commitments accumulate as the replay walks the routes.
    Returns the first blocking (service, edge_id) pair or None."""
    by_id = {t.id: t for t in tasks}
    nb_sorted = sorted(neighbors, key=lambda e: e.id)
    nb_by_id = {nb.id: nb for nb in nb_sorted}
    committed = {nb.id: 0.0 for nb in nb_sorted}
    for route in routes:
        task = by_id[route.task_id]
        st = stats.get(task.service)
        sigma = _stats_reusability(st) if st is not None else None
        if sigma is None:
            continue
        chosen = float("-inf")
        if route.target is not None:
            u = neighbor_utility(sigma, nb_by_id[route.target], st)
            chosen = u if u is not None else float("-inf")
        for nb in nb_sorted:
            if nb.id == route.target or task.service not in nb.hosted:
                continue
            u = neighbor_utility(sigma, nb, st)
            if u is None or u <= chosen:
                continue
            if committed[nb.id] + task.complexity <= budgets.get(nb.id, float("inf")):
                return (task.service, nb.id)
        if route.target is not None:
            committed[route.target] += task.complexity
    return None
