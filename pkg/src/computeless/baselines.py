"""Placement baselines the matching schemes are compared against.

Each returns a plain Assignment so the simulator can consume any scheme
through one interface. The randomized ones take an explicit Random so a
trial seed pins them down completely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .costs import placement_objective
from .errors import DomainError
from .matching import (Acceptance, Assignment, PreferenceList, _run_matching)
from .model import CloudServer, EdgeServer, Service, WindowStats


@dataclass(frozen=True)
class GaParams:
    population: int = 30
    generations: int = 100
    mutation_rate: float = 0.05
    tournament: int = 3
    elite: int = 1

    def __post_init__(self):
        if self.population < 2 or self.generations < 1:
            raise DomainError("population must be >= 2 and generations >= 1")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise DomainError("mutation_rate must lie in [0, 1]")


@dataclass(frozen=True)
class SaParams:
    t0: float | None = None  # None: start at the initial objective value
    alpha: float = 0.95
    iterations: int = 2000

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")
        if self.iterations < 1:
            raise DomainError("iterations must be >= 1")


def _pairs_assignment(pairs) -> Assignment:
    return Assignment(Acceptance(s, e, None, None, None) for s, e in pairs)


def _edge_room(edge: EdgeServer, pairs, stats, window_length, sid) -> bool:
    """Quota room plus, when demand is known, per-window rate room."""
    hosted = [s for s, e in pairs if e == edge.id]
    if len(hosted) >= edge.service_quota:
        return False
    if window_length is None or not stats:
        return True
    comp = band = 0.0
    for s in hosted + [sid]:
        st = stats.get(s)
        if st is None:
            continue
        comp += st.origin_complexity_sums.get(edge.id, 0.0)
        band += st.origin_input_sums.get(edge.id, 0.0)
    return (comp <= edge.compute * window_length
            and band <= edge.bandwidth * window_length)


def cloud_only(services, edges) -> Assignment:
    """Everything runs remotely; the placement is empty."""
    return Assignment()


def random_edge(services, edges, rng, stats=None, window_length=None) -> Assignment:
    """Each service gets one uniformly drawn edge among those with room."""
    stats = stats or {}
    pairs: list[tuple[int, int]] = []
    for service in sorted(services, key=lambda s: s.id):
        options = [e for e in sorted(edges, key=lambda e: e.id)
                   if _edge_room(e, pairs, stats, window_length, service.id)]
        if not options:
            continue
        pick = options[rng.randrange(len(options))]
        pairs.append((service.id, pick.id))
    return _pairs_assignment(pairs)


def greedy_frequency(services, edges, stats, window_length=None) -> Assignment:
    """Most-invoked services first, each to the least-loaded edge with room."""
    order = sorted(services,
                   key=lambda s: (-stats[s.id].received_count, s.id))
    pairs: list[tuple[int, int]] = []
    for service in order:
        hosted_counts = {e.id: sum(1 for _, eid in pairs if eid == e.id)
                         for e in edges}
        options = [e for e in sorted(edges, key=lambda e: (hosted_counts[e.id], e.id))
                   if _edge_room(e, pairs, stats, window_length, service.id)]
        if not options:
            continue
        pairs.append((service.id, options[0].id))
    return _pairs_assignment(pairs)


def _quota_repair(bits, sids, eids, quotas, freq):
    """Drop lowest-frequency placements from over-quota edges."""
    for j, eid in enumerate(eids):
        hosted = [i for i in range(len(sids)) if bits[i * len(eids) + j]]
        while len(hosted) > quotas[eid]:
            drop = min(hosted, key=lambda i: (freq[sids[i]], -sids[i]))
            bits[drop * len(eids) + j] = 0
            hosted.remove(drop)


def _capacity_ok(bits, sids, eids, edges_by_id, stats, window_length) -> bool:
    if window_length is None:
        return True
    n_e = len(eids)
    for j, eid in enumerate(eids):
        edge = edges_by_id[eid]
        comp = band = 0.0
        for i, sid in enumerate(sids):
            if bits[i * n_e + j]:
                comp += stats[sid].origin_complexity_sums.get(eid, 0.0)
                band += stats[sid].origin_input_sums.get(eid, 0.0)
        if comp > edge.compute * window_length or band > edge.bandwidth * window_length:
            return False
    return True


def genetic(services, edges, stats, rng, params: GaParams = GaParams(),
            window_length=None, history=None) -> Assignment:
    """Bit-matrix GA maximizing the invocation count of placed services.

    Chromosomes are service x edge bit matrices; quota violations are
    repaired by dropping the least-invoked services, capacity violations
    score -inf. Tournament selection, single-point crossover, bit-flip
    mutation, one elite survivor.
    """
    sids = sorted(s.id for s in services)
    eids = sorted(e.id for e in edges)
    if not sids or not eids:
        return Assignment()
    edges_by_id = {e.id: e for e in edges}
    quotas = {e.id: e.service_quota for e in edges}
    freq = {sid: stats[sid].received_count for sid in sids}
    n = len(sids) * len(eids)

    def fitness(bits):
        if not _capacity_ok(bits, sids, eids, edges_by_id, stats, window_length):
            return -math.inf
        placed = {sids[i] for i in range(len(sids))
                  if any(bits[i * len(eids) + j] for j in range(len(eids)))}
        return float(sum(freq[sid] for sid in placed))

    def seeded_individual(top_k):
        bits = [0] * n
        by_freq = sorted(sids, key=lambda sid: (-freq[sid], sid))
        for sid in by_freq[:top_k]:
            i = sids.index(sid)
            j = rng.randrange(len(eids))
            bits[i * len(eids) + j] = 1
        for k in range(n):
            if rng.random() < 0.1:
                bits[k] ^= 1
        _quota_repair(bits, sids, eids, quotas, freq)
        return bits

    population = [seeded_individual(len(sids))]
    population += [seeded_individual(rng.randrange(len(sids) + 1))
                   for _ in range(params.population - 1)]
    scored = sorted(((fitness(b), b) for b in population),
                    key=lambda fb: -fb[0])

    def tournament():
        best = None
        for _ in range(params.tournament):
            cand = scored[rng.randrange(len(scored))]
            if best is None or cand[0] > best[0]:
                best = cand
        return best[1]

    for _ in range(params.generations):
        nxt = [scored[i][1][:] for i in range(params.elite)]
        while len(nxt) < params.population:
            a, b = tournament(), tournament()
            cut = rng.randrange(1, n) if n > 1 else 0
            child = a[:cut] + b[cut:]
            for k in range(n):
                if rng.random() < params.mutation_rate:
                    child[k] ^= 1
            _quota_repair(child, sids, eids, quotas, freq)
            nxt.append(child)
        scored = sorted(((fitness(b), b) for b in nxt), key=lambda fb: -fb[0])
        if history is not None:
            history.append(scored[0][0])

    best = scored[0][1]
    pairs = [(sids[i], eids[j]) for i in range(len(sids)) for j in range(len(eids))
             if best[i * len(eids) + j]]
    return _pairs_assignment(pairs)


def annealing(services, edges, stats, cloud: CloudServer, rng,
              params: SaParams = SaParams(), window_length=None, *,
              lookup_s: float, reuse_enabled: bool = True) -> Assignment:
    """Single-placement-flip annealing over the static window objective."""
    sids = sorted(s.id for s in services)
    eids = sorted(e.id for e in edges)
    if not sids or not eids:
        return Assignment()
    edges_by_id = {e.id: e for e in edges}
    quotas = {e.id: e.service_quota for e in edges}

    def cost(pairs) -> float:
        return placement_objective(_pairs_assignment(pairs), stats, edges, cloud,
                                   lookup_s, reuse_enabled)

    def feasible(pairs) -> bool:
        for eid in eids:
            hosted = [s for s, e in pairs if e == eid]
            if len(hosted) > quotas[eid]:
                return False
            if window_length is not None:
                edge = edges_by_id[eid]
                comp = sum(stats[s].origin_complexity_sums.get(eid, 0.0) for s in hosted)
                band = sum(stats[s].origin_input_sums.get(eid, 0.0) for s in hosted)
                if comp > edge.compute * window_length or band > edge.bandwidth * window_length:
                    return False
        return True

    current: set[tuple[int, int]] = set()
    cur_cost = cost(current)
    best, best_cost = set(current), cur_cost
    temperature = params.t0 if params.t0 is not None else max(cur_cost, 1e-9)
    for _ in range(params.iterations):
        sid = sids[rng.randrange(len(sids))]
        eid = eids[rng.randrange(len(eids))]
        candidate = set(current)
        candidate.symmetric_difference_update({(sid, eid)})
        if not feasible(candidate):
            temperature *= params.alpha
            continue
        cand_cost = cost(candidate)
        delta = cand_cost - cur_cost
        if delta <= 0 or rng.random() < math.exp(-delta / max(temperature, 1e-12)):
            current, cur_cost = candidate, cand_cost
            if cur_cost < best_cost:
                best, best_cost = set(current), cur_cost
        temperature *= params.alpha
    return _pairs_assignment(best)


def matching_no_reuse(services, edges, stats,
                      replica_quota: int | None = None) -> Assignment:
    """Deferred acceptance with every reuse term stripped from the utilities:
    services rank edges by 1/transfer, edges rank services by
    1/(scratch + undiscounted gain). The simulator pairs this with reuse
    tables disabled."""
    if replica_quota is None:
        replica_quota = len(edges)
    if not services or not edges or replica_quota == 0:
        return Assignment()
    svc_prefs: dict[int, PreferenceList] = {}
    edge_prefs: dict[int, PreferenceList] = {}
    edges_sorted = sorted(edges, key=lambda e: e.id)
    services_sorted = sorted(services, key=lambda s: s.id)
    for service in services_sorted:
        st = stats[service.id]
        ranked = [(e.id, e.bandwidth / st.mean_input_size)
                  for e in edges_sorted if st.mean_input_size > 0]
        ranked.sort(key=lambda t: (-t[1], t[0]))
        svc_prefs[service.id] = PreferenceList(service.id, tuple(ranked))
    for edge in edges_sorted:
        ranked = []
        for service in services_sorted:
            st = stats[service.id]
            chi = st.mean_complexity / edge.compute
            gain = st.mean_input_size / edge.bandwidth + st.mean_complexity / edge.compute
            denom = chi + gain
            if denom > 0:
                ranked.append((service.id, 1.0 / denom))
        ranked.sort(key=lambda t: (-t[1], t[0]))
        edge_prefs[edge.id] = PreferenceList(edge.id, tuple(ranked))
    quotas = {e.id: e.service_quota for e in edges}
    record, proposals = _run_matching(svc_prefs, edge_prefs, quotas, replica_quota)
    out = Assignment(record.values())
    out.stage1_proposals = proposals[1]
    out.stage2_proposals = proposals[2]
    return out
