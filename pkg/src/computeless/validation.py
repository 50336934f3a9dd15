"""Self-check suites: matching stability, routing stability, placement
quality against small exact optima, baseline feasibility, and the queue
discipline against its closed form. The CLI's validate subcommand and the
test suite both run these.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from .baselines import greedy_frequency, random_edge
from .costs import (BRUTE_FORCE_MAX_EDGES, BRUTE_FORCE_MAX_SERVICES,
                    brute_force_offload, placement_objective)
from .matching import (build_preference_lists, extended_match,
                       find_blocking_pair, is_exchange_stable, utility_maps,
                       whistle_match)
from .model import CloudServer, EdgeServer, InputDescriptor, Task, WindowStats, service_from_stats
from .simulator import mm1_calibration, mm1_expected_sojourn

LOOKUP_S = 0.0005


@dataclass
class SuiteResult:
    name: str
    cases: int
    failures: list[str] = field(default_factory=list)
    info: str = ""

    @property
    def passed(self) -> bool:
        return not self.failures

    def __str__(self) -> str:
        state = "ok" if self.passed else f"FAILED ({len(self.failures)})"
        extra = f" - {self.info}" if self.info else ""
        return f"{self.name}: {self.cases} cases, {state}{extra}"


def random_matching_instance(rng: random.Random, n_services: int, n_edges: int,
                             quota_range: tuple[int, int] = (1, 3),
                             window_s: float = 10.0, headroom: float = 1.0):
    """A seeded synthetic window: stats per service, edges with quotas.

    Shapes follow a warm measurement window over a task-level workload:
    input size and complexity are task properties, so per-service means
    only jitter around shared centers; popularity is power-law skewed
    and input redundancy rises with it; repeated inputs already produced
    observed reuse costs near the lookup latency. headroom scales edge
    compute against the offered load, so capacity-constrained searches
    stay mostly feasible when it is generous.
    """
    stats: dict[int, WindowStats] = {}
    total_complexity_rate = 0.0
    total_input_rate = 0.0
    volume = rng.randint(200, 2000)
    raw = [rng.paretovariate(1.2) for _ in range(n_services)]
    weights = [r / sum(raw) for r in raw]
    input_center = rng.uniform(2.0, 6.0)
    complexity_center = rng.uniform(5.0, 15.0)
    for sid in range(n_services):
        st = WindowStats(window_s)
        st.received_count = max(1, round(volume * weights[sid]))
        # popular services repeat inputs more, so distinct grows sublinearly
        st.distinct_count = max(1, round(st.received_count ** rng.uniform(0.3, 0.7)))
        st.mean_input_size = input_center * rng.uniform(0.9, 1.1)
        st.mean_complexity = complexity_center * rng.uniform(0.9, 1.1)
        repeats = st.received_count - st.distinct_count
        if repeats > 0:
            st.mean_reuse_cost = LOOKUP_S * rng.uniform(1.0, 1.5)
            st.reuse_samples = repeats
        counts = [rng.randint(0, 30) for _ in range(n_edges)]
        if sum(counts) == 0:
            counts[rng.randrange(n_edges)] = 1
        scale = st.received_count / sum(counts)
        for eid, c in enumerate(counts):
            if c == 0:
                continue
            share = max(1, round(c * scale))
            st.origin_counts[eid] = share
            st.origin_input_sums[eid] = share * st.mean_input_size
            st.origin_complexity_sums[eid] = share * st.mean_complexity
        total_complexity_rate += st.received_count * st.mean_complexity / window_s
        total_input_rate += st.received_count * st.mean_input_size / window_s
        stats[sid] = st
    edges = [EdgeServer(i,
                        headroom * max(20.0, total_input_rate / n_edges)
                        * rng.uniform(0.8, 1.5),
                        headroom * max(50.0, total_complexity_rate / n_edges)
                        * rng.uniform(0.8, 1.5),
                        rng.randint(*quota_range))
             for i in range(n_edges)]
    services = [service_from_stats(sid, st) for sid, st in sorted(stats.items())]
    return services, edges, stats


def exchange_stability_suite(n_instances: int = 100, seed: int = 1) -> SuiteResult:
    """Matched placements admit no mutually improving service swap."""
    rng = random.Random(seed)
    result = SuiteResult("exchange-stability", n_instances)
    started = time.perf_counter()
    for case in range(n_instances):
        n_s = rng.randint(2, 8)
        n_e = rng.randint(2, 4)
        services, edges, stats = random_matching_instance(rng, n_s, n_e)
        assignment = whistle_match(services, edges, stats, lookup_s=LOOKUP_S)
        svc_prefs, edge_prefs = build_preference_lists(
            services, edges, stats, LOOKUP_S)
        theta, phi = utility_maps(svc_prefs, edge_prefs)
        stable, violations = is_exchange_stable(assignment, theta, phi)
        if not stable:
            result.failures.append(f"case {case}: swaps {violations}")
    result.info = f"{time.perf_counter() - started:.2f}s"
    return result


def _route_stream(rng: random.Random, n_services: int, n_neighbors: int,
                  n_tasks: int):
    """A local edge that hosts nothing, neighbors hosting random subsets,
    and a task stream to route across them."""
    stats: dict[int, WindowStats] = {}
    for sid in range(n_services):
        st = WindowStats(10.0)
        st.distinct_count = rng.randint(1, 20)
        st.received_count = st.distinct_count + rng.randint(0, 80)
        st.mean_input_size = rng.uniform(1.0, 8.0)
        st.mean_complexity = rng.uniform(2.0, 20.0)
        stats[sid] = st
    local = EdgeServer(0, 100.0, 300.0, 8,
                       neighbors=frozenset(range(1, n_neighbors + 1)))
    neighbors = []
    for i in range(1, n_neighbors + 1):
        hosted = {sid for sid in range(n_services) if rng.random() < 0.5}
        neighbors.append(EdgeServer(i, 100.0, 300.0, 8,
                                    redirect_bandwidth=rng.uniform(20.0, 120.0),
                                    hosted=hosted))
    budgets = {nb.id: rng.uniform(0.0, 400.0) for nb in neighbors}
    tasks = [Task(i, rng.randrange(n_services), float(i),
                  InputDescriptor((i,)), rng.uniform(1.0, 8.0),
                  rng.uniform(2.0, 20.0), origin_edge=0)
             for i in range(n_tasks)]
    return local, neighbors, stats, budgets, tasks


def routing_stability_suite(n_instances: int = 100, seed: int = 2) -> SuiteResult:
    """Sequential neighbor routing leaves no blocking service-edge pair."""
    rng = random.Random(seed)
    result = SuiteResult("routing-stability", n_instances)
    for case in range(n_instances):
        local, neighbors, stats, budgets, tasks = _route_stream(
            rng, rng.randint(2, 6), rng.randint(1, 4), rng.randint(5, 40))
        committed = {nb.id: 0.0 for nb in neighbors}
        routes = []
        for task in tasks:
            def fits(edge, _c=task.complexity):
                return committed[edge.id] + _c <= budgets[edge.id]
            route = extended_match(task, local, neighbors, stats, can_accept=fits)
            if route.target is not None:
                committed[route.target] += task.complexity
            routes.append(route)
        pair = find_blocking_pair(routes, tasks, neighbors, stats, budgets)
        if pair is not None:
            result.failures.append(f"case {case}: blocking pair {pair}")
    return result


def placement_quality_suite(n_instances: int = 50, seed: int = 3) -> SuiteResult:
    """Matched placements cost no more than random or greedy ones on at
    least 90% of small instances; distance to the exact optimum reported."""
    rng = random.Random(seed)
    cloud = CloudServer(100.0 / 6.0, 3000.0)
    result = SuiteResult("placement-quality", n_instances)
    wins = 0
    ratios = []
    for case in range(n_instances):
        n_s = rng.randint(3, BRUTE_FORCE_MAX_SERVICES)
        n_e = rng.randint(2, BRUTE_FORCE_MAX_EDGES)
        services, edges, stats = random_matching_instance(
            rng, n_s, n_e, quota_range=(6, 10), headroom=3.0)
        window = stats[0].window_length
        matched = whistle_match(services, edges, stats, lookup_s=LOOKUP_S)
        randomized = random_edge(services, edges, random.Random(rng.random()),
                                 stats, window)
        greedy = greedy_frequency(services, edges, stats, window)

        def cost(assignment):
            return placement_objective(assignment, stats, edges, cloud, LOOKUP_S)

        ours, others = cost(matched), (cost(randomized), cost(greedy))
        if ours <= min(others) + 1e-9:
            wins += 1
        best = brute_force_offload(services, edges, stats, cloud, window, LOOKUP_S)
        optimal = cost(best)
        ratios.append(ours / optimal if optimal > 0 else 1.0)
    fraction = wins / n_instances
    result.info = (f"beats random+greedy on {fraction:.0%}; "
                   f"cost/optimal mean {sum(ratios) / len(ratios):.3f}, "
                   f"max {max(ratios):.3f}")
    if fraction < 0.9:
        result.failures.append(f"only {fraction:.0%} of instances won")
    return result


def feasibility_suite(n_instances: int = 50, seed: int = 4) -> SuiteResult:
    """Every placement respects quotas; replica limits hold when set."""
    rng = random.Random(seed)
    result = SuiteResult("feasibility", n_instances)
    for case in range(n_instances):
        n_s = rng.randint(2, 10)
        n_e = rng.randint(1, 4)
        replica = rng.randint(1, n_e)
        services, edges, stats = random_matching_instance(
            rng, n_s, n_e, quota_range=(1, 4))
        window = stats[0].window_length
        placements = {
            "matched": whistle_match(services, edges, stats, replica,
                                     lookup_s=LOOKUP_S),
            "random": random_edge(services, edges,
                                  random.Random(rng.random()), stats, window),
            "greedy": greedy_frequency(services, edges, stats, window),
        }
        for name, assignment in placements.items():
            for edge in edges:
                if len(assignment.services_of(edge.id)) > edge.service_quota:
                    result.failures.append(
                        f"case {case}: {name} overfills edge {edge.id}")
            if name == "matched":
                for s in services:
                    if len(assignment.edges_of(s.id)) > replica:
                        result.failures.append(
                            f"case {case}: service {s.id} over replica limit")
    return result


def queue_law_suite(n_tasks: int = 100_000, arrival_rate: float = 5.0,
                    service_rate: float = 10.0, seed: int = 5) -> SuiteResult:
    """Measured sojourn through the event loop against 1/(mu - lambda)."""
    result = SuiteResult("queue-law", 1)
    expected = mm1_expected_sojourn(arrival_rate, service_rate)
    measured = mm1_calibration(arrival_rate, service_rate, n_tasks, seed)
    error = abs(measured - expected) / expected
    result.info = (f"measured {measured:.4f}s vs expected {expected:.4f}s "
                   f"({error:.1%} off, {n_tasks} tasks)")
    if error > 0.10:
        result.failures.append(f"relative error {error:.1%} exceeds 10%")
    return result


def run_all_suites(seed: int = 0, mm1_tasks: int = 100_000) -> list[SuiteResult]:
    return [
        exchange_stability_suite(100, seed + 1),
        routing_stability_suite(100, seed + 2),
        placement_quality_suite(50, seed + 3),
        feasibility_suite(50, seed + 4),
        queue_law_suite(mm1_tasks, seed=seed + 5),
    ]
