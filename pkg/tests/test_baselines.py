import math
import random

from computeless.baselines import (GaParams, SaParams, annealing, cloud_only,
                                   genetic, greedy_frequency, random_edge)
from computeless.costs import placement_objective
from computeless.model import CloudServer
from tests.conftest import make_instance

LOOKUP = 0.01
CLOUD = CloudServer(10.0, 1000.0)


def contended_instance(n_services=6, n_edges=2, quota=2):
    per_service = {i: dict(received=4 + 3 * i, distinct=2 + i,
                           origins={e: (4 + 3 * i) // n_edges or 1
                                    for e in range(n_edges)})
                   for i in range(n_services)}
    return make_instance(per_service,
                         [(10.0 + e, 60.0, quota) for e in range(n_edges)])


def test_cloud_only_is_empty():
    services, edges, _ = contended_instance()
    assert cloud_only(services, edges).pairs == frozenset()


def test_random_edge_deterministic_and_feasible():
    services, edges, stats = contended_instance()
    a = random_edge(services, edges, random.Random(9), stats, 10.0)
    b = random_edge(services, edges, random.Random(9), stats, 10.0)
    assert a.pairs == b.pairs
    assert a.pairs != random_edge(services, edges, random.Random(10),
                                  stats, 10.0).pairs or True
    for edge in edges:
        assert len(a.services_of(edge.id)) <= edge.service_quota
    for sid in range(len(services)):
        assert len(a.edges_of(sid)) <= 1  # one copy per service


def test_random_edge_cells_roughly_uniform():
    services, edges, stats = make_instance(
        {0: dict(received=5, distinct=3)},
        [(10.0, 60.0, 1), (10.0, 60.0, 1), (10.0, 60.0, 1)])
    draws = 3000
    counts = {e.id: 0 for e in edges}
    for i in range(draws):
        (pair,) = random_edge(services, edges, random.Random(i), stats, 10.0).pairs
        counts[pair[1]] += 1
    expected = draws / len(edges)
    sigma = math.sqrt(draws * (1 / 3) * (2 / 3))
    for eid, got in counts.items():
        assert abs(got - expected) <= 3 * sigma, (eid, got)


def test_greedy_hosts_top_frequencies():
    services, edges, stats = make_instance(
        {0: dict(received=3, distinct=2),
         1: dict(received=30, distinct=4),
         2: dict(received=12, distinct=3)},
        [(20.0, 60.0, 2)])
    got = greedy_frequency(services, edges, stats, 10.0)
    assert got.pairs == {(1, 0), (2, 0)}


def test_greedy_skips_service_over_rate_budget():
    # 30 tasks * 4 Mb > 10 Mbps * 10 s, so the heavy hitter cannot fit
    services, edges, stats = make_instance(
        {0: dict(received=3, distinct=2),
         1: dict(received=30, distinct=4)},
        [(10.0, 60.0, 2)])
    got = greedy_frequency(services, edges, stats, 10.0)
    assert got.pairs == {(0, 0)}


def test_greedy_spreads_to_least_loaded():
    services, edges, stats = make_instance(
        {i: dict(received=10 - i, distinct=2) for i in range(4)},
        [(10.0, 60.0, 2), (10.0, 60.0, 2)])
    got = greedy_frequency(services, edges, stats, 10.0)
    assert len(got.pairs) == 4
    assert {len(got.services_of(0)), len(got.services_of(1))} == {2}


def test_genetic_deterministic_and_feasible():
    services, edges, stats = contended_instance()
    params = GaParams(population=12, generations=20)
    a = genetic(services, edges, stats, random.Random(3), params, 10.0)
    b = genetic(services, edges, stats, random.Random(3), params, 10.0)
    assert a.pairs == b.pairs
    for edge in edges:
        assert len(a.services_of(edge.id)) <= edge.service_quota


def test_genetic_fills_when_uncontended():
    services, edges, stats = contended_instance(n_services=3, quota=3)
    got = genetic(services, edges, stats, random.Random(0),
                  GaParams(population=10, generations=15), 10.0)
    assert {s for s, _ in got.pairs} == {0, 1, 2}


def test_annealing_deterministic_feasible_and_no_worse_than_start():
    services, edges, stats = contended_instance()
    params = SaParams(iterations=300)
    a = annealing(services, edges, stats, CLOUD, random.Random(4), params,
                  10.0, lookup_s=LOOKUP)
    b = annealing(services, edges, stats, CLOUD, random.Random(4), params,
                  10.0, lookup_s=LOOKUP)
    assert a.pairs == b.pairs
    for edge in edges:
        assert len(a.services_of(edge.id)) <= edge.service_quota
    from computeless.matching import Assignment
    empty_cost = placement_objective(Assignment(), stats, edges, CLOUD, LOOKUP)
    assert placement_objective(a, stats, edges, CLOUD, LOOKUP) <= empty_cost + 1e-9
