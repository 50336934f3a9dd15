import pytest
from hypothesis import given, strategies as st

from computeless.costs import (RoutingDecision, brute_force_offload,
                               check_feasibility, communication_cost,
                               completion_cost, computation_cost,
                               objective_value, placement_objective,
                               reuse_execution_cost)
from computeless.errors import ContractError, DomainError
from computeless.matching import Acceptance, Assignment
from computeless.model import CloudServer, EdgeServer
from computeless.reuse import LookupKind, LookupOutcome
from tests.conftest import make_instance, make_task

CLOUD = CloudServer(10.0, 1000.0)
EDGE = EdgeServer(0, 50.0, 50.0, 4)

FULL_HIT = LookupOutcome(LookupKind.FULL, 1.0, 0.0)


def partial_hit(residual, overlap=0.5):
    return LookupOutcome(LookupKind.PARTIAL, overlap, residual)


def test_communication_cost_branches():
    t = make_task(size=100.0)
    assert communication_cost(t, RoutingDecision.edge(0, t), 50.0, 10.0) == 2.0
    assert communication_cost(t, RoutingDecision.cloud(t), 50.0, 10.0) == 10.0
    zero = make_task(size=0.0)
    assert communication_cost(zero, RoutingDecision.cloud(zero), 50.0, 10.0) == 0.0


def test_communication_cost_rejects_bad_bandwidth():
    t = make_task()
    with pytest.raises(DomainError):
        communication_cost(t, RoutingDecision.edge(0, t), 0.0, 10.0)
    with pytest.raises(DomainError):
        communication_cost(t, RoutingDecision.cloud(t), 50.0, -1.0)


def test_computation_cost_branches():
    t = make_task(complexity=100.0)
    assert computation_cost(t, RoutingDecision.edge(0, t), 50.0, 1000.0) == 2.0
    assert computation_cost(t, RoutingDecision.cloud(t), 50.0, 1000.0) \
        == pytest.approx(0.1)


def test_computation_cost_refuses_reuse_decision():
    d = RoutingDecision.edge_reuse(0, FULL_HIT)
    with pytest.raises(ContractError):
        computation_cost(make_task(), d, 50.0, 1000.0)


def test_reuse_execution_cost():
    full = RoutingDecision.edge_reuse(0, FULL_HIT)
    assert reuse_execution_cost(full, 0.01, 50.0) == pytest.approx(0.01)
    partial = RoutingDecision.edge_reuse(0, partial_hit(40.0))
    assert reuse_execution_cost(partial, 0.01, 50.0) == pytest.approx(0.81)
    degenerate = RoutingDecision(0, reuse_applied=True, residual_complexity=0.0)
    assert reuse_execution_cost(degenerate, 0.01, 50.0) == pytest.approx(0.01)
    t = make_task()
    with pytest.raises(ContractError):
        reuse_execution_cost(RoutingDecision.cloud(t), 0.01, 50.0)


def test_routing_decision_invariants():
    with pytest.raises(ContractError):
        RoutingDecision(None, reuse_applied=True)  # reuse without an edge
    with pytest.raises(ContractError):
        RoutingDecision(0, reuse_applied=False, full_reuse=True)
    with pytest.raises(ContractError):
        RoutingDecision(0, reuse_applied=True, full_reuse=True,
                        residual_complexity=3.0)
    with pytest.raises(ContractError):
        RoutingDecision.edge_reuse(0, LookupOutcome(LookupKind.MISS, 0.0, 5.0))


def test_completion_cost_examples_exact():
    edges = [EDGE]
    t = make_task(size=100.0, complexity=100.0)
    cloud_route = completion_cost(t, RoutingDecision.cloud(t), edges, CLOUD, 0.01)
    assert cloud_route.total == pytest.approx(10.1, abs=1e-9)
    scratch = completion_cost(t, RoutingDecision.edge(0, t), edges, CLOUD, 0.01)
    assert scratch.total == pytest.approx(4.0, abs=1e-9)
    full = completion_cost(t, RoutingDecision.edge_reuse(0, FULL_HIT),
                           edges, CLOUD, 0.01)
    assert full.total == pytest.approx(2.01, abs=1e-9)


def test_completion_cost_includes_queueing():
    t = make_task(size=100.0, complexity=100.0)
    b = completion_cost(t, RoutingDecision.cloud(t), [EDGE], CLOUD, 0.01,
                        queueing_delay=0.4)
    assert b.queueing == 0.4
    assert b.total == pytest.approx(10.5, abs=1e-9)


@given(st.floats(min_value=0.1, max_value=500),
       st.floats(min_value=0.1, max_value=500),
       st.floats(min_value=0.0, max_value=10),
       st.sampled_from(["cloud", "edge", "full", "partial"]))
def test_completion_decomposition(size, complexity, queue, kind):
    t = make_task(size=size, complexity=complexity)
    if kind == "cloud":
        d = RoutingDecision.cloud(t)
    elif kind == "edge":
        d = RoutingDecision.edge(0, t)
    elif kind == "full":
        d = RoutingDecision.edge_reuse(0, FULL_HIT)
    else:
        d = RoutingDecision.edge_reuse(0, partial_hit(complexity / 3))
    b = completion_cost(t, d, [EDGE], CLOUD, 0.01, queueing_delay=queue)
    assert b.total == pytest.approx(b.communication + b.computation + b.queueing)
    assert min(b.communication, b.computation, b.queueing, b.total) >= 0


def test_objective_value_batch():
    tasks = [make_task(i, size=100.0, complexity=100.0) for i in range(3)]
    decisions = [RoutingDecision.cloud(tasks[0]),
                 RoutingDecision.edge(0, tasks[1]),
                 RoutingDecision.edge_reuse(0, FULL_HIT)]
    assert objective_value(tasks, decisions, [EDGE], CLOUD, 0.01) \
        == pytest.approx(16.11, abs=1e-9)
    assert objective_value([], [], [EDGE], CLOUD, 0.01) == 0.0
    with pytest.raises(ContractError):
        objective_value(tasks, decisions[:2], [EDGE], CLOUD, 0.01)


def test_all_edge_full_reuse_beats_all_cloud():
    tasks = [make_task(i, size=100.0, complexity=100.0) for i in range(4)]
    cloud = objective_value(tasks, [RoutingDecision.cloud(t) for t in tasks],
                            [EDGE], CLOUD, 0.01)
    edge = objective_value(tasks,
                           [RoutingDecision.edge_reuse(0, FULL_HIT)] * 4,
                           [EDGE], CLOUD, 0.01)
    assert edge < cloud


def test_check_feasibility_capacity_violation():
    edge = EdgeServer(0, 1000.0, 10.0, 4)  # compute budget 10 * 10 = 100
    assignment = Assignment([Acceptance(0, 0, None, None, None)])
    tasks = [make_task(0, service=0, complexity=60.0, origin=0),
             make_task(1, service=0, complexity=60.0, origin=0)]
    violations = check_feasibility(assignment, tasks, [edge], window_length=10.0)
    assert len(violations) == 1
    assert "compute" in violations[0].kind


def test_check_feasibility_bandwidth_violation():
    edge = EdgeServer(0, 1.0, 1000.0, 4)  # bandwidth budget 1 * 10 = 10 Mb
    assignment = Assignment([Acceptance(0, 0, None, None, None)])
    tasks = [make_task(0, service=0, size=8.0, origin=0),
             make_task(1, service=0, size=8.0, origin=0)]
    violations = check_feasibility(assignment, tasks, [edge], window_length=10.0)
    assert any("bandwidth" in v.kind for v in violations)


def test_check_feasibility_empty_assignment():
    tasks = [make_task(0, origin=0)]
    assert check_feasibility(Assignment(), tasks, [EDGE], 10.0) == []


def test_brute_force_places_larger_saver():
    # quota 1 forces a choice; service 1 moves more input and compute
    services, edges, stats = make_instance(
        {0: dict(received=5, distinct=5, mean_input=1.0, mean_complexity=2.0),
         1: dict(received=5, distinct=5, mean_input=8.0, mean_complexity=20.0)},
        [(50.0, 100.0, 1)])
    best = brute_force_offload(services, edges, stats, CLOUD, 10.0, 0.01)
    assert best.pairs == {(1, 0)}


def test_brute_force_empty_and_guard():
    assert brute_force_offload([], [EDGE], {}, CLOUD, 10.0, 0.01).pairs == frozenset()
    services, edges, stats = make_instance(
        {i: dict(received=2, distinct=2) for i in range(13)}, [(50.0, 100.0, 2)])
    with pytest.raises(DomainError):
        brute_force_offload(services, edges, stats, CLOUD, 10.0, 0.01)


def test_brute_force_result_is_feasible():
    services, edges, stats = make_instance(
        {i: dict(received=4, distinct=2, origins={0: 2, 1: 2}) for i in range(4)},
        [(100.0, 500.0, 2), (100.0, 500.0, 2)])
    best = brute_force_offload(services, edges, stats, CLOUD, 10.0, 0.01)
    tasks = []
    tid = 0
    for sid, st_ in stats.items():
        for eid, count in st_.origin_counts.items():
            for _ in range(count):
                tasks.append(make_task(tid, service=sid, origin=eid))
                tid += 1
    assert check_feasibility(best, tasks, edges, 10.0) == []


def test_placement_objective_empty_assignment_is_cloud_cost():
    services, edges, stats = make_instance(
        {0: dict(received=10, distinct=5, mean_input=4.0, mean_complexity=10.0)},
        [(50.0, 100.0, 2)])
    got = placement_objective(Assignment(), stats, edges, CLOUD, 0.01)
    expected = 10 * (4.0 / CLOUD.bandwidth + 10.0 / CLOUD.compute)
    assert got == pytest.approx(expected)


def test_placement_objective_hosting_mixes_reuse():
    services, edges, stats = make_instance(
        {0: dict(received=10, distinct=5, mean_input=4.0, mean_complexity=10.0)},
        [(50.0, 100.0, 2)])
    hosted = placement_objective(Assignment([Acceptance(0, 0, None, None, None)]),
                                 stats, edges, CLOUD, 0.01)
    # per task: comm 4/50, then half the tasks full-reuse at lookup cost
    # and half run from scratch (lookup is charged only on reuse)
    expected = 10 * (0.08 + 0.5 * 0.01 + 0.5 * 0.10)
    assert hosted == pytest.approx(expected)
