"""Shared builders for hand-sized fixtures."""

import pytest

from computeless.model import (EdgeServer, InputDescriptor, Service, Task,
                               WindowStats, service_from_stats)

# one PASS/FAIL line per acceptance check, echoed after the run so they
# stay visible even though pytest captures stdout
_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_task(tid=0, service=0, arrival=0.0, items=(1, 2, 3, 4), size=4.0,
              complexity=10.0, output=0.5, origin=None):
    return Task(tid, service, arrival, InputDescriptor(tuple(items)), size,
                complexity, output, origin)


def make_stats(window=10.0, received=10, distinct=5, mean_input=4.0,
               mean_complexity=10.0, origins=None, reuse_cost=None,
               reuse_samples=0):
    st = WindowStats(window)
    st.received_count = received
    st.distinct_count = distinct
    st.mean_input_size = mean_input
    st.mean_complexity = mean_complexity
    if reuse_cost is not None:
        st.mean_reuse_cost = reuse_cost
        st.reuse_samples = reuse_samples or 1
    for eid, count in (origins or {0: received}).items():
        st.origin_counts[eid] = count
        st.origin_input_sums[eid] = count * mean_input
        st.origin_complexity_sums[eid] = count * mean_complexity
    return st


def make_instance(per_service, edges_spec, window=10.0):
    """per_service: {sid: stats kwargs}; edges_spec: [(bw, compute, quota)]."""
    stats = {sid: make_stats(window, **kw) for sid, kw in per_service.items()}
    services = [service_from_stats(sid, st) for sid, st in sorted(stats.items())]
    edges = [EdgeServer(i, bw, f, q) for i, (bw, f, q) in enumerate(edges_spec)]
    return services, edges, stats


@pytest.fixture
def task():
    return make_task()
