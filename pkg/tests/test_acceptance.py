"""Release gates: one test per criterion, one PASS/FAIL line per test.

The lines are echoed in a terminal section after the run (see conftest);
every test also asserts, so a FAIL line always comes with a red test.
"""

import filecmp
import json
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest

from computeless.cli import main as cli_main
from computeless.costs import (RoutingDecision, completion_cost,
                               objective_value, reuse_execution_cost)
from computeless.matching import edge_utility, neighbor_utility, service_utility
from computeless.model import (CloudServer, EdgeServer, InputDescriptor,
                               Service, compute_granularity,
                               compute_punishment, compute_reusability)
from computeless.report import aggregate
from computeless.reuse import LookupKind, LookupOutcome, ReuseTable
from computeless.simulator import (TrialConfig, mm1_calibration,
                                   mm1_expected_sojourn, run_trial)
from computeless.trace import (PROFILE_FREQUENCIES, SynthParams,
                               profile_weights, synth_trace)
from computeless.validation import (exchange_stability_suite,
                                    placement_quality_suite,
                                    routing_stability_suite)
from tests.conftest import make_stats, make_task
from tests.naive_lfu import NaiveLfu


def record(log, n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    log.append(line)
    assert ok, line


# -- shared heavyweight runs ------------------------------------------------

@pytest.fixture(scope="module")
def dense_trace():
    params = SynthParams(n_tasks=10_000, arrival_rate=20.0,
                         input_redundancy=0.8)
    return synth_trace(params, seed=0)


def dense_config(scheme, trace):
    return TrialConfig(scheme=scheme, seed=0, n_edges=1, service_quota=8,
                       window_s=trace[-1].arrival_time / 20)


@pytest.fixture(scope="module")
def dense_whistle(dense_trace):
    started = time.perf_counter()
    result = run_trial(dense_config("whistle", dense_trace), dense_trace)
    return result, time.perf_counter() - started


@pytest.fixture(scope="module")
def dense_cloud(dense_trace):
    return run_trial(dense_config("cloud", dense_trace), dense_trace)


@pytest.fixture(scope="module")
def dense_no_reuse(dense_trace):
    return run_trial(dense_config("matching-no-reuse", dense_trace),
                     dense_trace)


# -- criteria ---------------------------------------------------------------

def test_criterion_01_matching_is_exchange_stable(acceptance_log):
    started = time.perf_counter()
    suite = exchange_stability_suite(100, seed=1)
    elapsed = time.perf_counter() - started
    ok = suite.passed and elapsed < 5.0
    record(acceptance_log, 1, ok, f"100/100 instances stable in {elapsed:.2f}s"
           if suite.passed else f"unstable: {suite.failures[:2]}")


def test_criterion_02_routing_admits_no_blocking_pair(acceptance_log):
    suite = routing_stability_suite(100, seed=2)
    record(acceptance_log, 2, suite.passed,
           "100/100 routed streams free of blocking pairs"
           if suite.passed else f"blocked: {suite.failures[:2]}")


def test_criterion_03_matching_beats_simple_placements(acceptance_log):
    suite = placement_quality_suite(50, seed=3)
    record(acceptance_log, 3, suite.passed, suite.info if suite.passed
           else f"{suite.info}; {suite.failures[:1]}")


def test_criterion_04_reuse_cuts_computation_and_traffic(dense_whistle, acceptance_log):
    result, elapsed = dense_whistle
    report = aggregate([result])
    ok = (report.comp_reduction >= 0.70 and report.comm_reduction >= 0.60
          and elapsed < 30.0)
    record(acceptance_log, 4, ok, f"comp_reduction {report.comp_reduction:.3f} (>=0.70), "
                  f"comm_reduction {report.comm_reduction:.3f} (>=0.60), "
                  f"10k tasks in {elapsed:.1f}s (<30s)")


def test_criterion_05_completion_time_ordering(dense_whistle, dense_cloud,
                                               dense_no_reuse, acceptance_log):
    whistle, _ = dense_whistle

    def mean(result):
        return sum(r.total_s for r in result.tasks) / len(result.tasks)

    m_whistle, m_no_reuse, m_cloud = (mean(whistle), mean(dense_no_reuse),
                                      mean(dense_cloud))
    margin = (m_no_reuse - m_whistle) / m_no_reuse
    ok = m_whistle < m_no_reuse < m_cloud and margin >= 0.15
    record(acceptance_log, 5, ok, f"mean completion {m_whistle:.4f}s < {m_no_reuse:.4f}s "
                  f"< {m_cloud:.4f}s; reuse saves {margin:.1%} (>=15%)")


def test_criterion_06_neighbor_offloading_helps_split_catalogs(acceptance_log):
    params = SynthParams(n_tasks=4000, arrival_rate=20.0, n_services=10,
                         popularity="uniform", input_redundancy=0.8)
    trace = synth_trace(params, seed=0)
    base = dict(seed=0, n_edges=2, service_quota=7, replica_quota=1,
                origin_weights=(1.0, 0.0), window_s=trace[-1].arrival_time / 10)
    extended = run_trial(TrialConfig(scheme="extended-whistle", **base), trace)
    plain = run_trial(TrialConfig(scheme="whistle", **base), trace)

    split_windows = 0
    for w in extended.windows:
        on_a = sum(1 for _, e in w.placements if e == 0)
        on_b = sum(1 for _, e in w.placements if e == 1)
        if on_a == 7 and on_b == 3:
            split_windows += 1
    redirects = sum(1 for r in extended.tasks if r.redirected)

    def mean(result):
        return sum(r.total_s for r in result.tasks) / len(result.tasks)

    m_ext, m_plain = mean(extended), mean(plain)
    gain = (m_plain - m_ext) / m_plain
    ok = split_windows > 0 and redirects > 0 and gain >= 0.10
    record(acceptance_log, 6, ok, f"30% of services only on the neighbor in {split_windows} "
                  f"windows, {redirects} redirects; mean completion "
                  f"{m_ext:.4f}s vs {m_plain:.4f}s, {gain:.1%} lower (>=10%)")


def test_criterion_07_queue_matches_mm1_law(acceptance_log):
    expected = mm1_expected_sojourn(5.0, 10.0)
    measured = mm1_calibration(5.0, 10.0, 100_000, seed=0)
    error = abs(measured - expected) / expected
    record(acceptance_log, 7, error <= 0.10,
           f"measured sojourn {measured:.4f}s vs 1/(mu-lambda)={expected:.1f}s "
           f"over 100k tasks ({error:.2%} off, <=10%)")


def test_criterion_08_cache_agrees_with_reference(acceptance_log):
    rng = random.Random(8)
    table, naive = ReuseTable(24), NaiveLfu(24)
    ops = 0
    mismatches = 0
    while ops < 10_000:
        service = rng.randrange(3)
        d = InputDescriptor(tuple(rng.randrange(8) for _ in range(3)))
        expected = naive.lookup(service, d)
        got = table.lookup(service, d, 10.0).kind.value
        ops += 1
        if got != expected:
            mismatches += 1
        if expected != "full":
            evicted = table.insert(service, d)
            expected_evicted = naive.insert(service, d)
            ops += 1
            got_evicted = (None if evicted is None
                           else (evicted.service, evicted.key.items))
            if got_evicted != expected_evicted:
                mismatches += 1
        keys = {(e.service, e.key.items) for e in table.entries()}
        if keys != set(naive.entries):
            mismatches += 1
    record(acceptance_log, 8, mismatches == 0,
           f"{ops} cache ops, {ops - mismatches}/{ops} agree with the "
           f"dict-scan reference")


def test_criterion_09_comparison_runs_are_byte_identical(tmp_path, acceptance_log):
    scenario = tmp_path / "scenario.yaml"
    scenario.write_text(
        "schemes: [cloud, whistle]\n"
        "trials: 1\n"
        "trace: {n_tasks: 1500, arrival_rate: 20.0, n_services: 6, "
        "input_redundancy: 0.6}\n"
        "sim: {n_edges: 2, window_s: 7.5}\n")
    dirs = (tmp_path / "first", tmp_path / "second")
    for outdir in dirs:
        assert cli_main(["compare", "--config", str(scenario),
                         "--out", str(outdir)]) == 0
    names = sorted(p.name for p in dirs[0].iterdir())
    same_names = names == sorted(p.name for p in dirs[1].iterdir())
    diffs = [n for n in names
             if not filecmp.cmp(dirs[0] / n, dirs[1] / n, shallow=False)]
    figures = sum(n.endswith(".png") for n in names)
    record(acceptance_log, 9, same_names and not diffs,
           f"two runs produced {len(names)} byte-identical files "
           f"({figures} figures)" if not diffs else f"differ: {diffs}")


def test_criterion_10_closed_form_values_match_derivation(acceptance_log):
    problems = []

    if abs(compute_granularity(100, 10) - 0.9999546) > 1e-6:
        problems.append("granularity(100,10)")
    if abs(compute_reusability(0.7310586) - 0.7971) > 1e-3:
        problems.append("reusability(0.7310586)")

    cloud = CloudServer(10.0, 1000.0)
    edge = EdgeServer(0, 50.0, 50.0, 4)
    t = make_task(size=100.0, complexity=100.0)
    full_hit = LookupOutcome(LookupKind.FULL, 1.0, 0.0)
    routes = [RoutingDecision.cloud(t), RoutingDecision.edge(0, t),
              RoutingDecision.edge_reuse(0, full_hit)]
    for route, want in zip(routes, (10.1, 4.0, 2.01)):
        got = completion_cost(t, route, [edge], cloud, 0.01).total
        if abs(got - want) > 1e-9:
            problems.append(f"completion {want}")
    tasks = [make_task(i, size=100.0, complexity=100.0) for i in range(3)]
    if abs(objective_value(tasks, routes, [edge], cloud, 0.01) - 16.11) > 1e-9:
        problems.append("objective 16.11")

    # recompute everything with the independent high-precision script
    script = Path(__file__).resolve().parents[1] / "tools" / "derive_expected_values.py"
    run = subprocess.run([sys.executable, str(script)], capture_output=True,
                         text=True, check=True)
    derived = {k: float(v) for k, v in json.loads(run.stdout).items()}

    partial = RoutingDecision.edge_reuse(
        0, LookupOutcome(LookupKind.PARTIAL, 0.5, 40.0))
    library = {
        "granularity_100_10": compute_granularity(100, 10),
        "granularity_equal": compute_granularity(1, 1),
        "reusability_of_0.7310586": compute_reusability(0.7310586),
        "reusability_of_0.5": compute_reusability(0.5),
        "punishment_evicted_0.7971": compute_punishment(0.7971, True),
        "punishment_kept_0.7971": compute_punishment(0.7971, False),
        "service_utility_evicted": service_utility(
            Service(0, 0.9, 0.7971, evicted=True),
            EdgeServer(0, 2.0, 100.0, 2), make_stats(mean_input=4.0)),
        "service_utility_kept": service_utility(
            Service(0, 0.9, 0.7971), EdgeServer(0, 2.0, 100.0, 2),
            make_stats(mean_input=4.0)),
        "edge_utility_example": edge_utility(
            EdgeServer(0, 10.0, 10.0, 2), Service(0, 0.9, 0.8),
            make_stats(mean_input=4.0, mean_complexity=20.0,
                       reuse_cost=0.81, reuse_samples=5),
            gain=1.2, lookup_s=0.0005),
        "neighbor_utility_example": neighbor_utility(
            0.7971, EdgeServer(1, 100.0, 100.0, 4, redirect_bandwidth=4.0),
            make_stats(mean_input=4.0)),
        "completion_cloud": completion_cost(
            t, routes[0], [edge], cloud, 0.01).total,
        "completion_edge_scratch": completion_cost(
            t, routes[1], [edge], cloud, 0.01).total,
        "completion_edge_full_reuse": completion_cost(
            t, routes[2], [edge], cloud, 0.01).total,
        "objective_three_tasks": objective_value(
            tasks, routes, [edge], cloud, 0.01),
        "reuse_exec_partial": reuse_execution_cost(partial, 0.01, 50.0),
        "profile_total": float(sum(PROFILE_FREQUENCIES)),
        "profile_top_weight": profile_weights()[-1],
        "mm1_sojourn_5_10": mm1_expected_sojourn(5.0, 10.0),
    }
    missing = sorted(set(derived) - set(library))
    if missing:
        problems.append(f"unchecked derived values {missing}")
    for name, value in library.items():
        if derived[name] != pytest.approx(value, rel=1e-12, abs=1e-15):
            problems.append(f"{name}: {value!r} vs derived {derived[name]!r}")

    record(acceptance_log, 10, not problems,
           f"{len(library)} closed-form values match the independent "
           f"50-digit derivation" if not problems else f"mismatch: {problems}")
