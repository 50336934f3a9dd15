"""Metric aggregation and report files.

A MetricsReport condenses one or more trials of the same scheme on the
same trace. Cross-trace comparisons (different trial seeds) average the
per-trial reports field by field instead of pooling raw tasks, so every
number stays a mean over identically-shaped experiments.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

from .errors import DomainError
from .simulator import LOC_CLOUD, LOC_FULL, LOC_PARTIAL, LOC_SCRATCH, SimResult

REPORT_FIELDS = ("scheme", "trials", "tasks", "completion_mean_s",
                 "completion_p90_s", "computation_mean_s", "resource_utilization",
                 "load_cloud", "load_edge_scratch", "load_edge_reuse",
                 "comm_reduction", "comp_reduction")


def nearest_rank_percentile(values, pct: float) -> float:
    """The ceil(pct/100 * n)-th smallest value; no interpolation, so any
    reimplementation lands on the exact same sample."""
    if not values:
        raise DomainError("percentile of an empty sample")
    if not 0 < pct <= 100:
        raise DomainError("pct must lie in (0, 100]")
    ordered = sorted(values)
    rank = math.ceil(pct / 100.0 * len(ordered))
    return ordered[rank - 1]


@dataclass(frozen=True)
class MetricsReport:
    scheme: str
    trials: int
    tasks: int
    completion_mean_s: float
    completion_p90_s: float
    computation_mean_s: float
    resource_utilization: float  # edge busy time over edge capacity time
    load_cloud: float
    load_edge_scratch: float
    load_edge_reuse: float
    comm_reduction: float  # vs sending everything over the cloud path
    comp_reduction: float  # vs executing everything from scratch remotely

    def __post_init__(self):
        split = self.load_cloud + self.load_edge_scratch + self.load_edge_reuse
        if self.tasks > 0 and abs(split - 1.0) > 1e-9:
            raise DomainError("load split must sum to 1")
        if self.comm_reduction > 1.0 + 1e-12 or self.comp_reduction > 1.0 + 1e-12:
            raise DomainError("a reduction cannot exceed 1")

    def as_dict(self) -> dict:
        out = {}
        for name in REPORT_FIELDS:
            value = getattr(self, name)
            out[name] = round(value, 6) if isinstance(value, float) else value
        return out


def aggregate(results: list[SimResult]) -> MetricsReport:
    """Pool per-task samples across trials of one scheme on one trace."""
    if not results:
        raise DomainError("nothing to aggregate")
    prints = {r.trace_fingerprint for r in results}
    if len(prints) > 1:
        raise DomainError("refusing to pool results from different traces")
    schemes = {r.scheme for r in results}
    if len(schemes) > 1:
        raise DomainError("refusing to pool results from different schemes")
    scheme = results[0].scheme

    completions = [t.total_s for r in results for t in r.tasks]
    computations = [t.queue_s + t.comp_s for r in results for t in r.tasks]
    n_tasks = len(completions)
    if n_tasks == 0:
        return MetricsReport(scheme, len(results), 0, 0.0, 0.0, 0.0,
                             0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    counts = {LOC_CLOUD: 0, LOC_SCRATCH: 0, LOC_FULL: 0, LOC_PARTIAL: 0}
    core_mb = 0.0
    executed = 0.0
    for r in results:
        for name, c in r.location_counts().items():
            counts[name] += c
        core_mb += sum(t.core_mb for t in r.tasks)
        executed += sum(t.executed_units for t in r.tasks)

    baseline_mb = sum(r.total_input_mb for r in results)
    baseline_units = sum(r.total_complexity for r in results)
    comm_reduction = 1.0 - core_mb / baseline_mb if baseline_mb > 0 else 0.0
    comp_reduction = 1.0 - executed / baseline_units if baseline_units > 0 else 0.0

    edge_busy = sum(busy for r in results
                    for label, busy in r.busy_s.items() if label != "cloud")
    edge_capacity = sum(r.horizon_s * r.config.n_edges for r in results)
    utilization = edge_busy / edge_capacity if edge_capacity > 0 else 0.0

    return MetricsReport(
        scheme, len(results), n_tasks,
        sum(completions) / n_tasks,
        nearest_rank_percentile(completions, 90),
        sum(computations) / n_tasks,
        utilization,
        counts[LOC_CLOUD] / n_tasks,
        counts[LOC_SCRATCH] / n_tasks,
        (counts[LOC_FULL] + counts[LOC_PARTIAL]) / n_tasks,
        comm_reduction, comp_reduction)


def average_reports(reports: list[MetricsReport]) -> MetricsReport:
    """Field-wise mean over per-trial reports (one per trace seed)."""
    if not reports:
        raise DomainError("nothing to average")
    if len({r.scheme for r in reports}) > 1:
        raise DomainError("refusing to average across schemes")
    n = len(reports)
    values = {}
    for f in fields(MetricsReport):
        if f.name == "scheme":
            values[f.name] = reports[0].scheme
        elif f.name in ("trials", "tasks"):
            values[f.name] = sum(getattr(r, f.name) for r in reports)
        else:
            values[f.name] = sum(getattr(r, f.name) for r in reports) / n
    return MetricsReport(**values)


def write_report(report: MetricsReport, fmt: str, path) -> None:
    """Single-report file; fixed field order, floats at 6 decimals."""
    data = report.as_dict()
    if fmt == "json":
        with open(path, "w") as fh:
            json.dump(data, fh, indent=2, sort_keys=False)
            fh.write("\n")
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            fh.write(",".join(REPORT_FIELDS) + "\n")
            fh.write(",".join(_cell(data[name]) for name in REPORT_FIELDS) + "\n")
    else:
        raise DomainError(f"unknown report format {fmt!r}")


def write_comparison(reports: list[MetricsReport], path) -> None:
    """One CSV row per scheme, same columns as write_report."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(REPORT_FIELDS) + "\n")
        for report in reports:
            data = report.as_dict()
            fh.write(",".join(_cell(data[name]) for name in REPORT_FIELDS) + "\n")


def _cell(value) -> str:
    return f"{value:.6f}" if isinstance(value, float) else str(value)


def read_report(path) -> dict:
    """Read back either format into the as_dict shape."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return json.loads(text)
    header, row = text.strip().split("\n")
    out = {}
    for name, cell in zip(header.split(","), row.split(",")):
        if name in ("scheme",):
            out[name] = cell
        elif name in ("trials", "tasks"):
            out[name] = int(cell)
        else:
            out[name] = float(cell)
    return out
