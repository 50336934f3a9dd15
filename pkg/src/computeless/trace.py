"""Task traces: the CSV schema, synthetic generation, popularity profiles.

Trace files are plain CSV (gzip accepted by extension) with a mandatory
header and arrivals sorted ascending:

    task_id,service_id,arrival_time_s,input_digest_items,input_size_mb,complexity_units,output_size_mb

input_digest_items holds the semicolon-joined hex digests of the input's
items. Repeated descriptors are how redundancy enters the system, so the
generator re-draws previously used inputs frequency-weighted: services
with heavy repetition look exactly like the measured workloads that
motivate reuse.
"""

from __future__ import annotations

import gzip
import hashlib
import math
import random
from dataclasses import dataclass

from .errors import DomainError, TraceError
from .model import InputDescriptor, Task

COLUMNS = ("task_id", "service_id", "arrival_time_s", "input_digest_items",
           "input_size_mb", "complexity_units", "output_size_mb")

# measured invocation counts of a 12-service production workload, rarest first
PROFILE_FREQUENCIES = (12, 488, 5519, 6543, 8889, 28777, 35061, 53933,
                       322929, 399489, 1226388, 12207702)


def profile_weights(n_services: int = len(PROFILE_FREQUENCIES)) -> tuple[float, ...]:
    """Popularity weights from the measured profile (rarest service first)."""
    if not 1 <= n_services <= len(PROFILE_FREQUENCIES):
        raise DomainError(f"profile covers 1..{len(PROFILE_FREQUENCIES)} services")
    freqs = PROFILE_FREQUENCIES[-n_services:]
    total = sum(freqs)
    return tuple(f / total for f in freqs)


def zipf_weights(n_services: int, exponent: float = 1.0) -> tuple[float, ...]:
    """Zipf popularity, least popular first to mirror the measured profile."""
    if n_services < 1:
        raise DomainError("n_services must be >= 1")
    if exponent < 0:
        raise DomainError("exponent must be >= 0")
    raw = [1.0 / (rank ** exponent) for rank in range(n_services, 0, -1)]
    total = sum(raw)
    return tuple(w / total for w in raw)


@dataclass(frozen=True)
class SynthParams:
    n_tasks: int = 5000
    arrival_rate: float = 20.0  # tasks/s, Poisson
    n_services: int = 12
    popularity: tuple[float, ...] | str = "profile"  # or "uniform", "zipf"
    zipf_exponent: float = 1.0
    input_redundancy: float = 0.5  # chance a task repeats a previous input
    items_per_input: int = 4
    mean_input_mb: float = 4.0
    input_sigma: float = 0.25  # log-normal shape
    mean_complexity: float = 10.0
    complexity_sigma: float = 0.25
    mean_output_mb: float = 0.5

    def weights(self) -> tuple[float, ...]:
        if isinstance(self.popularity, tuple):
            return self.popularity
        if self.popularity == "profile":
            return profile_weights(self.n_services)
        if self.popularity == "uniform":
            return tuple(1.0 / self.n_services for _ in range(self.n_services))
        if self.popularity == "zipf":
            return zipf_weights(self.n_services, self.zipf_exponent)
        raise DomainError(f"unknown popularity {self.popularity!r}")

    def validate(self) -> None:
        if self.n_tasks < 1:
            raise DomainError("n_tasks must be >= 1")
        if self.arrival_rate <= 0:
            raise DomainError("arrival_rate must be > 0")
        if self.n_services < 1:
            raise DomainError("n_services must be >= 1")
        if not 0.0 <= self.input_redundancy <= 1.0:
            raise DomainError("input_redundancy must lie in [0, 1]")
        if self.items_per_input < 1:
            raise DomainError("items_per_input must be >= 1")
        if min(self.mean_input_mb, self.mean_complexity) <= 0:
            raise DomainError("mean input size and complexity must be > 0")
        if self.mean_output_mb < 0:
            raise DomainError("mean_output_mb must be >= 0")
        w = self.weights()
        if len(w) != self.n_services:
            raise DomainError("popularity weights must cover every service")
        if any(x < 0 for x in w) or not math.isclose(sum(w), 1.0, rel_tol=1e-9):
            raise DomainError("popularity weights must be non-negative and sum to 1")


def _lognormal(rng: random.Random, mean: float, sigma: float) -> float:
    if mean <= 0:
        return 0.0
    mu = math.log(mean) - 0.5 * sigma * sigma  # keeps the arithmetic mean
    return rng.lognormvariate(mu, sigma)


def synth_trace(params: SynthParams, seed: int) -> list[Task]:
    """Generate a sorted synthetic trace.

    With probability input_redundancy a task re-draws the input of a
    uniformly chosen earlier task of the same service (i.e. previously
    used descriptors weighted by how often they occurred); repeated
    inputs keep their original size, complexity and output size.
    """
    params.validate()
    rng = random.Random(seed)
    weights = params.weights()
    services = list(range(params.n_services))
    history: dict[int, list[tuple[InputDescriptor, float, float, float]]] = {
        sid: [] for sid in services}
    tasks: list[Task] = []
    clock = 0.0
    for tid in range(params.n_tasks):
        clock += rng.expovariate(params.arrival_rate)
        sid = rng.choices(services, weights=weights)[0]
        prior = history[sid]
        if prior and rng.random() < params.input_redundancy:
            descriptor, size, complexity, output = prior[rng.randrange(len(prior))]
        else:
            descriptor = InputDescriptor(tuple(rng.getrandbits(64)
                                               for _ in range(params.items_per_input)))
            size = _lognormal(rng, params.mean_input_mb, params.input_sigma)
            complexity = _lognormal(rng, params.mean_complexity, params.complexity_sigma)
            output = _lognormal(rng, params.mean_output_mb, params.input_sigma)
        prior.append((descriptor, size, complexity, output))
        tasks.append(Task(tid, sid, clock, descriptor, size, complexity, output))
    return tasks


def fingerprint(tasks) -> str:
    """Digest identifying the workload, so results from different traces
    are never pooled by accident."""
    h = hashlib.sha256()
    for t in tasks:
        h.update(f"{t.id},{t.service},{t.arrival_time!r},{t.input.to_hex()},"
                 f"{t.input_size!r},{t.complexity!r},{t.output_size!r}\n".encode())
    return h.hexdigest()


def _open_text(path, mode: str):
    path = str(path)
    if path.endswith(".gz"):
        return gzip.open(path, mode + "t", newline="")
    return open(path, mode, newline="")


def write_trace(tasks, path) -> None:
    """Serialize with full-precision floats so load_trace round-trips exactly."""
    with _open_text(path, "w") as fh:
        fh.write(",".join(COLUMNS) + "\n")
        for t in tasks:
            fh.write(f"{t.id},{t.service},{t.arrival_time!r},{t.input.to_hex()},"
                     f"{t.input_size!r},{t.complexity!r},{t.output_size!r}\n")


def load_trace(path) -> list[Task]:
    tasks: list[Task] = []
    seen_ids: set[int] = set()
    last_arrival = -math.inf
    with _open_text(path, "r") as fh:
        header = fh.readline().rstrip("\n")
        if header.split(",") != list(COLUMNS):
            raise TraceError(f"bad header, expected {','.join(COLUMNS)}", line=1)
        for lineno, raw in enumerate(fh, start=2):
            raw = raw.rstrip("\n")
            if not raw:
                continue
            parts = raw.split(",")
            if len(parts) != len(COLUMNS):
                raise TraceError(f"expected {len(COLUMNS)} fields, got {len(parts)}",
                                 line=lineno)
            try:
                tid = int(parts[0])
                sid = int(parts[1])
                arrival = float(parts[2])
                descriptor = InputDescriptor.from_hex(parts[3])
                size = float(parts[4])
                complexity = float(parts[5])
                output = float(parts[6])
            except (ValueError, DomainError) as exc:
                raise TraceError(str(exc), line=lineno) from exc
            if tid in seen_ids:
                raise TraceError(f"duplicate task_id {tid}", line=lineno)
            if arrival < last_arrival:
                raise TraceError("arrival times must be sorted ascending", line=lineno)
            try:
                task = Task(tid, sid, arrival, descriptor, size, complexity, output)
            except DomainError as exc:
                raise TraceError(str(exc), line=lineno) from exc
            seen_ids.add(tid)
            last_arrival = arrival
            tasks.append(task)
    return tasks
