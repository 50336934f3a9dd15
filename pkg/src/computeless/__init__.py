"""Cloud-edge service offloading with computation reuse.

The library models services whose repeated inputs make cached results
valuable, matches them onto quota-bounded edge servers with a two-stage
deferred-acceptance game, and replays task traces through a discrete-event
simulator to compare the matching against classic offloading baselines.
"""

from .baselines import (GaParams, SaParams, annealing, cloud_only, genetic,
                        greedy_frequency, matching_no_reuse, random_edge)
from .costs import (CostBreakdown, RoutingDecision, brute_force_offload,
                    check_feasibility, completion_cost, objective_value,
                    placement_objective)
from .errors import ConfigError, ContractError, DomainError, TraceError
from .matching import (Acceptance, Assignment, NeighborRoute, edge_utility,
                       extended_match, find_blocking_pair, is_exchange_stable,
                       neighbor_utility, service_utility, whistle_match)
from .model import (CloudServer, EdgeServer, InputDescriptor, OffloadingGain,
                    Service, Task, WindowStats, compute_granularity,
                    compute_offloading_gain, compute_punishment,
                    compute_reusability, service_from_stats,
                    update_window_stats)
from .report import MetricsReport, aggregate, average_reports, write_report
from .reuse import LookupKind, LookupOutcome, ReuseEntry, ReuseTable, reuse_ratio
from .simulator import (SCHEMES, SimResult, TaskRecord, TrialConfig,
                        WindowRecord, evict_services, mm1_expected_sojourn,
                        run_trial)
from .trace import SynthParams, load_trace, profile_weights, synth_trace, write_trace

__version__ = "0.1.0"

__all__ = [
    "Acceptance", "Assignment", "CloudServer", "ConfigError", "ContractError",
    "CostBreakdown", "DomainError", "EdgeServer", "GaParams", "InputDescriptor",
    "LookupKind", "LookupOutcome", "MetricsReport", "NeighborRoute",
    "OffloadingGain", "ReuseEntry", "ReuseTable", "RoutingDecision", "SCHEMES",
    "SaParams", "Service", "SimResult", "SynthParams", "Task", "TaskRecord",
    "TraceError", "TrialConfig", "WindowRecord", "WindowStats", "aggregate",
    "annealing", "average_reports", "brute_force_offload", "check_feasibility",
    "cloud_only", "completion_cost", "compute_granularity",
    "compute_offloading_gain", "compute_punishment", "compute_reusability",
    "edge_utility", "evict_services", "extended_match", "find_blocking_pair",
    "genetic", "greedy_frequency", "is_exchange_stable", "load_trace",
    "matching_no_reuse", "mm1_expected_sojourn", "neighbor_utility",
    "objective_value", "placement_objective", "profile_weights", "random_edge",
    "reuse_ratio", "run_trial", "service_from_stats", "service_utility",
    "synth_trace", "update_window_stats", "whistle_match", "write_report",
    "write_trace",
]
