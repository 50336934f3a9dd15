"""Command line front end.

Subcommands: simulate (one scheme, one seed), compare (every requested
scheme over the trial count, plus charts), gen-trace, validate (property
suites), inspect (reuse-table contents after a run). Exit codes: 0 on
success, 2 for configuration problems, 1 for runtime failures. The
COMPUTELESS_OUTDIR environment variable overrides any output directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import ScenarioConfig, load_scenario, trace_for, trial_config_for
from .errors import ConfigError
from .figures import render_comparison_figures
from .report import aggregate, average_reports, write_comparison, write_report
from .simulator import SCHEMES, run_trial, write_sim_csv
from .trace import SynthParams, load_trace, synth_trace, write_trace
from .validation import run_all_suites

ENV_OUTDIR = "COMPUTELESS_OUTDIR"


def _outdir(scenario: ScenarioConfig | None, flag: str | None) -> Path:
    if flag:
        path = Path(flag)
    elif os.environ.get(ENV_OUTDIR):
        path = Path(os.environ[ENV_OUTDIR])
    elif scenario is not None:
        path = Path(scenario.output_dir)
    else:
        path = Path("out")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _trace_for_run(scenario: ScenarioConfig, trace_flag: str | None, seed: int):
    if trace_flag:
        return load_trace(trace_flag)
    if scenario.trace_path is not None:
        return load_trace(scenario.trace_path)
    return synth_trace(scenario.synth, seed)


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.config)
    scheme = args.scheme or scenario.schemes[0]
    if scheme not in SCHEMES:
        raise ConfigError(f"--scheme: unknown scheme {scheme!r}")
    seed = scenario.seed if args.seed is None else args.seed
    config = replace(scenario.sim, scheme=scheme, seed=seed)
    config.validate()
    trace = _trace_for_run(scenario, args.trace, seed)
    result = run_trial(config, trace)
    report = aggregate([result])
    outdir = _outdir(scenario, args.out)
    stem = f"{scheme}_seed{seed}"
    write_report(report, "json", outdir / f"report_{stem}.json")
    write_report(report, "csv", outdir / f"report_{stem}.csv")
    write_sim_csv(result, outdir / f"tasks_{stem}.csv", outdir / f"windows_{stem}.csv")
    print(f"{scheme} seed {seed}: {report.tasks} tasks, "
          f"mean completion {report.completion_mean_s:.4f}s, "
          f"p90 {report.completion_p90_s:.4f}s -> {outdir}")
    return 0


def cmd_compare(args) -> int:
    scenario = load_scenario(args.config)
    if args.schemes == "all":
        schemes = list(SCHEMES)
    elif args.schemes:
        schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
        for s in schemes:
            if s not in SCHEMES:
                raise ConfigError(f"--schemes: unknown scheme {s!r}")
    else:
        schemes = list(scenario.schemes)
    outdir = _outdir(scenario, args.out)
    reports = []
    for scheme in schemes:
        per_trial = []
        for trial in range(scenario.trials):
            trace = trace_for(scenario, trial)
            result = run_trial(trial_config_for(scenario, scheme, trial), trace)
            per_trial.append(aggregate([result]))
        reports.append(average_reports(per_trial))
    write_comparison(reports, outdir / "comparison.csv")
    figures = render_comparison_figures(reports, outdir)
    header = f"{'scheme':<20} {'mean_s':>10} {'p90_s':>10} {'util':>7} {'comm_red':>9} {'comp_red':>9}"
    print(header)
    for r in reports:
        print(f"{r.scheme:<20} {r.completion_mean_s:>10.4f} "
              f"{r.completion_p90_s:>10.4f} {r.resource_utilization:>7.3f} "
              f"{r.comm_reduction:>9.4f} {r.comp_reduction:>9.4f}")
    print(f"wrote {outdir / 'comparison.csv'} and {len(figures)} figures")
    return 0


def cmd_gen_trace(args) -> int:
    params = SynthParams(
        n_tasks=args.n, arrival_rate=args.rate, n_services=args.services,
        popularity=args.popularity, zipf_exponent=args.zipf_exponent,
        input_redundancy=args.redundancy, items_per_input=args.items,
        mean_input_mb=args.mean_input, mean_complexity=args.mean_complexity,
        mean_output_mb=args.mean_output)
    try:
        params.validate()
    except Exception as exc:
        raise ConfigError(str(exc)) from exc
    tasks = synth_trace(params, args.seed)
    write_trace(tasks, args.out)
    print(f"wrote {len(tasks)} tasks to {args.out}")
    return 0


def cmd_validate(args) -> int:
    results = run_all_suites(args.seed, args.mm1_tasks)
    failed = False
    for result in results:
        print(result)
        for failure in result.failures[:5]:
            print(f"  {failure}")
        failed = failed or not result.passed
    return 1 if failed else 0


def cmd_inspect(args) -> int:
    scenario = load_scenario(args.config)
    scheme = args.scheme or scenario.schemes[0]
    if scheme not in SCHEMES:
        raise ConfigError(f"--scheme: unknown scheme {scheme!r}")
    seed = scenario.seed if args.seed is None else args.seed
    config = replace(scenario.sim, scheme=scheme, seed=seed)
    config.validate()
    trace = _trace_for_run(scenario, args.trace, seed)
    result = run_trial(config, trace)
    counts = result.location_counts()
    print(f"{scheme} seed {seed}: {len(result.tasks)} tasks, locations {counts}")
    for eid in sorted(result.reuse_tables or {}):
        table = result.reuse_tables[eid]
        print(f"edge {eid}: {len(table)}/{table.capacity} entries")
        for entry in table.entries()[:args.top]:
            digest = entry.key.to_hex()
            if len(digest) > 40:
                digest = digest[:37] + "..."
            print(f"  service {entry.service} freq {entry.frequency} "
                  f"output {entry.output_size:.3f}Mb key {digest}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="computeless",
        description="Edge service offloading simulator with computation reuse.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scheme for one seed")
    p.add_argument("--config", required=True, help="scenario YAML")
    p.add_argument("--scheme", help="scheme name (default: first in scenario)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--trace", help="trace CSV overriding the scenario workload")
    p.add_argument("--out", help="output directory")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("compare", help="run several schemes on identical traces")
    p.add_argument("--config", required=True)
    p.add_argument("--schemes", help="'all' or comma-separated names "
                                     "(default: scenario list)")
    p.add_argument("--out", help="output directory")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("gen-trace", help="write a synthetic workload CSV")
    p.add_argument("--n", type=int, default=5000, help="task count")
    p.add_argument("--rate", type=float, default=20.0, help="arrivals per second")
    p.add_argument("--services", type=int, default=12)
    p.add_argument("--popularity", default="profile",
                   choices=["profile", "uniform", "zipf"])
    p.add_argument("--zipf-exponent", type=float, default=1.0)
    p.add_argument("--redundancy", type=float, default=0.5,
                   help="chance a task repeats an earlier input")
    p.add_argument("--items", type=int, default=4, help="digest items per input")
    p.add_argument("--mean-input", type=float, default=4.0, help="megabits")
    p.add_argument("--mean-complexity", type=float, default=10.0, help="units")
    p.add_argument("--mean-output", type=float, default=0.5, help="megabits")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="trace.csv", help="output CSV (.gz accepted)")
    p.set_defaults(fn=cmd_gen_trace)

    p = sub.add_parser("validate", help="run the property suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mm1-tasks", type=int, default=100_000,
                   help="queue-calibration sample size")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("inspect", help="dump reuse tables after a run")
    p.add_argument("--config", required=True)
    p.add_argument("--scheme", help="scheme name (default: first in scenario)")
    p.add_argument("--seed", type=int)
    p.add_argument("--trace", help="trace CSV overriding the scenario workload")
    p.add_argument("--top", type=int, default=10, help="entries shown per edge")
    p.set_defaults(fn=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001  (CLI boundary)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
