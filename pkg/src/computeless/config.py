"""Scenario files: one YAML document describing a whole comparison run.

Top-level keys: schemes, trials, seed, output_dir, trace, sim. The trace
section either points at a CSV (path) or carries synthetic-generation
knobs; the sim section mirrors TrialConfig minus scheme and seed. Unknown
keys are rejected by name so typos never silently fall back to defaults.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, fields, replace
from pathlib import Path

import yaml

from .baselines import GaParams, SaParams
from .errors import ConfigError, DomainError
from .simulator import SCHEMES, TrialConfig
from .trace import SynthParams, load_trace, synth_trace

_SIM_KEYS = {f.name for f in fields(TrialConfig)} - {"scheme", "seed"}
_TRACE_KEYS = {f.name for f in fields(SynthParams)} | {"path"}
_TOP_KEYS = {"schemes", "trials", "seed", "output_dir", "trace", "sim"}


@dataclass(frozen=True)
class ScenarioConfig:
    schemes: tuple[str, ...] = ("whistle",)
    trials: int = 10
    seed: int = 0
    output_dir: str = "out"
    trace_path: str | None = None
    synth: SynthParams = SynthParams()
    sim: TrialConfig = TrialConfig()  # scheme/seed fields are placeholders

    def validate(self) -> None:
        if not self.schemes:
            raise ConfigError("schemes: need at least one")
        for name in self.schemes:
            if name not in SCHEMES:
                raise ConfigError(f"schemes: unknown scheme {name!r}, "
                                  f"expected one of {sorted(SCHEMES)}")
        if self.trials < 1:
            raise ConfigError("trials: must be >= 1")
        self.sim.validate()
        if self.trace_path is None:
            try:
                self.synth.validate()
            except DomainError as exc:
                raise ConfigError(f"trace: {exc}") from exc
            if not 1000 <= self.synth.n_tasks <= 10000:
                warnings.warn("trace.n_tasks outside the usual 1000..10000",
                              stacklevel=2)
            if not 10 <= self.synth.arrival_rate <= 50:
                warnings.warn("trace.arrival_rate outside the usual 10..50/s",
                              stacklevel=2)
            if not 0.10 <= self.synth.input_redundancy <= 0.80:
                warnings.warn("trace.input_redundancy outside the usual "
                              "0.10..0.80", stacklevel=2)


def _check_keys(section: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")


def _build(cls, section: dict, where: str):
    try:
        return cls(**section)
    except (TypeError, DomainError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_scenario(doc: dict) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("scenario: top level must be a mapping")
    _check_keys(doc, _TOP_KEYS, "scenario")

    trace_sec = dict(doc.get("trace") or {})
    _check_keys(trace_sec, _TRACE_KEYS, "trace")
    trace_path = trace_sec.pop("path", None)
    if "popularity" in trace_sec and isinstance(trace_sec["popularity"], list):
        trace_sec["popularity"] = tuple(trace_sec["popularity"])
    synth = _build(SynthParams, trace_sec, "trace")

    sim_sec = dict(doc.get("sim") or {})
    _check_keys(sim_sec, _SIM_KEYS, "sim")
    if isinstance(sim_sec.get("ga"), dict):
        _check_keys(sim_sec["ga"], {f.name for f in fields(GaParams)}, "sim.ga")
        sim_sec["ga"] = _build(GaParams, sim_sec["ga"], "sim.ga")
    if isinstance(sim_sec.get("sa"), dict):
        _check_keys(sim_sec["sa"], {f.name for f in fields(SaParams)}, "sim.sa")
        sim_sec["sa"] = _build(SaParams, sim_sec["sa"], "sim.sa")
    if isinstance(sim_sec.get("origin_weights"), list):
        sim_sec["origin_weights"] = tuple(sim_sec["origin_weights"])
    sim = _build(TrialConfig, sim_sec, "sim")

    schemes = doc.get("schemes", ["whistle"])
    if isinstance(schemes, str):
        schemes = [schemes]
    scenario = ScenarioConfig(
        schemes=tuple(schemes),
        trials=doc.get("trials", 10),
        seed=doc.get("seed", 0),
        output_dir=str(doc.get("output_dir", "out")),
        trace_path=trace_path,
        synth=synth,
        sim=sim)
    scenario.validate()
    return scenario


def load_scenario(path) -> ScenarioConfig:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"scenario {path}: {exc}") from exc
    return parse_scenario(doc or {})


def trial_config_for(scenario: ScenarioConfig, scheme: str, trial: int) -> TrialConfig:
    """The per-trial simulator config; seeds advance with the trial index."""
    return replace(scenario.sim, scheme=scheme, seed=scenario.seed + trial)


def trace_for(scenario: ScenarioConfig, trial: int):
    """One workload per trial; a fixed path means every trial shares it."""
    if scenario.trace_path is not None:
        return load_trace(scenario.trace_path)
    return synth_trace(scenario.synth, scenario.seed + trial)


def resolve_output_dir(scenario: ScenarioConfig, override: str | None) -> Path:
    return Path(override) if override else Path(scenario.output_dir)
