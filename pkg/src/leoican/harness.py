"""Experiment orchestration: scheme matrix, seeded Monte-Carlo runs, reports.

A scheme pairs a selection algorithm with a beamforming algorithm. All
schemes within one seed share the same scenario and channel realization, so
comparisons are paired. Per-seed failures (e.g. an infeasible GDOP limit)
are recorded and excluded from aggregates, never silently dropped.
"""

import concurrent.futures
import csv
import json
import math
import time
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .beamforming import DcEngine, DcSettings, make_engine
from .channel import build_channel_map
from .geometry import (
    Scenario,
    ScenarioGenerationError,
    ScenarioSpec,
    default_radio,
    generate_scenario,
)
from .metrics import LinkAssignment, per_ue_rates
from .selection import InfeasibleSelectionError, cfg_selection, gdop_selection

SELECTION_KINDS = ("gdop_greedy", "cfg")
BEAMFORMING_KINDS = ("mrt", "zf", "dc")


@dataclass(frozen=True)
class SchemeId:
    """One row of the comparison matrix."""

    selection: str
    beamforming: str

    def __post_init__(self):
        if self.selection not in SELECTION_KINDS:
            raise ValueError(f"unknown selection kind {self.selection!r}")
        if self.beamforming not in BEAMFORMING_KINDS:
            raise ValueError(f"unknown beamforming kind {self.beamforming!r}")

    @property
    def name(self) -> str:
        return f"{self.selection}-{self.beamforming}"

    @classmethod
    def parse(cls, text):
        selection, _, beamforming = text.rpartition("-")
        return cls(selection, beamforming)


DEFAULT_SCHEMES = (
    SchemeId("cfg", "mrt"),
    SchemeId("cfg", "zf"),
    SchemeId("gdop_greedy", "dc"),
    SchemeId("cfg", "dc"),
)

PROFILE_ANTENNAS = {"desk": (4, 4), "paper": (8, 8)}


@dataclass(frozen=True)
class ExperimentConfig:
    spec: ScenarioSpec = field(default_factory=ScenarioSpec)
    serving_count: int = 4
    gdop_limit: float = 6.0
    dc: DcSettings = field(default_factory=DcSettings)
    schemes: tuple = DEFAULT_SCHEMES
    seeds: tuple = tuple(range(1, 21))
    multi_pass: bool = False

    @classmethod
    def default(cls, profile="desk"):
        nx, ny = PROFILE_ANTENNAS[profile]
        return cls(spec=ScenarioSpec(radio=default_radio(nx=nx, ny=ny)))

    @classmethod
    def from_dict(cls, data, profile=None):
        data = dict(data)
        radio_kwargs = dict(data.pop("radio", {}))
        if profile is not None:
            radio_kwargs["nx"], radio_kwargs["ny"] = PROFILE_ANTENNAS[profile]
        spec_kwargs = {
            key: data.pop(key)
            for key in ("n_satellites", "n_cells", "altitude_m", "cell_radius_m",
                        "min_elevation_deg", "min_separation_deg", "cap_halfangle_deg")
            if key in data
        }
        spec = ScenarioSpec(radio=default_radio(**radio_kwargs), **spec_kwargs)
        kwargs = {"spec": spec}
        if "serving_count" in data:
            kwargs["serving_count"] = int(data.pop("serving_count"))
        if "gdop_limit" in data:
            kwargs["gdop_limit"] = float(data.pop("gdop_limit"))
        if "dc" in data:
            kwargs["dc"] = DcSettings(**data.pop("dc"))
        if "schemes" in data:
            kwargs["schemes"] = tuple(SchemeId.parse(s) for s in data.pop("schemes"))
        if "seeds" in data:
            kwargs["seeds"] = tuple(int(s) for s in data.pop("seeds"))
        elif "num_seeds" in data:
            kwargs["seeds"] = tuple(range(1, int(data.pop("num_seeds")) + 1))
        if "multi_pass" in data:
            kwargs["multi_pass"] = bool(data.pop("multi_pass"))
        if data:
            raise ValueError(f"unknown config keys: {sorted(data)}")
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path, profile=None):
        with open(path) as fh:
            return cls.from_dict(json.load(fh), profile=profile)

    def with_seeds(self, seeds):
        return replace(self, seeds=tuple(int(s) for s in seeds))


@dataclass
class SeedResult:
    scheme: SchemeId
    seed: int
    sum_rate_bps: float
    ue_rates_bps: list
    ue_gdop: list
    coalitions: dict
    switches: list
    dc_trace_rows: list  # (satellite, iteration, surrogate_bps, sum_rate_bps)
    elapsed_s: float


@dataclass
class SchemeSummary:
    scheme: SchemeId
    n_seeds: int
    mean_sum_rate_bps: float
    std_sum_rate_bps: float


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    results: list
    failures: list  # (seed, message)

    def scheme_rates(self, scheme):
        return [r.sum_rate_bps for r in self.results if r.scheme == scheme]

    def summaries(self):
        out = []
        for scheme in self.config.schemes:
            rates = self.scheme_rates(scheme)
            if rates:
                mean = float(np.mean(rates))
                std = float(np.std(rates, ddof=1)) if len(rates) > 1 else 0.0
            else:
                mean = std = math.nan
            out.append(SchemeSummary(scheme, len(rates), mean, std))
        return out


def run_scheme(scheme, scenario, channels, config):
    """Run one scheme on a prepared scenario/channel realization."""
    start = time.perf_counter()
    engine = make_engine(scheme.beamforming, channels, scenario.radio, config.dc)
    if scheme.selection == "cfg":
        structure, beams, switches = cfg_selection(
            scenario, channels, config.serving_count, config.gdop_limit,
            engine, multi_pass=config.multi_pass)
    else:
        structure, beams, switches = gdop_selection(
            scenario, channels, config.serving_count, engine)

    assignment = LinkAssignment.from_coalitions(
        structure.coalitions, scenario.n_satellites)
    rates = per_ue_rates(channels, beams, assignment, scenario.radio)

    dc_rows = []
    if isinstance(engine, DcEngine):
        for s in range(scenario.n_satellites):
            ue_ids = assignment.ues_of(s)
            if not ue_ids:
                continue
            trace = engine.traces.get((s, frozenset(ue_ids)))
            if trace is not None:
                for iteration, surrogate, true_rate in trace.rows:
                    dc_rows.append((s, iteration, surrogate, true_rate))

    return SeedResult(
        scheme=scheme,
        seed=scenario.seed,
        sum_rate_bps=float(rates.sum()),
        ue_rates_bps=[float(r) for r in rates],
        ue_gdop=[float(structure.gdop_by_ue[c]) for c in sorted(structure.gdop_by_ue)],
        coalitions=dict(structure.coalitions),
        switches=switches,
        dc_trace_rows=dc_rows,
        elapsed_s=time.perf_counter() - start,
    )


def run_seed(config, seed):
    """All schemes on one seed, sharing the scenario and channels."""
    scenario = generate_scenario(config.spec, seed)
    channels = build_channel_map(scenario, np.random.default_rng((int(seed), 1)))
    return [run_scheme(scheme, scenario, channels, config) for scheme in config.schemes]


def run_experiment(config, seeds=None, jobs=1):
    """Run the scheme matrix over all seeds and collect a report."""
    seeds = list(config.seeds if seeds is None else seeds)
    results = []
    failures = []

    def handle(seed, outcome, error):
        if error is not None:
            warnings.warn(f"seed {seed} excluded: {error}")
            failures.append((seed, str(error)))
        else:
            results.extend(outcome)

    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {seed: pool.submit(run_seed, config, seed) for seed in seeds}
            for seed in seeds:
                try:
                    handle(seed, futures[seed].result(), None)
                except (InfeasibleSelectionError, ScenarioGenerationError) as err:
                    handle(seed, None, err)
    else:
        for seed in seeds:
            try:
                handle(seed, run_seed(config, seed), None)
            except (InfeasibleSelectionError, ScenarioGenerationError) as err:
                handle(seed, None, err)

    return ExperimentReport(config=config.with_seeds(seeds), results=results,
                            failures=failures)


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def emit_reports(report, out_dir):
    """Write summary/per-terminal/trace/switch CSVs plus a text summary.

    CSV contents are a pure function of the report data (timings go to the
    text summary only), so reruns with identical inputs are byte-identical.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    summary_rows = []
    for s in report.summaries():
        summary_rows.append([
            s.scheme.name, s.scheme.selection, s.scheme.beamforming, s.n_seeds,
            float(s.mean_sum_rate_bps), float(s.std_sum_rate_bps),
            float(s.mean_sum_rate_bps / 1e9), float(s.std_sum_rate_bps / 1e9),
        ])
    _write_csv(out / "summary.csv",
               ["scheme", "selection", "beamforming", "n_seeds",
                "mean_sum_rate_bps", "std_sum_rate_bps",
                "mean_sum_rate_gbps", "std_sum_rate_gbps"],
               summary_rows)

    per_ue_rows = []
    for r in report.results:
        for c, (rate_bps, gdop_value) in enumerate(zip(r.ue_rates_bps, r.ue_gdop)):
            per_ue_rows.append([r.scheme.name, r.seed, c, float(rate_bps), float(gdop_value)])
    _write_csv(out / "per_ue.csv",
               ["scheme", "seed", "ue", "rate_bps", "gdop"], per_ue_rows)

    trace_rows = []
    for r in report.results:
        for sat, iteration, surrogate, true_rate in r.dc_trace_rows:
            trace_rows.append([r.scheme.name, r.seed, sat, iteration,
                               float(surrogate), float(true_rate)])
    _write_csv(out / "dc_trace.csv",
               ["scheme", "seed", "satellite", "iteration",
                "surrogate_bps", "sum_rate_bps"], trace_rows)

    switch_rows = []
    for r in report.results:
        for record in r.switches:
            switch_rows.append([
                r.scheme.name, r.seed, record.ue,
                "|".join(str(s) for s in record.candidate),
                float(record.gdop), float(record.utility_old),
                float(record.utility_new), int(record.accepted),
            ])
    _write_csv(out / "switches.csv",
               ["scheme", "seed", "ue", "candidate", "gdop",
                "u_old_bps", "u_new_bps", "accepted"], switch_rows)

    (out / "summary.txt").write_text(format_summary(report))
    return [out / name for name in
            ("summary.csv", "per_ue.csv", "dc_trace.csv", "switches.csv", "summary.txt")]


def format_summary(report):
    spec = report.config.spec
    lines = [
        "experiment summary",
        f"  satellites={spec.n_satellites} cells={spec.n_cells} "
        f"antennas={spec.radio.nx}x{spec.radio.ny} serving_count={report.config.serving_count} "
        f"gdop_limit={report.config.gdop_limit}",
        f"  seeds: {len(report.config.seeds)} requested, {len(report.failures)} failed",
    ]
    for s in report.summaries():
        mean_gbps = s.mean_sum_rate_bps / 1e9
        std_gbps = s.std_sum_rate_bps / 1e9
        lines.append(
            f"  {s.scheme.name:>16}: {mean_gbps:8.4f} Gbps mean +- {std_gbps:7.4f} ({s.n_seeds} seeds)")
    total_time = sum(r.elapsed_s for r in report.results)
    lines.append(f"  total scheme runtime: {total_time:.1f} s")
    for seed, message in report.failures:
        lines.append(f"  seed {seed} FAILED: {message}")
    return "\n".join(lines) + "\n"
