"""Sweep runner, configuration comparison, and artifact writers.

A sweep runs one preset across several arrival rates. Scenario and noise
seeds derive from (experiment seed, rate index) only, never from the preset,
so two presets compared under the same seed replay byte-identical workloads
point for point.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .analytics import HeatMap, heatmap_csv_text, heatmap_pgm_text
from .errors import SweepMismatch
from .presets import ConfigPreset, build_preset_topology, preset_params, resolve_preset
from .recommender import DEFAULT_WEIGHTS
from .rng import Stream
from .simnet import MetricsReport, run
from .workload import SamplingSpec, TerminalMap, generate_scenario

__all__ = [
    "ExperimentResult",
    "run_experiment",
    "compare",
    "requests_csv_text",
    "summary_payload",
    "summary_json_text",
    "clusters_jsonl_text",
    "merge_heatmaps",
    "heatmap_csv_text",
    "heatmap_pgm_text",
]


@dataclass
class ExperimentResult:
    preset: ConfigPreset
    seed: int
    rates: tuple
    reports: list = field(default_factory=list)

    def mean_response_ms(self) -> list:
        return [r.response_mean_ms for r in self.reports]


def run_experiment(
    preset,
    rates,
    seed: int,
    duration_s: float = 20.0,
    traveler_count: int = 60,
    sampling: SamplingSpec | None = None,
    terminal: TerminalMap | None = None,
) -> ExperimentResult:
    """Run the preset at every rate with paired per-point sub-seeds."""
    if isinstance(preset, str):
        preset = resolve_preset(preset)
    root = Stream(seed)
    result = ExperimentResult(preset=preset, seed=seed, rates=tuple(rates))
    for index, rate in enumerate(rates):
        params = preset_params(
            preset,
            rate,
            duration_s=duration_s,
            traveler_count=traveler_count,
            sampling=sampling,
            terminal=terminal,
        )
        scenario_seed = root.derive("scenario", index).seed
        noise_seed = root.derive("noise", index).seed
        scenario = generate_scenario(params, scenario_seed)
        topology = build_preset_topology(preset)
        result.reports.append(run(scenario, topology, noise_seed))
    return result


def compare(result_a: ExperimentResult, result_b: ExperimentResult) -> float:
    """Mean over rate points of (1 - mean_a / mean_b); positive favors a."""
    if result_a.rates != result_b.rates:
        raise SweepMismatch(f"sweeps differ: {result_a.rates} vs {result_b.rates}")
    if not result_a.rates:
        raise SweepMismatch("cannot compare empty sweeps")
    terms = []
    for ra, rb in zip(result_a.reports, result_b.reports):
        if rb.response_mean_ms == 0:
            raise SweepMismatch("comparison baseline has no completed requests")
        terms.append(1.0 - ra.response_mean_ms / rb.response_mean_ms)
    return sum(terms) / len(terms)


# -- artifacts ----------------------------------------------------------------------


def requests_csv_text(results: list) -> str:
    """Per-request rows; ids run cumulatively across each preset's sweep."""
    lines = ["id,config,created_at,target,response_ms,violated"]
    for result in results:
        offset = 0
        for report in result.reports:
            for rec in sorted(report.records, key=lambda r: r.id):
                lines.append(
                    f"{rec.id + offset},{report.config},{rec.created_at},{rec.target},"
                    f"{rec.response_us / 1000:.3f},{'true' if rec.violated else 'false'}"
                )
            offset += report.requests_created
    return "\n".join(lines) + "\n"


def summary_payload(results: list, comparisons: dict | None = None) -> dict:
    experiments = {}
    for result in results:
        points = [report.to_dict() for report in result.reports]
        experiments[result.preset.name] = {
            "seed": result.seed,
            "rates": list(result.rates),
            "points": points,
        }
    payload = {
        "experiments": experiments,
        "recommender_weights": {
            "topic": DEFAULT_WEIGHTS[0],
            "collaborative": DEFAULT_WEIGHTS[1],
            "recency": DEFAULT_WEIGHTS[2],
        },
        "comparisons": comparisons or {},
    }
    return payload


def summary_json_text(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def clusters_jsonl_text(results: list) -> str:
    """One line per cluster snapshot: rate, time, and the clusters found."""
    lines = []
    for result in results:
        for rate, report in zip(result.rates, result.reports):
            for at, clusters in report.cluster_snapshots:
                doc = {
                    "config": report.config,
                    "rate_per_s": rate,
                    "at": at,
                    "clusters": [
                        {
                            "members": list(c.members),
                            "centroid": [round(c.centroid.x, 6), round(c.centroid.y, 6)],
                            "size": c.size,
                        }
                        for c in clusters
                    ],
                }
                lines.append(json.dumps(doc, sort_keys=True, separators=(",", ":")))
    return "\n".join(lines) + "\n" if lines else ""


def merge_heatmaps(maps: list) -> HeatMap | None:
    """Sum same-shaped grids cell by cell; None when nothing was sampled."""
    maps = [m for m in maps if m is not None]
    if not maps:
        return None
    first = maps[0]
    merged = HeatMap(
        origin=first.origin,
        cell_size_m=first.cell_size_m,
        width=first.width,
        height=first.height,
    )
    for m in maps:
        if (m.width, m.height, m.cell_size_m, m.origin) != (
            first.width,
            first.height,
            first.cell_size_m,
            first.origin,
        ):
            raise SweepMismatch("heat maps have mismatched grids")
        for y in range(m.height):
            for x in range(m.width):
                merged.counts[y][x] += m.counts[y][x]
    return merged
