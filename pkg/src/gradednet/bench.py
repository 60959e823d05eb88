"""Benchmark harness: seeded trials, node-count sweeps, CSV/JSON artifacts.

A trial is the full protocol on one topology: generate, grade, prune to the
destination quadrant, then run both optimizers on the identical subgraph.
Each trial's seed is split into independent per-purpose streams (topology,
grading, endpoints, one per algorithm) so adding an algorithm later never
perturbs the existing ones.
"""

from __future__ import annotations

import csv
import json
import random
import statistics
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig
from .grading import build_knowledge_base, select_feasible
from .optimizers import RouteResult, Subgraph, abc_search, ga_search
from .topology import generate_topology, quadrant_candidates
from .traffic import sample_link_states, traffic_intensity

STREAM_TOPOLOGY = 0
STREAM_GRADING = 1
STREAM_ABC = 2
STREAM_GA = 3
STREAM_ENDPOINTS = 4

CSV_FIELDS = ("n", "seed", "mode", "n_selected", "abc_hops", "ga_hops",
              "abc_conv", "ga_conv", "abc_fit", "ga_fit",
              "path_found_abc", "path_found_ga")

FITNESS_TIE_MBPS = 1e-9
MIN_ENDPOINT_SEPARATION = 0.5


def child_seed(seed: int, stream: int) -> int:
    """Independent 64-bit sub-seed for one purpose-stream of a trial."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream,))
    return int(ss.generate_state(1, np.uint64)[0])


def stream_np_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream,)))


def stream_py_rng(seed: int, stream: int) -> random.Random:
    return random.Random(child_seed(seed, stream))


def pick_endpoints(topology, rng: random.Random,
                   min_separation: float = MIN_ENDPOINT_SEPARATION) -> tuple[int, int]:
    """Seeded source/destination pair with a meaningful geometric separation.

    Adjacent endpoints make the search trivial; the protocol is interested in
    multi-hop routes, so pairs closer than ``min_separation`` are redrawn.
    Falls back to the most separated pair when the topology is too clustered.
    """
    n = topology.n
    nodes = topology.nodes
    for _ in range(100 * n):
        source = rng.randrange(n)
        destination = rng.randrange(n - 1)
        if destination >= source:
            destination += 1
        dx = nodes[source].x - nodes[destination].x
        dy = nodes[source].y - nodes[destination].y
        if dx * dx + dy * dy >= min_separation * min_separation:
            return source, destination
    best = max(
        ((i, j) for i in range(n) for j in range(i + 1, n)),
        key=lambda p: ((nodes[p[0]].x - nodes[p[1]].x) ** 2
                       + (nodes[p[0]].y - nodes[p[1]].y) ** 2),
    )
    return best


@dataclass
class TrialRecord:
    """One benchmark row: both algorithms on one graded topology."""

    n_total: int
    n_selected: int
    abc: RouteResult
    ga: RouteResult
    seed: int
    selection_mode: str
    source: int = 0
    destination: int = 0

    def to_row(self) -> dict:
        return {
            "n": self.n_total,
            "seed": self.seed,
            "mode": self.selection_mode,
            "n_selected": self.n_selected,
            "abc_hops": self.abc.hop_count,
            "ga_hops": self.ga.hop_count,
            "abc_conv": self.abc.convergence_cycle,
            "ga_conv": self.ga.convergence_cycle,
            "abc_fit": self.abc.best_fitness.bottleneck_bw,
            "ga_fit": self.ga.best_fitness.bottleneck_bw,
            "path_found_abc": self.abc.found,
            "path_found_ga": self.ga.found,
        }


@dataclass
class NodeCountSummary:
    n: int
    trials: int
    path_found_abc: float
    path_found_ga: float
    abc_median_hops: float | None
    ga_median_hops: float | None
    abc_median_conv: float | None
    ga_median_conv: float | None
    convergence_ratio: float | None


@dataclass
class SuiteSummary:
    mode: str
    per_n: dict[int, NodeCountSummary] = field(default_factory=dict)
    ga_better: float = 0.0
    equal: float = 0.0
    abc_better: float = 0.0
    compared_trials: int = 0


def run_trial(n: int, seed: int, config: RunConfig) -> TrialRecord:
    """Run the full protocol once: generate, grade, prune, search with both algorithms."""
    if n < 2:
        raise ValueError("need at least 2 nodes")

    topology = generate_topology(
        n, config.link_density, child_seed(seed, STREAM_TOPOLOGY),
        capacity_mbps=config.max_bandwidth_mbps,
        lifetime_scale=config.lifetime_scale,
    )

    grading_rng = stream_np_rng(seed, STREAM_GRADING)
    states = sample_link_states(
        len(topology.links), grading_rng,
        capacity_mbps=config.max_bandwidth_mbps,
        flow_rate_mbps=config.flow_rate_mbps, mu=config.mu,
    )
    kb = build_knowledge_base(topology, states, config.grading_config(), grading_rng)

    source, destination = pick_endpoints(topology, stream_py_rng(seed, STREAM_ENDPOINTS))

    feasible = select_feasible(topology, kb, config.selection_mode)
    quadrant = quadrant_candidates(topology, source, destination)
    candidates = quadrant & feasible
    subgraph = Subgraph.from_topology(topology, candidates, source)

    abc = abc_search(subgraph, source, destination, config.abc_config(), kb,
                     stream_py_rng(seed, STREAM_ABC), bw_threshold=config.bw_threshold_mbps)
    ga = ga_search(subgraph, source, destination, config.ga_config(), kb,
                   stream_py_rng(seed, STREAM_GA), bw_threshold=config.bw_threshold_mbps)

    return TrialRecord(
        n_total=n, n_selected=len(feasible), abc=abc, ga=ga, seed=seed,
        selection_mode=config.selection_mode, source=source, destination=destination,
    )


def trial_seed(base_seed: int, n: int, index: int) -> int:
    """Deterministic per-(n, replicate) seed; independent of execution order."""
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=(n, index))
    return int(ss.generate_state(1, np.uint64)[0])


def run_suite(config: RunConfig, node_counts: tuple[int, ...] | None = None,
              seeds_per_n: int | None = None) -> tuple[SuiteSummary, list[TrialRecord]]:
    """Sweep node counts, aggregating over ``seeds_per_n`` replicates each."""
    counts = tuple(node_counts) if node_counts is not None else config.node_counts
    reps = seeds_per_n if seeds_per_n is not None else config.seeds_per_n
    if reps < 1:
        raise ValueError("seeds_per_n must be >= 1")
    records = [
        run_trial(n, trial_seed(config.seed, n, k), config)
        for n in counts
        for k in range(reps)
    ]
    rows = [record.to_row() for record in records]
    return summarize(rows), records


def convergence_ratio(abc_median: float, ga_median: float) -> float | None:
    """Relative convergence advantage (GA - ABC) / GA; None when undefined."""
    if ga_median == 0:
        return None
    return (ga_median - abc_median) / ga_median


def _median(values: list) -> float | None:
    return statistics.median(values) if values else None


def summarize(rows: list[dict]) -> SuiteSummary:
    """Aggregate trial rows into per-n medians and overall quality fractions.

    A pure fold over the row set: execution order never changes the result.
    """
    if not rows:
        raise ValueError("no rows to summarize")
    mode = rows[0]["mode"]
    summary = SuiteSummary(mode=mode)

    for n in sorted({row["n"] for row in rows}):
        group = [row for row in rows if row["n"] == n]
        abc_found = [row for row in group if row["path_found_abc"]]
        ga_found = [row for row in group if row["path_found_ga"]]
        abc_conv = _median([row["abc_conv"] for row in abc_found])
        ga_conv = _median([row["ga_conv"] for row in ga_found])
        ratio = None
        if abc_conv is not None and ga_conv is not None:
            ratio = convergence_ratio(abc_conv, ga_conv)
        summary.per_n[n] = NodeCountSummary(
            n=n,
            trials=len(group),
            path_found_abc=len(abc_found) / len(group),
            path_found_ga=len(ga_found) / len(group),
            abc_median_hops=_median([row["abc_hops"] for row in abc_found]),
            ga_median_hops=_median([row["ga_hops"] for row in ga_found]),
            abc_median_conv=abc_conv,
            ga_median_conv=ga_conv,
            convergence_ratio=ratio,
        )

    both = [row for row in rows if row["path_found_abc"] and row["path_found_ga"]]
    summary.compared_trials = len(both)
    if both:
        ga_better = sum(1 for r in both if r["ga_fit"] > r["abc_fit"] + FITNESS_TIE_MBPS)
        abc_better = sum(1 for r in both if r["abc_fit"] > r["ga_fit"] + FITNESS_TIE_MBPS)
        summary.ga_better = ga_better / len(both)
        summary.abc_better = abc_better / len(both)
        summary.equal = (len(both) - ga_better - abc_better) / len(both)
    return summary


def write_records_csv(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_FIELDS)
        for row in rows:
            writer.writerow([
                row["n"], row["seed"], row["mode"], row["n_selected"],
                row["abc_hops"], row["ga_hops"], row["abc_conv"], row["ga_conv"],
                repr(row["abc_fit"]), repr(row["ga_fit"]),
                int(row["path_found_abc"]), int(row["path_found_ga"]),
            ])


def load_records_csv(path: str | Path) -> list[dict]:
    rows = []
    with open(path, newline="") as handle:
        for entry in csv.DictReader(handle):
            rows.append({
                "n": int(entry["n"]),
                "seed": int(entry["seed"]),
                "mode": entry["mode"],
                "n_selected": int(entry["n_selected"]),
                "abc_hops": int(entry["abc_hops"]),
                "ga_hops": int(entry["ga_hops"]),
                "abc_conv": int(entry["abc_conv"]),
                "ga_conv": int(entry["ga_conv"]),
                "abc_fit": float(entry["abc_fit"]),
                "ga_fit": float(entry["ga_fit"]),
                "path_found_abc": bool(int(entry["path_found_abc"])),
                "path_found_ga": bool(int(entry["path_found_ga"])),
            })
    return rows


def summary_to_dict(summary: SuiteSummary) -> dict:
    return {
        "mode": summary.mode,
        "quality": {
            "ga_better": summary.ga_better,
            "equal": summary.equal,
            "abc_better": summary.abc_better,
            "compared_trials": summary.compared_trials,
        },
        "per_n": {
            str(n): {
                "trials": s.trials,
                "path_found_abc": s.path_found_abc,
                "path_found_ga": s.path_found_ga,
                "abc_median_hops": s.abc_median_hops,
                "ga_median_hops": s.ga_median_hops,
                "abc_median_conv": s.abc_median_conv,
                "ga_median_conv": s.ga_median_conv,
                "convergence_ratio": s.convergence_ratio,
            }
            for n, s in sorted(summary.per_n.items())
        },
    }


def save_summary_json(summary: SuiteSummary, path: str | Path) -> None:
    Path(path).write_text(json.dumps(summary_to_dict(summary), indent=2, sort_keys=True) + "\n")


PLOT_KINDS = ("traffic-intensity", "throughput")


def emit_plot_data(records: list[TrialRecord], kind: str, *,
                   packet_size_bits: int = 1600,
                   link_capacity_mbps: float = 30.0,
                   flow_rate_mbps: float = 1.0) -> list[tuple]:
    """Plot-ready rows (n, seed, algo, cycle, value), one per algorithm per trial.

    ``throughput`` reports the best path's bottleneck bandwidth in Mbps at its
    convergence cycle; ``traffic-intensity`` reports packet size times the
    bottleneck link's flow count over its available bandwidth.  Algorithms
    that found no path (or whose bottleneck is fully saturated) contribute no
    row.  Rows are sorted by (n, seed, algo, cycle).
    """
    if not records:
        raise ValueError("no records to plot")
    if kind not in PLOT_KINDS:
        raise ValueError(f"kind must be one of {PLOT_KINDS}")
    rows = []
    for record in records:
        for algo, result in (("abc", record.abc), ("ga", record.ga)):
            if not result.found:
                continue
            bottleneck = result.best_fitness.bottleneck_bw
            if kind == "throughput":
                value = bottleneck
            else:
                if bottleneck <= 0:
                    continue
                flows = (link_capacity_mbps - bottleneck) / flow_rate_mbps
                value = traffic_intensity(packet_size_bits, flows, bottleneck * 1e6)
            rows.append((record.n_total, record.seed, algo,
                         result.convergence_cycle, value))
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    return rows


def write_plot_csv(rows: list[tuple], path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(("n", "seed", "algo", "cycle", "value"))
        for n, seed, algo, cycle, value in rows:
            writer.writerow([n, seed, algo, cycle, repr(value)])
