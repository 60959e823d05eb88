"""Run configuration: one flat, serializable document shared by all commands."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .grading import SELECTION_MODES, GradingConfig
from .optimizers import AbcConfig, GaConfig
from .traffic import TrafficParams

DEFAULT_NODE_COUNTS = (15, 16, 32, 64, 128, 256, 512, 1024)


@dataclass
class RunConfig:
    """Every knob of a run.  Defaults follow the benchmark's initial parameters
    (200-byte packets, 30 Mbps links, 30 cycles, roulette GA with 0.1% mutation)."""

    n: int = 15
    node_counts: tuple[int, ...] = DEFAULT_NODE_COUNTS
    seeds_per_n: int = 5
    seed: int = 42
    link_density: float = 0.2

    packet_size_bytes: int = 200
    max_bandwidth_mbps: float = 30.0
    flow_rate_mbps: float = 1.0
    mu: float = 1.0
    alpha: float = 1.0
    arrival_horizon_s: float = 1.0
    refresh_period_s: float = 30.0
    grade_time_s: float = 0.0

    # these thresholds keep roughly 60% of nodes, in line with the reference
    # selection counts at desk scale
    density_threshold: int = 5
    lifetime_threshold: float = 35.0
    lifetime_scale: float = 100.0
    resource_prob: float = 0.9
    congestion_threshold: float = 0.25
    delay_multiplier: float = 5.0
    bw_threshold_mbps: float = 4.5
    selection_mode: str = "best-classes"

    # A large colony exhausts the pruned quadrant subgraph within the first
    # few cycles; None derives the size from the source's neighborhood.
    colony_size: int | None = 100
    max_cycles: int = 30
    abc_limit: int | None = None
    population_size: int = 15
    generations: int = 30
    mutation_rate: float = 0.001

    out_dir: str = "out"

    def __post_init__(self) -> None:
        self.node_counts = tuple(int(v) for v in self.node_counts)
        if self.selection_mode not in SELECTION_MODES:
            raise ValueError(f"selection_mode must be one of {SELECTION_MODES}")
        if self.seeds_per_n < 1:
            raise ValueError("seeds_per_n must be >= 1")

    def abc_config(self) -> AbcConfig:
        return AbcConfig(colony_size=self.colony_size, max_cycles=self.max_cycles,
                         limit=self.abc_limit)

    def ga_config(self) -> GaConfig:
        return GaConfig(population_size=self.population_size,
                        generations=self.generations,
                        mutation_rate=self.mutation_rate)

    def grading_config(self) -> GradingConfig:
        return GradingConfig(
            density_threshold=self.density_threshold,
            lifetime_threshold=self.lifetime_threshold,
            lifetime_scale=self.lifetime_scale,
            resource_prob=self.resource_prob,
            congestion_threshold=self.congestion_threshold,
            delay_multiplier=self.delay_multiplier,
            alpha=self.alpha,
            arrival_horizon_s=self.arrival_horizon_s,
            flow_rate_mbps=self.flow_rate_mbps,
            grade_time_s=self.grade_time_s,
            refresh_period_s=self.refresh_period_s,
        )

    def traffic_params(self) -> TrafficParams:
        return TrafficParams(packet_size_bytes=self.packet_size_bytes,
                             link_capacity_mbps=self.max_bandwidth_mbps,
                             refresh_period_s=self.refresh_period_s)

    def to_dict(self) -> dict:
        doc = dataclasses.asdict(self)
        doc["node_counts"] = list(self.node_counts)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def replace(self, **overrides) -> "RunConfig":
        return dataclasses.replace(self, **overrides)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
