"""Bee-colony and genetic path search over a graded subgraph.

Both searches share one solution encoding (a full simple path from source to
destination) and one fitness (the path's bottleneck: the minimum available
bandwidth over its links).  The subgraph they explore is the set of graded
candidate nodes in the destination's quadrant, plus the source.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable

from .grading import KnowledgeBase
from .topology import Topology

PathNodes = tuple[int, ...]
Observer = Callable[[str, PathNodes], None]

WALK_RESTARTS = 50
REGROW_RETRIES = 10
REPAIR_ATTEMPTS = 3


@dataclass(frozen=True)
class Fitness:
    """Bottleneck bandwidth of a path, Mbps; zero only when some link is saturated."""

    bottleneck_bw: float


@dataclass
class AbcConfig:
    """Colony controls.  colony_size=None derives the onlooker count from the
    source's neighborhood inside the subgraph (floor 2); limit=None defaults
    to 5x the colony size."""

    colony_size: int | None = None
    max_cycles: int = 30
    limit: int | float | None = None

    def __post_init__(self) -> None:
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be >= 1")
        if self.colony_size is not None and self.colony_size < 1:
            raise ValueError("colony_size must be >= 1")
        if self.limit is not None and self.limit < 1:
            raise ValueError("limit must be >= 1")


@dataclass
class GaConfig:
    population_size: int = 15
    generations: int = 30
    mutation_rate: float = 0.001

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must be in [0, 1]")


@dataclass
class FoodSource:
    path: PathNodes
    fitness: Fitness | None
    trials: int = 0


@dataclass
class RouteResult:
    """Outcome of one search: best path, its fitness, and the convergence trace."""

    best_path: PathNodes | None
    best_fitness: Fitness
    hop_count: int
    convergence_cycle: int
    fitness_trace: tuple[float, ...]
    stagnation_cycle: int | None = None

    @property
    def found(self) -> bool:
        return self.best_path is not None


class Subgraph:
    """Adjacency restricted to the allowed candidate set (plus the source)."""

    def __init__(self, topology: Topology, allowed: frozenset[int]):
        self.topology = topology
        self.allowed = allowed
        self.adj: dict[int, tuple[int, ...]] = {
            v: tuple(sorted(topology.adjacency[v] & allowed)) for v in sorted(allowed)
        }

    @classmethod
    def from_topology(cls, topology: Topology, candidates: set[int], source: int) -> "Subgraph":
        return cls(topology, frozenset(candidates) | frozenset((source,)))

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj.get(v, ())


def path_is_valid(path: PathNodes, subgraph: Subgraph, source: int, destination: int) -> bool:
    """Check every path invariant: endpoints, simplicity, adjacency, membership."""
    if len(path) < 2 or path[0] != source or path[-1] != destination:
        return False
    if len(set(path)) != len(path):
        return False
    for v in path:
        if v not in subgraph.allowed:
            return False
    for u, v in zip(path, path[1:]):
        if v not in subgraph.adj.get(u, ()):
            return False
    return True


def _walk(subgraph: Subgraph, start: int, destination: int,
          forbidden: set[int], rng: random.Random) -> PathNodes | None:
    # One uniform random walk over unvisited allowed neighbors; None on dead end.
    path = [start]
    visited = set(forbidden)
    visited.add(start)
    cur = start
    while cur != destination:
        choices = [v for v in subgraph.neighbors(cur) if v not in visited]
        if not choices:
            return None
        cur = choices[rng.randrange(len(choices))]
        path.append(cur)
        visited.add(cur)
    return tuple(path)


def random_path(subgraph: Subgraph, source: int, destination: int,
                rng: random.Random, restarts: int = WALK_RESTARTS) -> PathNodes | None:
    """Scout move: seeded random walks until one reaches the destination.

    Returns None after ``restarts`` dead ends; absence of a path is a value,
    not an error.
    """
    if source not in subgraph.allowed or destination not in subgraph.allowed:
        return None
    for _ in range(restarts):
        found = _walk(subgraph, source, destination, set(), rng)
        if found is not None:
            return found
    return None


def neighbor_path(path: PathNodes, subgraph: Subgraph, rng: random.Random,
                  retries: int = REGROW_RETRIES) -> PathNodes:
    """Perturb a path: keep a random prefix, regrow the suffix to the destination.

    The cut point is any node except the destination; the regrown suffix
    avoids the kept prefix.  If no regrowth succeeds the original path is
    returned unchanged.
    """
    destination = path[-1]
    for _ in range(retries):
        cut = rng.randrange(len(path) - 1)
        prefix = path[:cut + 1]
        tail = _walk(subgraph, path[cut], destination, set(prefix[:-1]), rng)
        if tail is not None:
            return prefix + tail[1:]
    return path


def path_fitness(path: PathNodes, topology: Topology, kb: KnowledgeBase,
                 bw_threshold: float = 0.0) -> Fitness | None:
    """Bottleneck available bandwidth of a path, or None when rejected.

    A path is rejected when any of its links offers less than
    ``bw_threshold`` Mbps; rejected paths do not participate in routing.
    """
    if len(path) < 2 or len(set(path)) != len(path):
        raise ValueError(f"malformed path {path}")
    bottleneck = math.inf
    for u, v in zip(path, path[1:]):
        if topology.link_between(u, v) is None:
            raise ValueError(f"path uses nonexistent link ({u}, {v})")
        bottleneck = min(bottleneck, kb.available_on(u, v))
    if bottleneck < bw_threshold:
        return None
    return Fitness(bottleneck)


def roulette_select(weights: list[float] | tuple[float, ...], rng: random.Random) -> int:
    """Fitness-proportional index selection; uniform when all weights are zero."""
    if len(weights) == 0:
        raise ValueError("weights must not be empty")
    if any(w < 0 for w in weights):
        raise ValueError("weights must be nonnegative")
    total = sum(weights)
    if total <= 0.0:
        return rng.randrange(len(weights))
    r = rng.random() * total
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if r < acc:
            return i
    return len(weights) - 1


def _excise_loops(path: PathNodes) -> PathNodes:
    # Remove any cycle between duplicate occurrences of a node.
    out: list[int] = []
    for node in path:
        if node in out:
            out = out[:out.index(node) + 1]
        else:
            out.append(node)
    return tuple(out)


def modified_crossover(parent_a: PathNodes, parent_b: PathNodes,
                       rng: random.Random) -> tuple[PathNodes, PathNodes]:
    """Exchange suffixes at a shared intermediate node; repair loops by excision.

    Parents without a shared intermediate node are returned unchanged.
    """
    if parent_a[0] != parent_b[0] or parent_a[-1] != parent_b[-1]:
        raise ValueError("parents must share source and destination")
    shared = sorted(set(parent_a[1:-1]) & set(parent_b[1:-1]))
    if not shared:
        return parent_a, parent_b
    pivot = shared[rng.randrange(len(shared))]
    ia = parent_a.index(pivot)
    ib = parent_b.index(pivot)
    child_a = _excise_loops(parent_a[:ia + 1] + parent_b[ib + 1:])
    child_b = _excise_loops(parent_b[:ib + 1] + parent_a[ia + 1:])
    return child_a, child_b


def _fitness_value(fitness: Fitness | None) -> float:
    # Rejected paths rank below any accepted path, including saturated ones.
    return fitness.bottleneck_bw if fitness is not None else -1.0


def _weight(fitness: Fitness | None) -> float:
    return max(_fitness_value(fitness), 0.0)


class _BestTracker:
    """Best-so-far across every accepted candidate; trace is nondecreasing."""

    def __init__(self) -> None:
        self.path: PathNodes | None = None
        self.fitness: Fitness | None = None
        self.trace: list[float] = []

    def offer(self, path: PathNodes | None, fitness: Fitness | None) -> None:
        if path is None or fitness is None:
            return
        if self.fitness is None or fitness.bottleneck_bw > self.fitness.bottleneck_bw:
            self.path = path
            self.fitness = fitness

    def record_cycle(self) -> None:
        self.trace.append(self.fitness.bottleneck_bw if self.fitness else 0.0)

    def result(self) -> RouteResult:
        trace = tuple(self.trace) if self.trace else (0.0,)
        final = trace[-1]
        convergence = next(i for i, v in enumerate(trace) if v == final)
        stagnation = next(
            (i for i in range(5, len(trace)) if trace[i] == trace[i - 5]), None)
        if self.path is None:
            return RouteResult(None, Fitness(0.0), 0, convergence, trace, stagnation)
        return RouteResult(
            best_path=self.path,
            best_fitness=self.fitness,
            hop_count=len(self.path) - 1,
            convergence_cycle=convergence,
            fitness_trace=trace,
            stagnation_cycle=stagnation,
        )


def _empty_result() -> RouteResult:
    return RouteResult(None, Fitness(0.0), 0, 0, (0.0,), None)


def abc_search(subgraph: Subgraph, source: int, destination: int,
               cfg: AbcConfig, kb: KnowledgeBase, rng: random.Random, *,
               bw_threshold: float = 0.0,
               observer: Observer | None = None) -> RouteResult:
    """Artificial-bee-colony search for the max-bottleneck path.

    Employed bees perturb each food source and greedily keep improvements;
    onlookers reinforce sources in proportion to their nectar (bottleneck
    bandwidth); sources stuck for ``limit`` trials are abandoned to scouts.
    The best source ever seen is remembered across cycles.
    """
    if source == destination:
        raise ValueError("source and destination must differ")
    if destination not in subgraph.allowed:
        return _empty_result()

    topology = subgraph.topology
    colony = cfg.colony_size
    if colony is None:
        colony = max(2, len(subgraph.neighbors(source)))
    limit = cfg.limit if cfg.limit is not None else colony * 5

    def evaluate(path: PathNodes) -> Fitness | None:
        return path_fitness(path, topology, kb, bw_threshold)

    def notify(kind: str, path: PathNodes | None) -> None:
        if observer is not None and path is not None:
            observer(kind, path)

    best = _BestTracker()
    sources: list[FoodSource] = []
    for _ in range(colony):
        path = random_path(subgraph, source, destination, rng)
        notify("init", path)
        if path is None:
            continue
        fit = evaluate(path)
        sources.append(FoodSource(path, fit))
        best.offer(path, fit)
    if not sources:
        return _empty_result()
    best.record_cycle()  # cycle 0: state after initialization

    for _ in range(cfg.max_cycles):
        # Employed phase: one perturbation per source, greedy acceptance.
        for src in sources:
            candidate = neighbor_path(src.path, subgraph, rng)
            notify("employed", candidate)
            fit = evaluate(candidate)
            if _fitness_value(fit) > _fitness_value(src.fitness):
                src.path, src.fitness, src.trials = candidate, fit, 0
            else:
                src.trials += 1
            best.offer(candidate, fit)

        # Onlooker phase: fitness-proportional reinforcement.
        for _ in range(colony):
            weights = [_weight(src.fitness) for src in sources]
            chosen = sources[roulette_select(weights, rng)]
            candidate = neighbor_path(chosen.path, subgraph, rng)
            notify("onlooker", candidate)
            fit = evaluate(candidate)
            if _fitness_value(fit) > _fitness_value(chosen.fitness):
                chosen.path, chosen.fitness, chosen.trials = candidate, fit, 0
            else:
                chosen.trials += 1
            best.offer(candidate, fit)

        # Scout phase: abandon exhausted sources.
        for src in sources:
            if src.trials >= limit:
                fresh = random_path(subgraph, source, destination, rng)
                notify("scout", fresh)
                if fresh is not None:
                    src.path = fresh
                    src.fitness = evaluate(fresh)
                    best.offer(fresh, src.fitness)
                src.trials = 0

        best.record_cycle()

    return best.result()


def ga_search(subgraph: Subgraph, source: int, destination: int,
              cfg: GaConfig, kb: KnowledgeBase, rng: random.Random, *,
              bw_threshold: float = 0.0,
              observer: Observer | None = None) -> RouteResult:
    """Genetic search: roulette selection, shared-node crossover, suffix-regrow mutation."""
    if source == destination:
        raise ValueError("source and destination must differ")
    if destination not in subgraph.allowed:
        return _empty_result()

    topology = subgraph.topology

    def evaluate(path: PathNodes) -> Fitness | None:
        return path_fitness(path, topology, kb, bw_threshold)

    def notify(kind: str, path: PathNodes | None) -> None:
        if observer is not None and path is not None:
            observer(kind, path)

    def mutate(path: PathNodes) -> PathNodes:
        # Per intermediate gene: with probability mutation_rate, regrow the
        # suffix from that gene's predecessor (at most one regrowth per pass;
        # a point swap would almost always break adjacency).
        if cfg.mutation_rate <= 0.0 or len(path) <= 2:
            return path
        for i in range(1, len(path) - 1):
            if rng.random() < cfg.mutation_rate:
                prefix = path[:i]
                tail = _walk(subgraph, path[i - 1], destination, set(prefix[:-1]), rng)
                if tail is not None:
                    return prefix + tail[1:]
                return path
        return path

    best = _BestTracker()
    population: list[PathNodes] = []
    for _ in range(cfg.population_size):
        path = random_path(subgraph, source, destination, rng)
        notify("init", path)
        if path is None:
            continue
        population.append(path)
        best.offer(path, evaluate(path))
    if not population:
        return _empty_result()
    best.record_cycle()  # generation 0: initial population

    for _ in range(cfg.generations):
        fitnesses = [evaluate(p) for p in population]
        weights = [_weight(f) for f in fitnesses]
        offspring: list[PathNodes] = []
        while len(offspring) < len(population):
            pa = population[roulette_select(weights, rng)]
            pb = population[roulette_select(weights, rng)]
            for child in modified_crossover(pa, pb, rng):
                child = mutate(child)
                # Infeasible offspring (malformed, or bottleneck below the
                # bandwidth threshold) are repaired and, failing that,
                # replaced by a fresh scout path.
                repairs = 0
                while repairs < REPAIR_ATTEMPTS and not path_is_valid(
                        child, subgraph, source, destination):
                    child = _excise_loops(child)
                    repairs += 1
                fit = None
                if path_is_valid(child, subgraph, source, destination):
                    fit = evaluate(child)
                if fit is None:
                    # Replacement paths should themselves be feasible, else
                    # they get zero selection weight and never breed.
                    replacement = None
                    for _ in range(REPAIR_ATTEMPTS):
                        fresh = random_path(subgraph, source, destination, rng)
                        if fresh is None:
                            break
                        replacement = fresh
                        fit = evaluate(fresh)
                        if fit is not None:
                            break
                    child = replacement if replacement is not None else pa
                    if fit is None:
                        fit = evaluate(child)
                notify("offspring", child)
                best.offer(child, fit)
                offspring.append(child)
                if len(offspring) >= len(population):
                    break
        population = offspring
        best.record_cycle()

    return best.result()
