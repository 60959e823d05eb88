"""Random geometric topologies with a source-centered quadrant partition.

Nodes are scattered uniformly in the unit square and linked when they fall
within a connection radius derived from the requested link density (expected
degree ~ density * (n-1)).  Any node left isolated is attached to its nearest
neighbor so every node can participate in routing.  The plane around a chosen
source splits into four angular quadrants; only nodes sharing the
destination's quadrant are candidates for a route.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import CoincidentPointError
from .traffic import LinkState

DEFAULT_CAPACITY_MBPS = 30.0
DEFAULT_LIFETIME_SCALE = 100.0


class Quadrant(Enum):
    """One of the four angular sectors around a source node."""

    Q1 = 1
    Q2 = 2
    Q3 = 3
    Q4 = 4


@dataclass
class QosInputs:
    """Raw per-node QoS observations consumed by grading.

    network_lifetime:   remaining lifetime, abstract units
    node_density:       packets that arrived at the node in the last window
    resource_available: whether the node currently has resources to forward
    """

    network_lifetime: float
    node_density: int = 0
    resource_available: bool = True

    def __post_init__(self) -> None:
        if self.network_lifetime < 0:
            raise ValueError("network lifetime must be nonnegative")
        if self.node_density < 0:
            raise ValueError("node density must be nonnegative")


@dataclass
class Node:
    id: int
    x: float
    y: float
    qos: QosInputs

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass
class Link:
    """Undirected link between two nodes; load state is owned by the traffic model."""

    a: int
    b: int
    capacity_mbps: float
    state: LinkState = field(default_factory=LinkState.idle)

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise ValueError(f"self-loop on node {self.a}")
        if self.capacity_mbps <= 0:
            raise ValueError("link capacity must be positive")

    def key(self) -> tuple[int, int]:
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)


@dataclass
class Topology:
    """A generated network: nodes, undirected links, and derived adjacency."""

    seed: int
    nodes: list[Node]
    links: list[Link]
    adjacency: dict[int, frozenset[int]] = field(init=False, repr=False)
    _link_index: dict[tuple[int, int], int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        ids = [node.id for node in self.nodes]
        if ids != list(range(len(self.nodes))):
            raise ValueError("node ids must be dense 0..n-1 in order")
        for node in self.nodes:
            if not (0.0 <= node.x <= 1.0 and 0.0 <= node.y <= 1.0):
                raise ValueError(f"node {node.id} position outside the unit square")
        adj: dict[int, set[int]] = {i: set() for i in ids}
        index: dict[tuple[int, int], int] = {}
        for pos, link in enumerate(self.links):
            if link.a not in adj or link.b not in adj:
                raise ValueError(f"link ({link.a}, {link.b}) references unknown node")
            key = link.key()
            if key in index:
                raise ValueError(f"duplicate link {key}")
            index[key] = pos
            adj[link.a].add(link.b)
            adj[link.b].add(link.a)
        self.adjacency = {i: frozenset(members) for i, members in adj.items()}
        self._link_index = index

    @property
    def n(self) -> int:
        return len(self.nodes)

    def has_node(self, node: int) -> bool:
        return 0 <= node < len(self.nodes)

    def link_between(self, a: int, b: int) -> Link | None:
        key = (a, b) if a < b else (b, a)
        pos = self._link_index.get(key)
        return self.links[pos] if pos is not None else None


def generate_topology(n: int, link_density: float, seed: int, *,
                      capacity_mbps: float = DEFAULT_CAPACITY_MBPS,
                      lifetime_scale: float = DEFAULT_LIFETIME_SCALE) -> Topology:
    """Generate a seeded random geometric topology in the unit square.

    Pairs closer than ``sqrt(link_density / pi)`` are linked, which makes the
    expected degree track ``link_density * (n - 1)`` away from the borders.
    Isolated nodes are then attached to their nearest neighbor.  The same
    (n, link_density, seed) always yields the identical topology.
    """
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    if not 0.0 < link_density <= 1.0:
        raise ValueError(f"link density must be in (0, 1], got {link_density}")

    rng = np.random.default_rng(seed)
    points = rng.random((n, 2))
    lifetimes = rng.uniform(0.0, lifetime_scale, n)

    radius = math.sqrt(link_density / math.pi)
    diff = points[:, None, :] - points[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    within = dist2 <= radius * radius
    upper = np.triu(within, k=1)
    pairs = np.argwhere(upper)

    links = [Link(int(a), int(b), capacity_mbps) for a, b in pairs]
    degree = np.zeros(n, dtype=int)
    for link in links:
        degree[link.a] += 1
        degree[link.b] += 1

    # Attach every isolated node to its geometrically nearest peer.
    for i in range(n):
        if degree[i] > 0:
            continue
        d2 = dist2[i].copy()
        d2[i] = np.inf
        j = int(np.argmin(d2))
        links.append(Link(min(i, j), max(i, j), capacity_mbps))
        degree[i] += 1
        degree[j] += 1

    nodes = [
        Node(i, float(points[i, 0]), float(points[i, 1]),
             QosInputs(network_lifetime=float(lifetimes[i])))
        for i in range(n)
    ]
    return Topology(seed=seed, nodes=nodes, links=links)


def quadrant_of(source_pos: tuple[float, float], node_pos: tuple[float, float]) -> Quadrant:
    """Quadrant of ``node_pos`` relative to ``source_pos``.

    Angular intervals are half-open starting counter-clockwise from the
    positive x axis: [0, 90) -> Q1, [90, 180) -> Q2, [180, 270) -> Q3,
    [270, 360) -> Q4, so points on an axis belong to the quadrant that
    starts there.
    """
    dx = node_pos[0] - source_pos[0]
    dy = node_pos[1] - source_pos[1]
    if dx == 0.0 and dy == 0.0:
        raise CoincidentPointError("node coincides with the source; quadrant undefined")
    angle = math.degrees(math.atan2(dy, dx)) % 360.0
    if angle < 90.0:
        return Quadrant.Q1
    if angle < 180.0:
        return Quadrant.Q2
    if angle < 270.0:
        return Quadrant.Q3
    return Quadrant.Q4


def quadrant_candidates(topology: Topology, source: int, destination: int) -> set[int]:
    """Nodes sharing the destination's quadrant around ``source``.

    The source itself is excluded (it is always a route member); the
    destination is always included.  Nodes that happen to sit exactly on the
    source position cannot be classified and are skipped.
    """
    if not topology.has_node(source):
        raise ValueError(f"unknown source node {source}")
    if not topology.has_node(destination):
        raise ValueError(f"unknown destination node {destination}")
    if source == destination:
        raise ValueError("source and destination must differ")

    src_pos = topology.nodes[source].position
    target = quadrant_of(src_pos, topology.nodes[destination].position)
    members: set[int] = set()
    for node in topology.nodes:
        if node.id == source or node.position == src_pos:
            continue
        if quadrant_of(src_pos, node.position) is target:
            members.add(node.id)
    return members


def neighbors(topology: Topology, node: int) -> frozenset[int]:
    """Adjacency set of ``node``."""
    if not topology.has_node(node):
        raise ValueError(f"unknown node {node}")
    return topology.adjacency[node]


def topology_to_dict(topology: Topology) -> dict:
    return {
        "seed": topology.seed,
        "nodes": [
            {
                "id": node.id,
                "x": node.x,
                "y": node.y,
                "lifetime": node.qos.network_lifetime,
                "density": node.qos.node_density,
                "resource": node.qos.resource_available,
            }
            for node in topology.nodes
        ],
        "links": [
            {"a": link.a, "b": link.b, "capacity_mbps": link.capacity_mbps}
            for link in topology.links
        ],
    }


def topology_from_dict(doc: dict) -> Topology:
    nodes = [
        Node(
            int(entry["id"]), float(entry["x"]), float(entry["y"]),
            QosInputs(
                network_lifetime=float(entry["lifetime"]),
                node_density=int(entry["density"]),
                resource_available=bool(entry["resource"]),
            ),
        )
        for entry in doc["nodes"]
    ]
    links = [
        Link(int(entry["a"]), int(entry["b"]), float(entry["capacity_mbps"]))
        for entry in doc["links"]
    ]
    return Topology(seed=int(doc["seed"]), nodes=nodes, links=links)


def save_topology(topology: Topology, path: str | Path) -> None:
    Path(path).write_text(json.dumps(topology_to_dict(topology), indent=2, sort_keys=True) + "\n")


def load_topology(path: str | Path) -> Topology:
    return topology_from_dict(json.loads(Path(path).read_text()))
