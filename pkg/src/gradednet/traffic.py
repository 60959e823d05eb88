"""Fluid link-load dynamics and bandwidth accounting.

A link carries an integer-ish number of flows, treated as a fluid quantity.
Flows arrive at rate ``gamma`` (flows/sec) and each active flow departs at
rate ``mu``, so the load relaxes exponentially from its initial value toward
the steady state ``gamma / mu``.  Bandwidth consumed scales linearly with the
number of flows; whatever is left of the link capacity is the available
bandwidth that grading and path fitness care about.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CongestedLinkError


@dataclass
class LinkState:
    """Load state of one link.

    t0:    flows routed across the link at time 0
    gamma: flow arrival rate, flows/sec
    mu:    flow service rate, 1/mean flow duration
    """

    t0: float = 0.0
    gamma: float = 0.0
    mu: float = 1.0

    def __post_init__(self) -> None:
        if self.mu <= 0:
            raise ValueError(f"service rate must be positive, got {self.mu}")
        if self.t0 < 0:
            raise ValueError(f"initial load must be nonnegative, got {self.t0}")
        if self.gamma < 0:
            raise ValueError(f"arrival rate must be nonnegative, got {self.gamma}")

    @classmethod
    def idle(cls) -> "LinkState":
        return cls(0.0, 0.0, 1.0)


@dataclass
class TrafficParams:
    """Fixed per-run traffic constants."""

    packet_size_bytes: int = 200
    link_capacity_mbps: float = 30.0
    refresh_period_s: float = 30.0

    def __post_init__(self) -> None:
        if self.packet_size_bytes <= 0:
            raise ValueError("packet size must be positive")
        if self.link_capacity_mbps <= 0:
            raise ValueError("link capacity must be positive")
        if self.refresh_period_s <= 0:
            raise ValueError("refresh period must be positive")

    @property
    def packet_size_bits(self) -> int:
        return self.packet_size_bytes * 8


@dataclass
class ArrivalModel:
    """External Poisson job arrivals at one node, routed to its neighbors.

    ``routing_probs[j]`` is the probability that an arriving job is handed to
    the j-th neighbor; the vector must sum to 1.
    """

    alpha: float
    routing_probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise ValueError(f"arrival rate alpha must be positive, got {self.alpha}")
        self.routing_probs = tuple(float(p) for p in self.routing_probs)
        if not self.routing_probs:
            raise ValueError("routing probability vector must not be empty")
        if any(p < 0 for p in self.routing_probs):
            raise ValueError("routing probabilities must be nonnegative")
        if abs(sum(self.routing_probs) - 1.0) > 1e-9:
            raise ValueError(f"routing probabilities must sum to 1, got {sum(self.routing_probs)}")


def link_load_at(state: LinkState, t: float) -> float:
    """Load on a link after ``t`` seconds of exponential relaxation.

    Closed form of dT/dt = gamma - mu*T starting from ``state.t0``:
    T(t) = t0*exp(-mu*t) + (gamma/mu)*(1 - exp(-mu*t)).
    """
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    decay = math.exp(-state.mu * t)
    return state.t0 * decay + (state.gamma / state.mu) * (1.0 - decay)


def load_derivative(state: LinkState, load: float) -> float:
    """Instantaneous rate of change of the link load: arrivals minus departures."""
    return state.gamma - state.mu * load


def available_bandwidth(capacity_mbps: float, load_fraction: float) -> float:
    """Bandwidth still free on a link whose load consumes ``load_fraction`` of it."""
    if capacity_mbps <= 0:
        raise ValueError("capacity must be positive")
    if not 0.0 <= load_fraction <= 1.0:
        raise ValueError(f"load fraction must be in [0, 1], got {load_fraction}")
    return capacity_mbps * (1.0 - load_fraction)


def load_fraction(state: LinkState, capacity_mbps: float, *,
                  flow_rate_mbps: float = 1.0, at_time: float = 0.0) -> float:
    """Fraction of a link's capacity consumed by its flows at ``at_time``.

    Each flow consumes ``flow_rate_mbps``; the fraction is clamped to [0, 1]
    so an overloaded link reads as fully saturated rather than above capacity.
    """
    if capacity_mbps <= 0:
        raise ValueError("capacity must be positive")
    if flow_rate_mbps <= 0:
        raise ValueError("flow rate must be positive")
    consumed = link_load_at(state, at_time) * flow_rate_mbps
    return min(1.0, max(0.0, consumed / capacity_mbps))


def traffic_intensity(packet_size_bits: int, load: float, available_bps: float) -> float:
    """Dimensionless intensity: packet size times load over available bandwidth."""
    if packet_size_bits <= 0:
        raise ValueError("packet size must be positive")
    if load < 0:
        raise ValueError("load must be nonnegative")
    if available_bps <= 0:
        raise CongestedLinkError(
            f"no available bandwidth ({available_bps} bps), intensity undefined")
    return packet_size_bits * load / available_bps


def sample_poisson_arrivals(model: ArrivalModel, horizon: float,
                            rng: np.random.Generator) -> np.ndarray:
    """Sample one window of external arrivals and route them to neighbors.

    Returns per-neighbor arrival counts aligned with ``model.routing_probs``.
    The total count is Poisson(alpha * horizon); each arrival picks a
    neighbor independently.
    """
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if not model.routing_probs:
        raise ValueError("routing probability vector must not be empty")
    total = int(rng.poisson(model.alpha * horizon))
    probs = np.asarray(model.routing_probs, dtype=float)
    probs = probs / probs.sum()
    return rng.multinomial(total, probs)


def refresh_schedule(params: TrafficParams, sim_time: float) -> bool:
    """True exactly when ``sim_time`` sits on a positive multiple of the refresh period."""
    period = params.refresh_period_s
    k = round(sim_time / period)
    if k < 1:
        return False
    return math.isclose(sim_time, k * period, rel_tol=1e-9, abs_tol=1e-9)


def sample_link_states(n_links: int, rng: np.random.Generator, *,
                       capacity_mbps: float = 30.0, flow_rate_mbps: float = 1.0,
                       mu: float = 1.0) -> list[LinkState]:
    """Draw an initial load state for every link in a topology.

    Initial loads and arrival rates are uniform over the range a link can
    actually carry, so free fractions spread across [0, 1] and bottleneck
    comparisons between paths are informative.
    """
    if n_links < 0:
        raise ValueError("link count must be nonnegative")
    max_flows = capacity_mbps / flow_rate_mbps
    t0s = rng.uniform(0.0, max_flows, n_links)
    gammas = rng.uniform(0.0, max_flows * mu, n_links)
    return [LinkState(t0=float(t), gamma=float(g), mu=mu) for t, g in zip(t0s, gammas)]
