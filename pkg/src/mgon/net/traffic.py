"""Request generation: static demand sets and Poisson dynamic traffic."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from mgon.net.rng import make_rng
from mgon.net.topology import Topology


@dataclass(frozen=True, slots=True)
class Request:
    id: int
    source: int
    destination: int
    demand: int
    arrival: float | None = None
    holding: float | None = None

    def __post_init__(self):
        if self.source == self.destination:
            raise ValueError(f"request {self.id}: source equals destination")
        if self.demand < 1:
            raise ValueError(f"request {self.id}: demand must be >= 1")

    @property
    def departure(self) -> float | None:
        if self.arrival is None or self.holding is None:
            return None
        return self.arrival + self.holding


@dataclass(frozen=True)
class TrafficSpec:
    """Traffic description.

    ``pattern`` is ``uniform``, ``degree`` (endpoint probability proportional to
    node degree) or ``explicit`` (``node_weights`` given). ``rate`` is the
    Poisson arrival rate; with unit mean holding time it equals the offered
    load in Erlangs.
    """

    sizes: tuple[int, ...] = (1,)
    probs: tuple[float, ...] = (1.0,)
    pattern: str = "uniform"
    rate: float = 1.0
    holding_mean: float = 1.0
    node_weights: tuple[float, ...] | None = field(default=None)

    def __post_init__(self):
        if len(self.sizes) != len(self.probs) or not self.sizes:
            raise ValueError("sizes and probs must be non-empty and aligned")
        if any(b < 1 for b in self.sizes):
            raise ValueError("sizes must be >= 1")
        if abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise ValueError("size probabilities must sum to 1")
        if self.rate <= 0:
            raise ValueError("arrival rate must be positive")
        if self.pattern not in ("uniform", "degree", "explicit"):
            raise ValueError(f"unknown traffic pattern {self.pattern!r}")
        if self.pattern == "explicit":
            if self.node_weights is None:
                raise ValueError("explicit pattern needs node_weights")
            if abs(math.fsum(self.node_weights) - 1.0) > 1e-12:
                raise ValueError("node weights must sum to 1")

    def node_probabilities(self, topology: Topology | int) -> np.ndarray:
        n = topology if isinstance(topology, int) else topology.node_count
        if self.pattern == "uniform":
            return np.full(n, 1.0 / n)
        if self.pattern == "explicit":
            w = np.asarray(self.node_weights, dtype=float)
            if len(w) != n:
                raise ValueError("node_weights length differs from node count")
            return w
        if isinstance(topology, int):
            raise ValueError("degree pattern needs a topology")
        deg = np.array([topology.degree(v) for v in range(n)], dtype=float)
        return deg / deg.sum()

    @property
    def mean_size(self) -> float:
        return float(np.dot(self.sizes, self.probs))


def _endpoints(rng: np.random.Generator, u: np.ndarray, count: int) -> tuple[np.ndarray, np.ndarray]:
    n = len(u)
    src = rng.choice(n, size=count, p=u)
    dst = rng.choice(n, size=count, p=u)
    clash = np.flatnonzero(src == dst)
    while clash.size:
        dst[clash] = rng.choice(n, size=clash.size, p=u)
        clash = clash[src[clash] == dst[clash]]
    return src, dst


def generate_requests(
    spec: TrafficSpec,
    count: int,
    seed: int,
    nodes: Topology | int,
    dynamic: bool = False,
) -> list[Request]:
    """Draw ``count`` requests. Dynamic mode adds Poisson arrivals and exponential holding."""
    if count <= 0:
        return []
    rng = make_rng(seed, "traffic")
    u = spec.node_probabilities(nodes)
    src, dst = _endpoints(rng, u, count)
    sizes = np.asarray(spec.sizes)[rng.choice(len(spec.sizes), size=count, p=spec.probs)]
    if not dynamic:
        return [
            Request(i, int(s), int(d), int(b)) for i, (s, d, b) in enumerate(zip(src, dst, sizes))
        ]
    arrivals = np.cumsum(rng.exponential(1.0 / spec.rate, size=count))
    holding = rng.exponential(spec.holding_mean, size=count)
    return [
        Request(i, int(s), int(d), int(b), float(a), float(h))
        for i, (s, d, b, a, h) in enumerate(zip(src, dst, sizes, arrivals, holding))
    ]


def all_pairs(node_count: int, demand: int = 1) -> list[Request]:
    """One request per unordered node pair (source < destination)."""
    out = []
    for s in range(node_count):
        for d in range(s + 1, node_count):
            out.append(Request(len(out), s, d, demand))
    return out


def sizes_of(requests: Sequence[Request]) -> int:
    return sum(r.demand for r in requests)
