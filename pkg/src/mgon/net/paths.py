"""Hop-count shortest paths with deterministic ordering."""

from __future__ import annotations

from functools import lru_cache
from itertools import islice

import networkx as nx

from mgon.net.topology import Topology


@lru_cache(maxsize=64)
def _graph(topology: Topology) -> nx.DiGraph:
    return topology.to_networkx()


def k_shortest_paths(topology: Topology, s: int, d: int, k: int) -> list[tuple[int, ...]]:
    """Up to ``k`` loopless paths by hop count; equal-length paths ordered lexicographically."""
    return list(_k_shortest(topology, s, d, k))


@lru_cache(maxsize=1 << 16)
def _k_shortest(topology: Topology, s: int, d: int, k: int) -> tuple[tuple[int, ...], ...]:
    g = _graph(topology)
    try:
        gen = nx.shortest_simple_paths(g, s, d)
        # pull a few extra so that ties at the cut are resolved lexicographically
        raw = [tuple(p) for p in islice(gen, k + 8)]
    except nx.NetworkXNoPath:
        return ()
    raw.sort(key=lambda p: (len(p), p))
    return tuple(raw[:k])


def shortest_path(topology: Topology, s: int, d: int) -> tuple[int, ...]:
    paths = k_shortest_paths(topology, s, d, 1)
    if not paths:
        raise nx.NetworkXNoPath(f"no path {s}->{d}")
    return paths[0]


def path_hops(path: tuple[int, ...]) -> int:
    return len(path) - 1
