"""Exhaustive minimum-MSU assignment for tiny static instances."""

from __future__ import annotations

import itertools
from typing import Sequence

import networkx as nx

from mgon.net.spectrum import SpectrumState, range_mask
from mgon.net.topology import Topology
from mgon.net.traffic import Request
from mgon.rfbsa.core import Banding


class OracleTooLarge(ValueError):
    pass


def _options(topology: Topology, req: Request, max_hops: int):
    g = topology.to_networkx()
    out = []
    for p in nx.all_simple_paths(g, req.source, req.destination, cutoff=max_hops):
        links = topology.path_links(p)
        for fibers in itertools.product(*(topology.links[l].fiber_ids for l in links)):
            out.append((tuple(p), fibers))
    return out


def exhaustive_min_msu(
    topology: Topology,
    requests: Sequence[Request],
    banding: Banding,
    max_msu: int = 24,
    max_hops: int | None = None,
) -> int:
    """Smallest MSU over every joint choice of route, fibers and window.

    Iterative deepening on the MSU bound M: a DFS places requests (largest
    first) on windows ending at or before M and backtracks on conflicts or
    band overflow.
    """
    if len(requests) > 8:
        raise OracleTooLarge("at most 8 requests")
    hops = max_hops if max_hops is not None else topology.node_count - 1
    reqs = sorted(requests, key=lambda r: -r.demand)
    opts = [_options(topology, r, hops) for r in reqs]
    lower = max((r.demand for r in reqs), default=0)
    for M in range(lower, max_msu + 1):
        state = SpectrumState(topology, M)
        if _place(state, reqs, opts, 0, banding, M):
            return M
    raise OracleTooLarge(f"no assignment within MSU {max_msu}")


def _place(state, reqs, opts, i, banding, M) -> bool:
    if i == len(reqs):
        return True
    w = reqs[i].demand
    occ = state.occupancy
    for nodes, fibers in opts[i]:
        bands = []
        ok = True
        for j in range(1, len(fibers)):
            v = nodes[j]
            if banding.is_flex(v):
                fin, fout = fibers[j - 1], fibers[j]
                if not state.has_band(v, fin, fout) and state.band_count(v, fin) >= banding.B:
                    ok = False
                    break
                bands.append((v, fin, fout))
        if not ok:
            continue
        for start in range(0, M - w + 1):
            m = range_mask(start, start + w)
            if any(occ[f] & m for f in fibers):
                continue
            key = ("oracle", i)
            state.allocate(key, [(f, start, start + w) for f in fibers], bands)
            if _place(state, reqs, opts, i + 1, banding, M):
                return True
            state.release(key)
    return False
