"""Fixed-route first-fit baselines (SPFF / KSPFF) with FLEX reachability filtering."""

from __future__ import annotations

from typing import Sequence

from mgon.net.spectrum import SpectrumState, iter_bits, range_mask
from mgon.net.traffic import Request
from mgon.rfbsa.core import Banding, Lightpath, RouteResult


def _allowed(state: SpectrumState, banding: Banding, v: int, fin: int, fout: int) -> bool:
    if not banding.is_flex(v):
        return True
    return state.has_band(v, fin, fout) or state.band_count(v, fin) < banding.B


def _chain(state: SpectrumState, banding: Banding, nodes, links, start: int, stop: int):
    """Lowest-id fiber chain with ``[start, stop)`` free, after pruning dead ends.

    Works backwards so every kept fiber can still reach the destination,
    then picks the first fit fiber link by link.
    """
    m = range_mask(start, stop)
    occ = state.occupancy
    topo = state.topology
    free = [[f for f in topo.links[l].fiber_ids if not occ[f] & m] for l in links]
    live = [None] * len(links)
    live[-1] = free[-1]
    for i in range(len(links) - 2, -1, -1):
        v = nodes[i + 1]
        nxt = live[i + 1]
        live[i] = [f for f in free[i] if any(_allowed(state, banding, v, f, g) for g in nxt)]
        if not live[i]:
            return None
    if not live[0]:
        return None
    chain = [live[0][0]]
    for i in range(1, len(links)):
        v = nodes[i]
        chain.append(next(g for g in live[i] if _allowed(state, banding, v, chain[-1], g)))
    return chain


def spff_route(
    request: Request,
    state: SpectrumState,
    paths: Sequence[Sequence[int]],
    banding: Banding | None = None,
) -> RouteResult:
    """First path (in order) with a feasible window; lowest window, first-fit fibers."""
    banding = banding or Banding.conv()
    topo = state.topology
    w = request.demand
    for p in paths:
        links = topo.path_links(p)
        starts = state.path_window_starts(links, w)
        for start in iter_bits(starts):
            chain = _chain(state, banding, p, links, start, start + w)
            if chain is None:
                continue
            bands = tuple(
                (p[i + 1], chain[i], chain[i + 1])
                for i in range(len(chain) - 1)
                if banding.is_flex(p[i + 1])
            )
            lp = Lightpath(request.id, tuple(p), tuple(chain), start, start + w, 0.0, bands)
            return RouteResult(lp)
    return RouteResult(None)
