"""Layered-graph routing, fiber, band and slot assignment.

Vertices are fibers seen from their head node (an input fiber of that
node). Relaxing a fiber ``fin`` at node ``v`` towards an output fiber ``fout``
combines the switching edge I(fin) -> O(fout) and the link edge
O(fout) -> I(fout) into one step of cost ``switch + beta * spectrum``.

One auxiliary graph is built per output fiber ``kappa`` of the source: it
keeps ``kappa`` as the only way out of the source and drops every fiber that
enters the source. A layered graph fixes the slot window ``[SI, SI + w)``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from mgon.net.spectrum import Assignment, SpectrumState, iter_bits, window_starts
from mgon.net.topology import Topology
from mgon.net.traffic import Request

INF = math.inf
VARIANTS = ("window", "normalized", "dynamic")


@dataclass(frozen=True)
class CostParams:
    """Cost weights. ``variant`` picks the cost family:

    ``window``  switching alpha*b, spectrum 1 or the window end index;
    ``normalized``  switching alpha*b/B, spectrum 1 or (end + 1 - m_f)/omega + 1;
    ``dynamic``  switching as normalized, spectrum SI on the source fiber and 1 elsewhere.
    ``omega`` defaults to the state's slot capacity.
    """

    alpha: float = 1.0
    beta: float = 1.0
    omega: float | None = None
    variant: str = "window"

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be >= 0")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.omega is not None and self.omega <= 0:
            raise ValueError("omega must be > 0")

    @classmethod
    def dynamic(cls, alpha: float = 100.0) -> "CostParams":
        return cls(alpha=alpha, beta=1.0, variant="dynamic")


@dataclass(frozen=True)
class Banding:
    """Which nodes are FLEX and their per-input-fiber band limit."""

    flex: frozenset[int] = frozenset()
    B: float = 4

    @classmethod
    def conv(cls) -> "Banding":
        return cls(frozenset(), INF)

    @classmethod
    def all_flex(cls, topology: Topology, B: float = 4) -> "Banding":
        return cls(frozenset(range(topology.node_count)), B)

    def is_flex(self, v: int) -> bool:
        return v in self.flex

    def over(self, topology: Topology) -> str:
        return "".join("F" if self.is_flex(v) else "C" for v in range(topology.node_count))


@dataclass(frozen=True)
class Lightpath:
    request: int
    nodes: tuple[int, ...]
    fibers: tuple[int, ...]
    start: int  # 0-based first slot
    stop: int  # exclusive
    cost: float
    bands: tuple[tuple[int, int, int], ...] = ()  # (node, in fiber, out fiber) at FLEX transit nodes

    @property
    def si(self) -> int:
        """1-based start slot index."""
        return self.start + 1

    @property
    def slots(self) -> tuple[int, ...]:
        """1-based slot indices used on every fiber."""
        return tuple(range(self.start + 1, self.stop + 1))

    @property
    def source_fiber(self) -> int:
        return self.fibers[0]

    def assignment(self) -> Assignment:
        return Assignment(
            tuple((f, self.start, self.stop) for f in self.fibers), self.bands, self.cost
        )


@dataclass(frozen=True)
class Candidate:
    """Best finite path of one auxiliary graph (per source fiber, per path)."""

    source_fiber: int
    si: int  # 1-based
    cost: float
    fibers: tuple[int, ...]
    path_index: int | None = None


@dataclass
class RouteResult:
    lightpath: Lightpath | None
    candidates: list[Candidate] = field(default_factory=list)

    @property
    def blocked(self) -> bool:
        return self.lightpath is None


# -- cost functions -----------------------------------------------------------


def switching_cost(
    state: SpectrumState, node: int, fin: int, fout: int, params: CostParams, banding: Banding
) -> float:
    if not banding.is_flex(node):
        return 0.0
    if state.has_band(node, fin, fout):
        return 0.0
    b = state.band_count(node, fin)
    if b >= banding.B:
        return INF
    if params.variant == "window":
        return params.alpha * b
    return params.alpha * b / banding.B


def spectrum_cost(
    state: SpectrumState,
    fiber: int,
    start: int,
    width: int,
    params: CostParams,
    source: bool = False,
) -> float:
    """Cost of using slots ``[start, start + width)`` (0-based) on ``fiber``."""
    if start < 0 or start + width > state.capacity:
        raise ValueError("window outside fiber capacity")
    free = state.is_free(fiber, start, start + width)
    if params.variant == "dynamic":
        if not free:
            return INF
        return float(start + 1) if source else 1.0
    omega = params.omega or state.capacity
    return _spectrum_static(free, start + width, state.fiber_msu(fiber), params, omega)


def _spectrum_static(free: bool, end: int, m: int, params: CostParams, omega: float) -> float:
    if not free:
        return INF
    if end <= m:
        return 1.0
    if params.variant == "window":
        return float(end)
    return (end + 1 - m) / omega + 1.0


def path_cost(
    state: SpectrumState,
    fibers: Sequence[int],
    start: int,
    width: int,
    params: CostParams,
    banding: Banding,
) -> float:
    """Total cost (switching + beta * spectrum) of an explicit fiber sequence.

    Accumulates in path order exactly like the search, so committed costs
    can be audited bit for bit.
    """
    topo = state.topology
    fl = topo.fiber_link
    c = params.beta * spectrum_cost(state, fibers[0], start, width, params, source=True)
    for fin, fout in zip(fibers, fibers[1:]):
        v = topo.links[fl[fin]].dst
        if topo.links[fl[fout]].src != v:
            raise ValueError(f"fibers {fin} and {fout} are not adjacent")
        sw = switching_cost(state, v, fin, fout, params, banding)
        sc = spectrum_cost(state, fout, start, width, params)
        c = c + sw + params.beta * sc
    return c


# -- search -------------------------------------------------------------------


class _RequestView:
    """Per-request precomputation shared by every auxiliary graph."""

    def __init__(self, state: SpectrumState, s: int, d: int, w: int, params: CostParams, banding: Banding):
        self.state = state
        self.topo = topo = state.topology
        self.s, self.d, self.w = s, d, w
        self.params, self.banding = params, banding
        self.omega = params.omega or state.capacity
        cap = state.capacity
        self.avail = [window_starts(o, w, cap) for o in state.occupancy]
        self.msu = [o.bit_length() for o in state.occupancy]
        self.fiber_link = topo.fiber_link
        self.head = [topo.links[topo.fiber_link[f]].dst for f in range(topo.fiber_count)]

    def spec(self, f: int, start: int, source: bool = False) -> float:
        if not (self.avail[f] >> start) & 1:
            return INF
        if self.params.variant == "dynamic":
            return float(start + 1) if source else 1.0
        return _spectrum_static(True, start + self.w, self.msu[f], self.params, self.omega)


def _link_allowed(view: _RequestView, link_ids: Iterable[int] | None) -> list[int]:
    topo, s = view.topo, view.s
    pool = range(len(topo.links)) if link_ids is None else link_ids
    # nothing may re-enter the source; the source's only exit is kappa
    return [l for l in pool if topo.links[l].dst != s and topo.links[l].src != s]


def _reachable_starts(view: _RequestView, kappa: int, allowed: list[int]) -> int:
    """Start slots at which the destination is reachable ignoring bands.

    Bit-parallel over all starts: necessary for a finite path and
    sufficient when no FLEX node is involved.
    """
    topo = view.topo
    first = view.avail[kappa]
    h = view.head[kappa]
    if h == view.d:
        return first
    lavail = {}
    for l in allowed:
        acc = 0
        for f in topo.links[l].fiber_ids:
            acc |= view.avail[f]
        lavail[l] = acc
    by_src: dict[int, list[int]] = {}
    for l in allowed:
        by_src.setdefault(topo.links[l].src, []).append(l)
    reach = {h: first}
    stack = [h]
    while stack:
        u = stack.pop()
        ru = reach[u]
        for l in by_src.get(u, ()):
            v = topo.links[l].dst
            new = ru & lavail[l]
            old = reach.get(v, 0)
            if new & ~old:
                reach[v] = old | new
                if v != view.d:
                    stack.append(v)
    return reach.get(view.d, 0)


def _dijkstra(view: _RequestView, kappa: int, start: int, allowed_out: dict[int, list[int]]):
    """Cheapest (cost, fiber sequence) from ``kappa`` to any fiber entering d."""
    state, params, banding = view.state, view.params, view.banding
    beta = params.beta
    topo = view.topo
    c0 = view.spec(kappa, start, source=True)
    if c0 == INF:
        return INF, None
    c0 = beta * c0
    head = view.head
    best: dict[int, tuple[float, tuple[int, ...]]] = {kappa: (c0, (kappa,))}
    heap = [(c0, (kappa,))]
    conv_done: set[int] = set()
    generic_seen: dict[int, float] = {}
    d = view.d
    plain = params.variant == "window"
    while heap:
        c, path = heapq.heappop(heap)
        f = path[-1]
        if best[f] != (c, path):
            continue
        v = head[f]
        if v == d:
            return c, path
        flex = banding.is_flex(v)
        if flex:
            bands = state.bands(v, f)
            b = len(bands)
            if b >= banding.B:
                gen = INF
            else:
                gen = params.alpha * b if plain else params.alpha * b / banding.B
                # an earlier input fiber already offered every output at <= this price
                if c + gen > generic_seen.get(v, INF):
                    gen = INF
                else:
                    generic_seen[v] = c + gen
        else:
            if v in conv_done:
                continue
            conv_done.add(v)
            bands, gen = (), 0.0
        for l in allowed_out.get(v, ()):
            for g in topo.links[l].fiber_ids:
                if flex and g in bands:
                    sw = 0.0
                elif gen != INF:
                    sw = gen
                else:
                    continue
                sc = view.spec(g, start)
                if sc == INF:
                    continue
                nc = c + sw + beta * sc
                lab = (nc, path + (g,))
                old = best.get(g)
                if old is None or lab < old:
                    best[g] = lab
                    heapq.heappush(heap, lab)
    return INF, None


def _scan_source_fiber(view: _RequestView, kappa: int, allowed: list[int]):
    """Ascending SI on ``kappa``; the first finite layered graph wins."""
    topo = view.topo
    by_src: dict[int, list[int]] = {}
    for l in allowed:
        by_src.setdefault(topo.links[l].src, []).append(l)
    starts = _reachable_starts(view, kappa, allowed)
    for start in iter_bits(starts):
        c, path = _dijkstra(view, kappa, start, by_src)
        if path is not None:
            return start, c, path
    return None


def _hops_to(view: _RequestView, allowed: list[int]) -> dict[int, int]:
    topo = view.topo
    rev: dict[int, list[int]] = {}
    for l in allowed:
        rev.setdefault(topo.links[l].dst, []).append(topo.links[l].src)
    dist = {view.d: 0}
    frontier = [view.d]
    while frontier:
        nxt = []
        for v in frontier:
            for u in rev.get(v, ()):
                if u not in dist:
                    dist[u] = dist[v] + 1
                    nxt.append(u)
        frontier = nxt
    return dist


def _make_lightpath(view: _RequestView, rid: int, start: int, cost: float, fibers) -> Lightpath:
    topo = view.topo
    nodes = [view.s] + [view.head[f] for f in fibers]
    bands = tuple(
        (view.head[fin], fin, fout)
        for fin, fout in zip(fibers, fibers[1:])
        if view.banding.is_flex(view.head[fin])
    )
    return Lightpath(rid, tuple(nodes), tuple(fibers), start, start + view.w, cost, bands)


def rfbsa_route(
    request: Request,
    state: SpectrumState,
    params: CostParams | None = None,
    banding: Banding | None = None,
    paths: Sequence[Sequence[int]] | None = None,
    prune: bool = True,
) -> RouteResult:
    """Route one request; ``paths`` None searches the whole graph, else only those node paths.

    Winner = minimum of (cost, source fiber, SI, fiber sequence) over the
    per-auxiliary-graph candidates. Nothing is committed to ``state``.
    ``prune`` skips source fibers whose cost lower bound already exceeds the
    incumbent; it never changes the winner, only the candidate list.
    """
    params = params or CostParams()
    banding = banding or Banding.conv()
    topo = state.topology
    s, d, w = request.source, request.destination, request.demand
    if w > state.capacity:
        return RouteResult(None)
    view = _RequestView(state, s, d, w, params, banding)
    if paths is None:
        groups = [(None, _link_allowed(view, None), [f for l in topo.out_links[s] for f in topo.links[l].fiber_ids])]
    else:
        groups = []
        for i, p in enumerate(paths):
            if p[0] != s or p[-1] != d:
                raise ValueError(f"path {p} does not join {s} and {d}")
            links = topo.path_links(p)
            groups.append((i, _link_allowed(view, links[1:]), list(topo.links[links[0]].fiber_ids)))
    cands: list[Candidate] = []
    best_key = None
    for pidx, allowed, sources in groups:
        hops = _hops_to(view, allowed) if prune else {}
        for kappa in sources:
            if prune and best_key is not None:
                first = view.avail[kappa]
                h = view.head[kappa]
                if not first or (h != d and h not in hops):
                    continue
                lb = params.beta * (view.spec(kappa, (first & -first).bit_length() - 1, source=True) + hops.get(h, 0))
                if lb > best_key[0]:
                    continue
            found = _scan_source_fiber(view, kappa, allowed)
            if found is None:
                continue
            start, c, fibers = found
            cand = Candidate(kappa, start + 1, c, fibers, pidx)
            cands.append(cand)
            key = (c, kappa, start, fibers)
            if best_key is None or key < best_key:
                best_key = key
    if best_key is None:
        return RouteResult(None, cands)
    c, kappa, start, fibers = best_key
    return RouteResult(_make_lightpath(view, request.id, start, c, fibers), cands)


def commit(state: SpectrumState, lp: Lightpath) -> None:
    a = lp.assignment()
    state.allocate(lp.request, a.segments, a.bands)
