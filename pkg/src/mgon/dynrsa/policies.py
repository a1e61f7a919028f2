"""Admission policies: path choice (MPS or SSP) followed by a slot assignment rule.

Slot rules: ``r`` random window, ``ff`` first fit, ``flf`` first-last fit on
equal segments, ``pd-ff`` first-fit bins of the dedicated plan, ``mk``
dedicated plan with overflow into smaller-size segments, ``nsa`` least
capacity loss inside the dedicated segment and ``nsa-shared`` which falls
back to any window when the segment is full.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from mgon.dynrsa.lp import PathTable, route_of, single_path_table
from mgon.dynrsa.nsa import BinState, ConflictGraph, capacity_losses, subset_loss
from mgon.dynrsa.partition import PartitionPlan, equal_segments, plan_partitions
from mgon.net.rng import make_rng
from mgon.net.sim import PolicyBase
from mgon.net.spectrum import Assignment, SpectrumState, iter_bits, lowest_bit, range_mask
from mgon.net.topology import Topology
from mgon.net.traffic import Request, TrafficSpec

SA_RULES = ("r", "ff", "flf", "pd-ff", "mk", "nsa", "nsa-shared")
ROUTINGS = ("mps", "ssp")


def _span_mask(lo: int, hi: int) -> int:
    """Start bits s with lo <= s <= hi."""
    if hi < lo:
        return 0
    return range_mask(lo, hi + 1)


def _fibers(state: SpectrumState, links: Sequence[int], a: int, b: int) -> tuple:
    return tuple((state.free_fiber(l, a, b), a, b) for l in links)


class DynRsaPolicy(PolicyBase):
    def __init__(
        self,
        topology: Topology,
        sa: str,
        table: PathTable,
        routing: str = "mps",
        plan: PartitionPlan | None = None,
        seed: int = 0,
    ):
        if sa not in SA_RULES:
            raise ValueError(f"slot rule must be one of {SA_RULES}")
        if routing not in ROUTINGS:
            raise ValueError(f"routing must be one of {ROUTINGS}")
        self.topology = topology
        self.sa = sa
        self.routing = routing
        self.table = table
        self.name = f"{sa}+{routing}"
        self.plan = plan
        if sa in ("pd-ff", "mk", "nsa", "nsa-shared", "flf") and plan is None:
            raise ValueError(f"slot rule {sa} needs a partition plan")
        self.rng = make_rng(seed, "dynrsa", sa, routing)
        self._route_cache: dict[tuple[int, int], tuple] = {}
        if sa.startswith("nsa"):
            self.graph = ConflictGraph(topology, table)
            self.bins = BinState(topology, plan)
        else:
            self.graph = None
            self.bins = None
        self.zeta_log: list | None = None  # set to [] to record (kappa, cols, zeta)

    # -- routing ---------------------------------------------------------------
    def _candidates(self, s: int, d: int):
        key = (s, d)
        hit = self._route_cache.get(key)
        if hit is None:
            paths, probs = self.table.directed(s, d)
            links = [self.topology.path_links(p) for p in paths]
            cdf = np.cumsum([float(p) for p in probs])
            cdf /= cdf[-1]
            hit = self._route_cache[key] = (paths, links, cdf)
        return hit

    def choose_path(self, s: int, d: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        paths, links, cdf = self._candidates(s, d)
        if len(paths) == 1:
            return paths[0], links[0]
        k = int(np.searchsorted(cdf, self.rng.random(), side="right"))
        k = min(k, len(paths) - 1)
        return paths[k], links[k]

    # -- admission -------------------------------------------------------------
    def admit(self, request: Request, state: SpectrumState) -> Assignment | None:
        nodes, links = self.choose_path(request.source, request.destination)
        w = request.demand
        starts = state.path_window_starts(links, w)
        if not starts:
            return None
        rule = self.sa
        if rule == "ff":
            a = lowest_bit(starts)
        elif rule == "r":
            opts = list(iter_bits(starts))
            a = opts[int(self.rng.integers(len(opts)))]
        elif rule == "flf":
            a = self._flf(starts, w)
        elif rule == "pd-ff":
            a = self._aligned_first(starts, w)
        elif rule == "mk":
            a = self._mk(starts, w)
        else:
            return self._nsa(nodes, links, w, starts, state)
        if a is None:
            return None
        return Assignment(_fibers(state, links, a, a + w))

    def _segment_starts(self, j: int, w: int) -> int:
        seg = self.plan.segments[j]
        return _span_mask(seg.start, seg.stop - w)

    def _aligned_starts(self, j: int) -> int:
        seg = self.plan.segments[j]
        m = 0
        for x in range(seg.bins):
            m |= 1 << (seg.start + x * seg.size)
        return m

    def _aligned_first(self, starts: int, w: int):
        ok = starts & self._aligned_starts(self.plan.segment_for(w))
        return lowest_bit(ok) if ok else None

    def _flf(self, starts: int, w: int):
        plan = self.plan
        own = plan.segment_for(w)
        for j in [own] + [i for i in range(len(plan.segments)) if i != own]:
            ok = starts & self._segment_starts(j, w)
            if ok:
                # 1-based odd segments fill from the bottom, even ones from the top
                return lowest_bit(ok) if j % 2 == 0 else ok.bit_length() - 1
        return None

    def _mk(self, starts: int, w: int):
        a = self._aligned_first(starts, w)
        if a is not None:
            return a
        plan = self.plan
        smaller = sorted((j for j, s in enumerate(plan.segments) if s.size < w), key=lambda j: -plan.segments[j].size)
        for j in smaller:
            ok = starts & self._segment_starts(j, w)
            if ok:
                return lowest_bit(ok)
        return None

    def _nsa(self, nodes, links, w, starts, state):
        plan, bins, graph = self.plan, self.bins, self.graph
        kappa = graph.path_id(nodes)
        j = plan.segment_for(w)
        off = plan.bin_offset(j)
        nb = plan.segments[j].bins
        cols = np.arange(off, off + nb)
        free = bins.cap[list(links)][:, cols].min(axis=0) >= 1
        omega = cols[free]
        if omega.size:
            zeta = capacity_losses(graph, kappa, bins.cap, omega)
            i = int(np.argmin(zeta))  # first minimum = lowest bin
            if self.zeta_log is not None:
                self.zeta_log.append((kappa, omega.tolist(), zeta))
            _, a, b = bins.bins[int(omega[i])]
            return Assignment(_fibers(state, links, a, b))
        if self.sa != "nsa-shared":
            return None
        return self._shared(kappa, links, w, starts, state)

    def _shared(self, kappa, links, w, starts, state):
        bins, graph = self.bins, self.graph
        occ = state.occupancy
        full_cache: dict[int, float] = {}
        sub_cache: dict[tuple[int, frozenset], float] = {}
        best = None
        for a in iter_bits(starts):
            b = a + w
            fibers = [state.free_fiber(l, a, b) for l in links]
            z = 0.0
            for x in bins.overlapped(a, b):
                m = bins.masks[x]
                dec = frozenset(l for l, f in zip(links, fibers) if not occ[f] & m)
                if not dec:
                    continue  # already partly used on every chosen fiber: no loss
                if len(dec) == len(links):
                    if x not in full_cache:
                        full_cache[x] = capacity_losses(graph, kappa, bins.cap, [x])[0]
                    z += full_cache[x]
                else:
                    key = (x, dec)
                    if key not in sub_cache:
                        sub_cache[key] = subset_loss(graph, kappa, bins.cap, x, dec)
                    z += sub_cache[key]
            if best is None or z < best[0]:
                best = (z, a, fibers)
        z, a, fibers = best
        return Assignment(tuple((f, a, a + w) for f in fibers))

    def on_commit(self, request, assignment, state) -> None:
        if self.bins is not None:
            self.bins.on_commit(assignment.segments, state)

    def on_release(self, request, assignment, state) -> None:
        if self.bins is not None:
            self.bins.on_release(assignment.segments, state)


def make_policy(
    topology: Topology,
    sa: str,
    routing: str,
    spec: TrafficSpec,
    table: PathTable | None = None,
    seed: int = 0,
) -> DynRsaPolicy:
    """Wire a policy with the plan its slot rule needs; ``table`` is required for MPS."""
    S = topology.slots_per_fiber
    plan = None
    if sa == "flf":
        plan = equal_segments(S, spec.sizes)
    elif sa in ("pd-ff", "mk", "nsa", "nsa-shared"):
        plan = plan_partitions(S, spec.sizes, spec.probs)
    if routing == "ssp":
        table = single_path_table(topology)
    elif table is None:
        raise ValueError("MPS routing needs a path table")
    return DynRsaPolicy(topology, sa, table, routing, plan, seed)
