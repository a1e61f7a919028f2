"""Static batch runs, MSU metrics and an independent lightpath validator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from mgon.net.paths import k_shortest_paths
from mgon.net.sim import PolicyBase
from mgon.net.spectrum import Assignment, SpectrumState, range_mask
from mgon.net.topology import Topology
from mgon.net.traffic import Request
from mgon.rfbsa.baselines import spff_route
from mgon.rfbsa.core import Banding, CostParams, Lightpath, commit, path_cost, rfbsa_route

ALGORITHMS = ("rfbsa", "spff", "kspff", "spfbsa")


def msu_metrics(state: SpectrumState) -> dict:
    per = [state.fiber_msu(f) for f in range(state.topology.fiber_count)]
    return {"max": max(per, default=0), "mean": sum(per) / len(per) if per else 0.0, "per_fiber": per}


def static_capacity(requests: Sequence[Request]) -> int:
    """Slots per fiber that can never block a static batch.

    Every scan stops at the first window free on all fibers, which never
    starts beyond the total demand already placed.
    """
    return max(1, sum(r.demand for r in requests) + max((r.demand for r in requests), default=0))


@dataclass
class StaticRun:
    alg: str
    state: SpectrumState
    lightpaths: list[Lightpath] = field(default_factory=list)
    blocked: list[int] = field(default_factory=list)
    audit_failures: list[int] = field(default_factory=list)

    @property
    def msu_max(self) -> int:
        return msu_metrics(self.state)["max"]

    @property
    def msu_avg(self) -> float:
        return msu_metrics(self.state)["mean"]

    def csv_row(self) -> str:
        return f"{self.alg},{len(self.lightpaths) + len(self.blocked)},{self.msu_max},{self.msu_avg:.6f}"


def route_one(
    alg: str,
    request: Request,
    state: SpectrumState,
    params: CostParams,
    banding: Banding,
    k: int | None = None,
):
    topo = state.topology
    s, d = request.source, request.destination
    if alg == "rfbsa":
        paths = None if k is None else k_shortest_paths(topo, s, d, k)
        return rfbsa_route(request, state, params, banding, paths)
    if alg == "spfbsa":
        return rfbsa_route(request, state, params, banding, k_shortest_paths(topo, s, d, 1))
    if alg == "spff":
        return spff_route(request, state, k_shortest_paths(topo, s, d, 1), banding)
    if alg == "kspff":
        return spff_route(request, state, k_shortest_paths(topo, s, d, k or 3), banding)
    raise ValueError(f"unknown algorithm {alg!r}; expected one of {ALGORITHMS}")


def run_static(
    topology: Topology,
    requests: Sequence[Request],
    alg: str = "rfbsa",
    banding: Banding | None = None,
    params: CostParams | None = None,
    k: int | None = None,
    capacity: int | None = None,
    audit: bool = False,
) -> StaticRun:
    """Serve a static batch in non-increasing demand order (stable on id)."""
    banding = banding or Banding.conv()
    params = params or CostParams()
    state = SpectrumState(topology, capacity or static_capacity(requests))
    run = StaticRun(alg, state)
    for req in sorted(requests, key=lambda r: -r.demand):
        res = route_one(alg, req, state, params, banding, k)
        lp = res.lightpath
        if lp is None:
            run.blocked.append(req.id)
            continue
        if audit and alg in ("rfbsa", "spfbsa"):
            if path_cost(state, lp.fibers, lp.start, lp.stop - lp.start, params, banding) != lp.cost:
                run.audit_failures.append(req.id)
        commit(state, lp)
        run.lightpaths.append(lp)
    return run


def validate(
    topology: Topology,
    lightpaths: Sequence[Lightpath],
    banding: Banding,
    requests: dict[int, Request] | None = None,
    capacity: int | None = None,
) -> list[str]:
    """Check a set of lightpaths from scratch, without trusting any state.

    Contiguity, continuity, non-overlap, fiber chaining and the band limit at
    FLEX nodes (bands counted from the lightpaths themselves).
    """
    problems = []
    fl = topology.fiber_link
    occ: dict[int, int] = {}
    bands: dict[tuple[int, int], set[int]] = {}
    for lp in lightpaths:
        tag = f"lightpath {lp.request}"
        if lp.stop <= lp.start:
            problems.append(f"{tag}: empty slot range")
            continue
        if capacity is not None and lp.stop > capacity:
            problems.append(f"{tag}: slots beyond capacity")
        if requests is not None:
            r = requests[lp.request]
            if lp.stop - lp.start != r.demand:
                problems.append(f"{tag}: width {lp.stop - lp.start} != demand {r.demand}")
            if lp.nodes[0] != r.source or lp.nodes[-1] != r.destination:
                problems.append(f"{tag}: endpoints {lp.nodes[0]}->{lp.nodes[-1]} wrong")
        if len(lp.fibers) != len(lp.nodes) - 1:
            problems.append(f"{tag}: {len(lp.fibers)} fibers for {len(lp.nodes)} nodes")
            continue
        for i, f in enumerate(lp.fibers):
            link = topology.links[fl[f]]
            if (link.src, link.dst) != (lp.nodes[i], lp.nodes[i + 1]):
                problems.append(f"{tag}: fiber {f} not on hop {lp.nodes[i]}->{lp.nodes[i + 1]}")
        m = range_mask(lp.start, lp.stop)
        for f in lp.fibers:
            if occ.get(f, 0) & m:
                problems.append(f"{tag}: overlaps on fiber {f}")
            occ[f] = occ.get(f, 0) | m
        expected = []
        for i in range(1, len(lp.fibers)):
            v = lp.nodes[i]
            if banding.is_flex(v):
                expected.append((v, lp.fibers[i - 1], lp.fibers[i]))
                bands.setdefault((v, lp.fibers[i - 1]), set()).add(lp.fibers[i])
        if tuple(expected) != tuple(lp.bands):
            problems.append(f"{tag}: recorded bands {lp.bands} != traversed {tuple(expected)}")
    for (v, fin), outs in bands.items():
        if len(outs) > banding.B:
            problems.append(f"node {v} input fiber {fin}: {len(outs)} bands > B={banding.B}")
    return problems


class RfbsaPolicy(PolicyBase):
    """Dynamic admission with the compaction cost over K shortest paths."""

    def __init__(self, topology: Topology, banding: Banding, params: CostParams | None = None, k: int = 3):
        self.topology = topology
        self.banding = banding
        self.params = params or CostParams.dynamic()
        self.k = k
        self.name = f"rfbsa-k{k}"
        self._paths: dict[tuple[int, int], list] = {}

    def admit(self, request: Request, state: SpectrumState) -> Assignment | None:
        key = (request.source, request.destination)
        paths = self._paths.get(key)
        if paths is None:
            paths = self._paths[key] = k_shortest_paths(self.topology, *key, self.k)
        res = rfbsa_route(request, state, self.params, self.banding, paths)
        return None if res.lightpath is None else res.lightpath.assignment()


def mean(xs) -> float:
    xs = list(xs)
    return math.fsum(xs) / len(xs) if xs else 0.0
