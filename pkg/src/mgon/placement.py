"""FLEX node placement under a WSS budget: accounting, RP, TAP and the pipeline.

Every node starts as CONV. Replacing node v by FLEX changes its WSS count
from 2 N_v S(N_v) cascaded 1x4 units to 2 N_v 1xB units, where N_v is the
number of input fibers. A placement is accepted once the total is <= T.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from mgon.net.rng import make_rng
from mgon.net.sim import SimMetrics, run_requests
from mgon.net.topology import Topology
from mgon.net.traffic import Request, TrafficSpec, generate_requests
from mgon.oxc.cost import s_exact
from mgon.rfbsa import Banding, CostParams, RfbsaPolicy, run_static

log = logging.getLogger(__name__)

SCHEMES = ("rp", "tap", "best")
PROBE_REQUESTS = 3000


class InfeasibleBudget(ValueError):
    pass


def budget_units(topology: Topology, node: int, arch: str, B: int = 4) -> int:
    n = topology.port_count(node)
    if n == 0:
        return 0
    if arch.upper() == "CONV":
        return 2 * n * s_exact(n)
    if arch.upper() == "FLEX":
        return 2 * n
    raise ValueError(f"unknown architecture {arch!r}")


def budget_range(topology: Topology, B: int = 4) -> tuple[int, int]:
    """(all-FLEX total, all-CONV total)."""
    nodes = range(topology.node_count)
    return (
        sum(budget_units(topology, v, "FLEX", B) for v in nodes),
        sum(budget_units(topology, v, "CONV", B) for v in nodes),
    )


@dataclass
class PlacementResult:
    archs: tuple[str, ...]
    total_units: int
    budget: int
    order: tuple[int, ...] = ()  # replacement sequence
    node_costs: dict[int, float] = field(default_factory=dict)
    B: int = 4

    @property
    def flex_nodes(self) -> frozenset[int]:
        return frozenset(v for v, a in enumerate(self.archs) if a == "FLEX")

    @property
    def n_flex(self) -> int:
        return len(self.flex_nodes)

    def banding(self) -> Banding:
        return Banding(self.flex_nodes, self.B)


def _replace_in_order(topology: Topology, T: int, order: Sequence[int], B: int, costs=None) -> PlacementResult:
    lo, hi = budget_range(topology, B)
    if T < lo:
        raise InfeasibleBudget(f"budget {T} below the all-FLEX total {lo}")
    archs = ["CONV"] * topology.node_count
    total = hi
    done = []
    for v in order:
        if total <= T:
            break
        archs[v] = "FLEX"
        total += budget_units(topology, v, "FLEX", B) - budget_units(topology, v, "CONV", B)
        done.append(v)
        log.debug("replace node %d -> total %d", v, total)
    return PlacementResult(tuple(archs), total, T, tuple(done), dict(costs or {}), B)


def place_random(topology: Topology, T: int, seed: int, B: int = 4) -> PlacementResult:
    rng = make_rng(seed, "placement-rp")
    order = [int(v) for v in rng.permutation(topology.node_count)]
    return _replace_in_order(topology, T, order, B)


def traffic_profile(topology: Topology, lightpaths) -> tuple[dict[int, int], dict[int, int]]:
    """(maxb_v, delta_v): max bands from one input fiber and through-lightpath counts.

    Bands are read off the lightpaths themselves, so an all-CONV run (which
    records no bands) still reports what FLEX nodes would have needed.
    """
    outs: dict[tuple[int, int], set[int]] = {}
    through = {v: 0 for v in range(topology.node_count)}
    for lp in lightpaths:
        for i in range(1, len(lp.fibers)):
            v = lp.nodes[i]
            outs.setdefault((v, lp.fibers[i - 1]), set()).add(lp.fibers[i])
            through[v] += 1
    maxb = {v: 0 for v in range(topology.node_count)}
    for (v, _), s in outs.items():
        maxb[v] = max(maxb[v], len(s))
    return maxb, through


def tap_costs(topology: Topology, lightpaths, B: int = 4) -> dict[int, float]:
    maxb, through = traffic_profile(topology, lightpaths)
    out = {}
    for v in range(topology.node_count):
        ports = topology.port_count(v)
        out[v] = 0.0 if maxb[v] <= B else through[v] / ports
    return out


def tap_order(topology: Topology, costs: dict[int, float]) -> list[int]:
    return sorted(costs, key=lambda v: (costs[v], -topology.port_count(v), v))


def place_traffic_aware(
    topology: Topology,
    T: int,
    probe_requests: Sequence[Request],
    B: int = 4,
    params: CostParams | None = None,
    k: int | None = 1,
) -> PlacementResult:
    """Route the probe once on all-CONV, then replace in ascending C_v."""
    lo, _ = budget_range(topology, B)
    if T < lo:
        raise InfeasibleBudget(f"budget {T} below the all-FLEX total {lo}")
    params = params or CostParams(variant="normalized")
    probe = run_static(topology, probe_requests, "rfbsa", Banding.conv(), params, k=k)
    costs = tap_costs(topology, probe.lightpaths, B)
    order = tap_order(topology, costs)
    log.info("TAP order %s costs %s", order, costs)
    return _replace_in_order(topology, T, order, B, costs)


@dataclass
class PipelineResult:
    scheme: str
    placement: PlacementResult
    msu_avg: float | None = None
    msu_max: int | None = None
    sim: SimMetrics | None = None

    def csv_row(self) -> str:
        metric = self.sim.demand_blocking_ratio if self.sim is not None else self.msu_avg
        return f"{self.scheme},{self.placement.budget},{self.placement.n_flex},{metric:.6f}"


def placement_pipeline(
    topology: Topology,
    T: int,
    requests: Sequence[Request],
    scheme: str = "tap",
    seed: int = 0,
    B: int = 4,
    params: CostParams | None = None,
    k: int | None = 1,
) -> PipelineResult:
    """Static pipeline: place nodes, then run RFBSA on the mixed network.

    ``best`` runs both schemes and keeps the lower average MSU (TAP on ties).
    """
    scheme = scheme.lower()
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}")
    params = params or CostParams(variant="normalized")
    if scheme == "best":
        tap = placement_pipeline(topology, T, requests, "tap", seed, B, params, k)
        rp = placement_pipeline(topology, T, requests, "rp", seed, B, params, k)
        win = tap if tap.msu_avg <= rp.msu_avg else rp
        return PipelineResult("best", win.placement, win.msu_avg, win.msu_max)
    if scheme == "rp":
        pl = place_random(topology, T, seed, B)
    else:
        pl = place_traffic_aware(topology, T, requests, B, params, k)
    run = run_static(topology, requests, "rfbsa", pl.banding(), params, k=k)
    return PipelineResult(scheme, pl, run.msu_avg, run.msu_max)


def dynamic_pipeline(
    topology: Topology,
    T: int,
    spec: TrafficSpec,
    n_requests: int,
    warmup: int,
    seed: int,
    scheme: str = "tap",
    B: int = 4,
    k: int = 3,
    alpha: float = 100.0,
) -> PipelineResult:
    """Place with a static probe drawn from ``spec``, then simulate dynamic arrivals."""
    if scheme == "rp":
        pl = place_random(topology, T, seed, B)
    elif scheme == "tap":
        probe = generate_requests(spec, PROBE_REQUESTS, seed=seed, nodes=topology.node_count)
        pl = place_traffic_aware(topology, T, probe, B, CostParams(variant="normalized"), k=k)
    else:
        raise ValueError("dynamic pipeline supports rp or tap")
    reqs = generate_requests(spec, n_requests + warmup, seed=seed + 1, nodes=topology.node_count, dynamic=True)
    policy = RfbsaPolicy(topology, pl.banding(), CostParams.dynamic(alpha), k)
    metrics = run_requests(topology, reqs, policy, warmup=warmup)
    return PipelineResult(scheme, pl, sim=metrics)
