"""Discrete-event simulation of dynamic connection traffic.

Events are ordered by ``(time, sequence number)``; arrivals get sequence
numbers in generation order and departures get fresh ones when scheduled, so
ties between simultaneous events resolve deterministically.
"""

from __future__ import annotations

import heapq
import json
import time
from dataclasses import asdict, dataclass, field
from typing import Protocol

import numpy as np

from mgon.net.spectrum import Assignment, SpectrumState
from mgon.net.topology import Topology
from mgon.net.traffic import Request, TrafficSpec, generate_requests

CSV_HEADER = "policy,seed,load,offered_bw,blocked_bw,dbr,msu_avg"


class AssignmentPolicy(Protocol):
    name: str

    def admit(self, request: Request, state: SpectrumState) -> Assignment | None: ...

    def on_commit(self, request: Request, assignment: Assignment, state: SpectrumState) -> None: ...

    def on_release(self, request: Request, assignment: Assignment, state: SpectrumState) -> None: ...


class PolicyBase:
    """Convenience base with no-op hooks."""

    name = "policy"

    def on_commit(self, request, assignment, state) -> None:
        pass

    def on_release(self, request, assignment, state) -> None:
        pass


class SimulationError(RuntimeError):
    def __init__(self, event_index: int, cause: BaseException):
        self.event_index = event_index
        super().__init__(f"policy failed at event {event_index}: {cause!r}")


@dataclass
class SimMetrics:
    offered_count: int = 0
    offered_bw: int = 0
    blocked_count: int = 0
    blocked_bw: int = 0
    msu: list[int] = field(default_factory=list)
    wall_seconds: float = 0.0

    @property
    def demand_blocking_ratio(self) -> float:
        return self.blocked_bw / self.offered_bw if self.offered_bw else 0.0

    @property
    def request_blocking_ratio(self) -> float:
        return self.blocked_count / self.offered_count if self.offered_count else 0.0

    @property
    def msu_avg(self) -> float:
        return float(np.mean(self.msu)) if self.msu else 0.0

    @property
    def msu_max(self) -> int:
        return max(self.msu) if self.msu else 0

    def csv_row(self, policy: str, seed: int, load: float) -> str:
        return (
            f"{policy},{seed},{load:g},{self.offered_bw},{self.blocked_bw},"
            f"{self.demand_blocking_ratio:.6g},{self.msu_avg:.6g}"
        )

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("msu")
        d["demand_blocking_ratio"] = self.demand_blocking_ratio
        d["msu_avg"] = self.msu_avg
        d["msu_max"] = self.msu_max
        return d

    def to_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True)


def run_requests(
    topology: Topology,
    requests: list[Request],
    policy: AssignmentPolicy,
    warmup: int = 0,
    state: SpectrumState | None = None,
    check_every: int = 0,
) -> SimMetrics:
    """Drive ``policy`` through pre-generated dynamic ``requests``.

    The first ``warmup`` requests load the network but are not counted.
    ``check_every`` > 0 enables a periodic occupancy-conservation audit.
    """
    state = state if state is not None else SpectrumState(topology)
    metrics = SimMetrics()
    peak = [0] * topology.fiber_count
    live: dict[int, tuple[Request, Assignment]] = {}
    pending: list[tuple[float, int, int]] = []  # departures: (time, seq, request idx)
    seq = len(requests)
    t0 = time.perf_counter()
    event = 0
    for idx, req in enumerate(requests):
        # fire departures due before (or at) this arrival, in (time, seq) order
        while pending and (pending[0][0], pending[0][1]) < (req.arrival, idx):
            _, _, j = heapq.heappop(pending)
            _depart(state, policy, live, j, event)
            event += 1
        measured = idx >= warmup
        try:
            assignment = policy.admit(req, state)
        except Exception as exc:  # surface with the event index
            raise SimulationError(event, exc) from exc
        if measured:
            metrics.offered_count += 1
            metrics.offered_bw += req.demand
        if assignment is None:
            if measured:
                metrics.blocked_count += 1
                metrics.blocked_bw += req.demand
        else:
            try:
                state.allocate(req.id, assignment.segments, assignment.bands)
                policy.on_commit(req, assignment, state)
            except Exception as exc:
                raise SimulationError(event, exc) from exc
            live[idx] = (req, assignment)
            heapq.heappush(pending, (req.arrival + req.holding, seq, idx))
            seq += 1
            if measured:
                for f, _, stop in assignment.segments:
                    if stop > peak[f]:
                        peak[f] = stop
        event += 1
        if check_every and event % check_every == 0:
            check_conservation(state)
    while pending:
        _, _, j = heapq.heappop(pending)
        _depart(state, policy, live, j, event)
        event += 1
    metrics.msu = peak
    metrics.wall_seconds = time.perf_counter() - t0
    return metrics


def _depart(state, policy, live, j, event) -> None:
    req, assignment = live.pop(j)
    try:
        state.release(req.id)
        policy.on_release(req, assignment, state)
    except Exception as exc:
        raise SimulationError(event, exc) from exc


def check_conservation(state: SpectrumState) -> None:
    expected = sum(stop - start for segs in state.connections.values() for _, start, stop in segs)
    if expected != state.used_bits():
        raise AssertionError(f"occupancy {state.used_bits()} != live demand {expected}")


def run_dynamic_sim(
    topology: Topology,
    spec: TrafficSpec,
    policy: AssignmentPolicy,
    n_requests: int,
    warmup: int,
    seed: int,
) -> SimMetrics:
    """Generate ``warmup + n_requests`` Poisson requests and simulate them."""
    reqs = generate_requests(spec, warmup + n_requests, seed, topology, dynamic=True)
    return run_requests(topology, reqs, policy, warmup=warmup)
