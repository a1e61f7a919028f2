"""Exact minimum makespan for tiny batches by iterative deepening over schedules.

For a makespan bound M the search places tasks in a fixed topological
order, enumerating node, VM count, start slot, and for each remote parent
the transfer start, width and band position. Only the smallest k (or B)
for each distinct duration is tried: it occupies a subset of the
resources for the same slots, so nothing feasible is lost.
"""

from __future__ import annotations

from typing import Sequence

from mgon.cosched.model import LOCAL, ClusterNet, Job, Schedule, TaskSlot, Transfer, ceil_div, layerize
from mgon.cosched.state import ResourceState

MAX_JOBS = 2
MAX_TASKS = 3


class OracleTooLarge(ValueError):
    pass


def _min_per_duration(work: int, top: int) -> list[tuple[int, int]]:
    """(duration, smallest count achieving it) for counts 1..top, shortest first."""
    seen: dict[int, int] = {}
    for k in range(1, top + 1):
        seen.setdefault(ceil_div(work, k), k)
    return sorted(seen.items())


def _band_positions(state: ResourceState, links, start: int, stop: int, width: int) -> list[int]:
    F, G = state.net.subcarriers, state.net.guard
    occ = state.blocked(links, start, stop)
    out = []
    for a in range(0, F - width + 1):
        lo, hi = max(0, a - G), min(F, a + width + G)
        if not occ & (((1 << (hi - lo)) - 1) << lo):
            out.append(a)
    return out


def optimal_makespan(jobs: Sequence[Job], net: ClusterNet, upper: int | None = None) -> tuple[int, Schedule]:
    """(minimum makespan, one optimal schedule). ``upper`` caps the search if known."""
    if len(jobs) > MAX_JOBS or any(j.n_tasks > MAX_TASKS for j in jobs):
        raise OracleTooLarge(f"oracle handles at most {MAX_JOBS} jobs of {MAX_TASKS} tasks")
    h_max = max(net.vms)
    order = []  # (job, task)
    tail = {}
    for job in jobs:
        layers = layerize(job)
        for layer in layers:
            order += [(job, i) for i in layer]
        for layer in reversed(layers):
            for i in layer:
                # fewest slots from this task's start to the end of its job
                below = max((tail[(job.id, r)] for r in job.children[i]), default=0)
                tail[(job.id, i)] = ceil_div(job.workloads[i], h_max) + below
    M = max(tail.values())
    while upper is None or M <= upper:
        got = _search(order, tail, net, M)
        if got is not None:
            return M, got
        M += 1
    raise RuntimeError("no schedule within the given upper bound")


def _search(order, tail, net: ClusterNet, M: int) -> Schedule | None:
    state = ResourceState(net, horizon=max(8, M))
    sched = Schedule()
    F = net.subcarriers

    def transfers_for(job, i, node, parents, idx, S, acc):
        """Yield once per way of delivering parents[idx:] to ``node`` by slot S - 1."""
        if idx == len(parents):
            yield acc
            return
        p = parents[idx]
        ps = sched.tasks[(job.id, p)]
        if ps.node == node:
            if ps.finish < S:
                yield from transfers_for(job, i, node, parents, idx + 1, S, acc + [(p, LOCAL)])
            return
        _, links = net.route(ps.node, node)
        D = job.edges[(p, i)]
        for dur, B in _min_per_duration(D, F):
            for E in range(ps.finish + 1, S - dur + 1):
                X = E + dur - 1
                for a in _band_positions(state, links, E, X, B):
                    x = Transfer(links, a, B, E, X)
                    state.reserve_band(links, a, B, E, X)
                    yield from transfers_for(job, i, node, parents, idx + 1, S, acc + [(p, x)])
                    state.release_band(links, a, B, E, X)

    def place(pos: int) -> bool:
        if pos == len(order):
            return True
        job, i = order[pos]
        w = job.workloads[i]
        parents = job.parents[i]
        below = tail[(job.id, i)] - ceil_div(w, max(net.vms))
        lo = max([1] + [sched.tasks[(job.id, p)].finish + 1 for p in parents])
        for node in range(net.node_count):
            for dur, k in _min_per_duration(w, net.vms[node]):
                last_start = M - below - dur + 1
                for S in range(lo, last_start + 1):
                    T = S + dur - 1
                    if state.min_free_vms(node, S, T) < k:
                        continue
                    for plan in transfers_for(job, i, node, parents, 0, S, []):
                        state.reserve_vms(node, k, S, T)
                        sched.tasks[(job.id, i)] = TaskSlot(node, k, S, T)
                        for p, x in plan:
                            sched.transfers[(job.id, p, i)] = x
                        if place(pos + 1):
                            # keep the bands held by the generator: unwinding stops here
                            return True
                        del sched.tasks[(job.id, i)]
                        for p, _ in plan:
                            del sched.transfers[(job.id, p, i)]
                        state.release_vms(node, k, S, T)
        return False

    return sched if place(0) else None
