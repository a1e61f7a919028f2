"""First-Fit and Children-Aware list schedulers plus dynamic deadline admission.

Both schedulers walk jobs one by one and each job layer by layer. For a
task they consider start slots S upward and nodes in index order; a node
qualifies once every parent's result can be on it by S - 1. VMs are
scanned from min(h_n(S), w) down to 1. FF keeps the first (S, node, k) that
fits; CA keeps the one with the earliest finish over all of them.

For each remote parent the transfer with the earliest finish X is taken
(then the narrowest width, then the lowest first-fit band); it does not
depend on S, so it is planned once per node with earlier parents'
transfers held tentatively.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from mgon.cosched.model import LOCAL, ClusterNet, Job, Schedule, TaskSlot, Transfer, ceil_div, estimated_deadline, layerize, task_weights
from mgon.cosched.state import ResourceState

ALGORITHMS = ("ff", "ca")


def earliest_transfer(state: ResourceState, links, size: int, earliest: int, limit: int | None = None) -> Transfer | None:
    """Transfer of ``size`` over ``links`` starting at or after ``earliest`` with the smallest finish."""
    F = state.net.subcarriers
    X = earliest + ceil_div(size, F) - 1
    while True:
        if limit is not None and X > limit:
            return None
        prev = None
        for B in range(1, F + 1):
            dur = ceil_div(size, B)
            if dur == prev:
                continue  # a wider band with the same duration cannot fit where a narrower one failed
            prev = dur
            E = X - dur + 1
            if E < earliest:
                continue
            a = state.first_band(links, E, X, B)
            if a is not None:
                return Transfer(links, a, B, E, X)
        X += 1


def _reserve(state: ResourceState, x: Transfer) -> None:
    if not x.local:
        state.reserve_band(x.links, x.first, x.width, x.start, x.finish)


def _unreserve(state: ResourceState, x: Transfer) -> None:
    if not x.local:
        state.release_band(x.links, x.first, x.width, x.start, x.finish)


@dataclass
class _NodePlan:
    ready: int  # earliest start allowed by the parents
    transfers: dict[int, Transfer]


def _plan_node(job: Job, i: int, node: int, parents: Sequence[int], done: dict, state: ResourceState, net: ClusterNet, limit):
    ready = 1
    held: list[Transfer] = []
    plans: dict[int, Transfer] = {}
    ok = True
    for p in parents:
        ps = done[p]
        if ps.node == node:
            plans[p] = LOCAL
            ready = max(ready, ps.finish + 1)
            continue
        _, links = net.route(ps.node, node)
        cap = None if limit is None else limit - 1
        x = earliest_transfer(state, links, job.edges[(p, i)], ps.finish + 1, cap)
        if x is None:
            ok = False
            break
        _reserve(state, x)
        held.append(x)
        plans[p] = x
        ready = max(ready, x.finish + 1)
    for x in held:
        _unreserve(state, x)
    return _NodePlan(ready, plans) if ok else None


def _place_task(job, i, parents, done, state, net, release, exhaust, limit):
    """Best (slot, node plan) for task i, or None past ``limit``."""
    w = job.workloads[i]
    S0 = max([release] + [done[p].finish + 1 for p in parents])
    plans = [_plan_node(job, i, n, parents, done, state, net, limit) for n in range(net.node_count)]
    live = [n for n in range(net.node_count) if plans[n] is not None]
    if not live:
        return None
    best = None
    S = max(S0, min(plans[n].ready for n in live))
    while True:
        if best is not None and S >= best[0].finish:
            break
        if limit is not None and S > limit:
            break
        for n in live:
            if plans[n].ready > S:
                continue
            h = state.free_vms(n, S)
            if h <= 0:
                continue
            for k in range(min(h, w), 0, -1):
                T = S + ceil_div(w, k) - 1
                if best is not None and T >= best[0].finish:
                    break
                if limit is not None and T > limit:
                    break
                if state.min_free_vms(n, S, T) >= k:
                    best = (TaskSlot(n, k, S, T), plans[n])
                    break
            if best is not None and not exhaust:
                return best
        S += 1
    return best


def _schedule_job(job: Job, state: ResourceState, net: ClusterNet, exhaust: bool, weights=None, release: int = 1, limit: int | None = None) -> Schedule | None:
    done: dict[int, TaskSlot] = {}
    out = Schedule()
    for layer in layerize(job):
        if weights is not None:
            layer = sorted(layer, key=lambda t: (-weights.theta[t], t))
        for i in layer:
            parents = list(job.parents[i])
            if exhaust:
                parents.sort(key=lambda p: (-job.edges[(p, i)], p))
            got = _place_task(job, i, parents, done, state, net, release, exhaust, limit)
            if got is None:
                return None
            slot, plan = got
            state.reserve_vms(slot.node, slot.k, slot.start, slot.finish)
            for p in parents:
                x = plan.transfers[p]
                _reserve(state, x)
                out.transfers[(job.id, p, i)] = x
            done[i] = slot
            out.tasks[(job.id, i)] = slot
    return out


def job_order(jobs: Sequence[Job], alg: str, alpha: float = 0.5, beta: float = 1.0):
    """(job, weights or None) in the order the algorithm schedules them."""
    if alg == "ff":
        return [(j, None) for j in jobs]
    if alg != "ca":
        raise ValueError(f"algorithm must be one of {ALGORITHMS}")
    ws = [(j, task_weights(j, alpha, beta)) for j in jobs]
    order = sorted(range(len(ws)), key=lambda x: (-ws[x][1].job, x))
    return [ws[x] for x in order]


def schedule_jobs(jobs: Sequence[Job], net: ClusterNet, alg: str = "ca", alpha: float = 0.5, beta: float = 1.0, state: ResourceState | None = None) -> Schedule:
    """Static batch: every job is scheduled; the horizon grows as needed."""
    state = state if state is not None else ResourceState(net)
    out = Schedule()
    for job, weights in job_order(jobs, alg, alpha, beta):
        out.merge(_schedule_job(job, state, net, alg == "ca", weights))
    return out


def schedule_ff(jobs: Sequence[Job], net: ClusterNet, state: ResourceState | None = None) -> Schedule:
    return schedule_jobs(jobs, net, "ff", state=state)


def schedule_ca(jobs: Sequence[Job], net: ClusterNet, alpha: float = 0.5, beta: float = 1.0, state: ResourceState | None = None) -> Schedule:
    return schedule_jobs(jobs, net, "ca", alpha, beta, state)


def admit_dynamic(
    job: Job,
    net: ClusterNet,
    state: ResourceState,
    now: int,
    alg: str = "ca",
    alpha: float = 0.5,
    beta: float = 1.0,
) -> Schedule | None:
    """Schedule ``job`` from slot now+1 and keep it only if it ends by now + deadline.

    The deadline defaults to the small-weight estimate. A rejected job leaves
    ``state`` untouched.
    """
    gamma = job.deadline if job.deadline is not None else estimated_deadline(job)
    limit = now + gamma
    if limit <= now:
        return None
    weights = task_weights(job, alpha, beta) if alg == "ca" else None
    trial = state.copy()
    got = _schedule_job(job, trial, net, alg == "ca", weights, release=now + 1, limit=limit)
    if got is None or got.makespan > limit:
        return None
    state.used, state.spec, state.busy_until = trial.used, trial.spec, trial.busy_until
    return got


@dataclass
class DynamicResult:
    alg: str
    offered: int
    blocked: int
    schedule: Schedule
    admitted: tuple[int, ...]
    deadlines: dict[int, int]

    @property
    def blocking_ratio(self) -> float:
        return self.blocked / self.offered if self.offered else 0.0


def run_dynamic(jobs: Sequence[Job], net: ClusterNet, alg: str = "ca", alpha: float = 0.5, beta: float = 1.0) -> DynamicResult:
    """Admit jobs in arrival order (ties by id); each arrival is handled at its slot."""
    state = ResourceState(net)
    out = Schedule()
    admitted = []
    deadlines = {}
    blocked = 0
    for job in sorted(jobs, key=lambda j: (j.arrival, j.id)):
        deadlines[job.id] = job.arrival + (job.deadline if job.deadline is not None else estimated_deadline(job))
        got = admit_dynamic(job, net, state, job.arrival, alg, alpha, beta)
        if got is None:
            blocked += 1
        else:
            out.merge(got)
            admitted.append(job.id)
    return DynamicResult(alg, len(jobs), blocked, out, tuple(admitted), deadlines)
