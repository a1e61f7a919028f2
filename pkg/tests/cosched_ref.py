"""Reference feasibility check for co-schedules, written against plain grids.

Deliberately shares no code with mgon.cosched.validate: VM use is summed in
a (node, slot) array and every band is painted subcarrier by subcarrier into
a (link, slot, subcarrier) owner grid.
"""

import dataclasses

import numpy as np


def _len(work, rate):
    return (work + rate - 1) // rate


def feasible(schedule, jobs, net, release=None) -> bool:
    release = release or {}
    F, G = net.subcarriers, net.guard
    horizon = 2 + max([t.finish for t in schedule.tasks.values()] + [x.finish for x in schedule.transfers.values()] + [0])
    vm = np.zeros((net.node_count, horizon + 1), dtype=int)
    keys = {(j.id, i) for j in jobs for i in range(j.n_tasks)}
    if set(schedule.tasks) != keys:
        return False
    if set(schedule.transfers) != {(j.id, i, r) for j in jobs for (i, r) in j.edges}:
        return False
    for job in jobs:
        for i, w in enumerate(job.workloads):
            t = schedule.tasks[(job.id, i)]
            if not 0 <= t.node < net.node_count or not 1 <= t.k <= net.vms[t.node]:
                return False
            if t.start < max(1, release.get(job.id, 1)) or t.finish != t.start + _len(w, t.k) - 1:
                return False
            vm[t.node, t.start : t.finish + 1] += t.k
    if (vm > np.array(net.vms)[:, None]).any():
        return False
    owner = np.full((len(net.topology.links), horizon + 1, F), -1, dtype=int)
    bands = []
    for n, ((jid, i, r), x) in enumerate(sorted(schedule.transfers.items())):
        job = next(j for j in jobs if j.id == jid)
        p, c = schedule.tasks[(jid, i)], schedule.tasks[(jid, r)]
        if p.node == c.node:
            if x.links or c.start < p.finish + 1:
                return False
            continue
        if tuple(x.links) != net.route(p.node, c.node)[1]:
            return False
        if x.width < 1 or x.first < 0 or x.first + x.width > F:
            return False
        if x.start < p.finish + 1 or x.finish != x.start + _len(job.edges[(i, r)], x.width) - 1 or c.start < x.finish + 1:
            return False
        for l in x.links:
            for s in range(x.start, x.finish + 1):
                for f in range(x.first, x.first + x.width):
                    if owner[l, s, f] != -1:
                        return False
                    owner[l, s, f] = n
        bands.append((n, x))
    for n, x in bands:
        lo, hi = max(0, x.first - G), min(F, x.first + x.width + G)
        for l in x.links:
            near = owner[l, x.start : x.finish + 1, lo:hi]
            if ((near != -1) & (near != n)).any():
                return False
    return True


def mutate(schedule, jobs, net, rng):
    """Copy of ``schedule`` with one random local change."""
    tasks = dict(schedule.tasks)
    transfers = dict(schedule.transfers)
    job = jobs[int(rng.integers(len(jobs)))]
    i = int(rng.integers(job.n_tasks))
    t = tasks[(job.id, i)]
    remote = [k for k, x in transfers.items() if x.links]
    kind = int(rng.integers(9))
    d = int(rng.choice([-3, -2, -1, 1, 2, 3]))
    if kind == 0:
        tasks[(job.id, i)] = dataclasses.replace(t, start=t.start + d, finish=t.finish + d)
    elif kind == 1:
        tasks[(job.id, i)] = dataclasses.replace(t, start=t.start + d)
    elif kind == 2:
        k = max(1, t.k + (1 if d > 0 else -1))
        tasks[(job.id, i)] = dataclasses.replace(t, k=k, finish=t.start + _len(job.workloads[i], k) - 1)
    elif kind == 3:
        tasks[(job.id, i)] = dataclasses.replace(t, node=int(rng.integers(net.node_count)))
    elif kind == 8 and transfers:
        del transfers[sorted(transfers)[int(rng.integers(len(transfers)))]]
    elif remote:
        key = remote[int(rng.integers(len(remote)))]
        x = transfers[key]
        size = next(j for j in jobs if j.id == key[0]).edges[key[1:]]
        if kind == 4:
            x = dataclasses.replace(x, start=x.start + d, finish=x.finish + d)
        elif kind == 5:
            x = dataclasses.replace(x, first=x.first + d)
        elif kind == 6:
            w = max(1, x.width + (1 if d > 0 else -1))
            x = dataclasses.replace(x, width=w, finish=x.start + _len(size, w) - 1)
        else:
            x = dataclasses.replace(x, links=())
        transfers[key] = x
    return type(schedule)(tasks, transfers)
