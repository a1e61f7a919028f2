"""Independent schedule checker; each violation carries the constraint letter it breaks.

a  every task placed once on a real node with 1 <= k <= H_v
b  LOCAL exactly when parent and child share a node
c  task start S >= 1 (and >= the release slot)
d  processing length T - S + 1 == ceil(w / k)
e  per-node, per-slot VM total <= H_v
f  every DAG edge has one transfer record; E >= 1
g  band inside the spectrum, width >= 1, X - E + 1 == ceil(D / B)
h  transfer starts after the parent finishes (E > T_parent)
i  child starts after the transfer ends (S > X), or after T_parent when LOCAL
j  transfer links are the fixed path between the two nodes
k  bands sharing a link and a slot are disjoint and >= G subcarriers apart
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from mgon.cosched.model import ClusterNet, Job, Schedule, ceil_div


@dataclass(frozen=True)
class Violation:
    letter: str
    message: str

    def __str__(self) -> str:
        return f"({self.letter}) {self.message}"


def validate_schedule(schedule: Schedule, jobs: Sequence[Job], net: ClusterNet, release: dict[int, int] | None = None) -> list[Violation]:
    out: list[Violation] = []
    bad = lambda letter, msg: out.append(Violation(letter, msg))
    F, G = net.subcarriers, net.guard
    release = release or {}
    known = {(j.id, i) for j in jobs for i in range(j.n_tasks)}
    for key in schedule.tasks:
        if key not in known:
            bad("a", f"task {key} is not part of any job")
    vm: dict[tuple[int, int], int] = {}
    for job in jobs:
        for i, w in enumerate(job.workloads):
            t = schedule.tasks.get((job.id, i))
            if t is None:
                bad("a", f"job {job.id} task {i} unscheduled")
                continue
            if not (0 <= t.node < net.node_count):
                bad("a", f"job {job.id} task {i} on unknown node {t.node}")
                continue
            if not (1 <= t.k <= net.vms[t.node]):
                bad("a", f"job {job.id} task {i}: k={t.k} outside 1..{net.vms[t.node]}")
                continue
            if t.start < max(1, release.get(job.id, 1)):
                bad("c", f"job {job.id} task {i} starts at {t.start}")
            if t.finish - t.start + 1 != ceil_div(w, t.k):
                bad("d", f"job {job.id} task {i}: runs {t.start}..{t.finish}, needs {ceil_div(w, t.k)} slots")
            for s in range(t.start, t.finish + 1):
                vm[(t.node, s)] = vm.get((t.node, s), 0) + t.k
    for (v, s), used in sorted(vm.items()):
        if used > net.vms[v]:
            bad("e", f"node {v} slot {s}: {used} VMs > {net.vms[v]}")

    cells: dict[tuple[int, int], list[tuple[int, int, tuple]]] = {}  # (link, slot) -> bands
    expected = {(j.id, i, r) for j in jobs for (i, r) in j.edges}
    for key in schedule.transfers:
        if key not in expected:
            bad("f", f"transfer {key} is not a DAG edge")
    for job in jobs:
        for (i, r), D in sorted(job.edges.items()):
            key = (job.id, i, r)
            x = schedule.transfers.get(key)
            if x is None:
                bad("f", f"no transfer record for job {job.id} edge {i}->{r}")
                continue
            tp, tc = schedule.tasks.get((job.id, i)), schedule.tasks.get((job.id, r))
            if tp is None or tc is None:
                continue
            same = tp.node == tc.node
            if x.local:
                if not same:
                    bad("b", f"job {job.id} edge {i}->{r} LOCAL across nodes {tp.node}->{tc.node}")
                elif tc.start <= tp.finish:
                    bad("i", f"job {job.id} task {r} starts {tc.start} before parent {i} ends {tp.finish}")
                continue
            if same:
                bad("b", f"job {job.id} edge {i}->{r} uses links between colocated tasks")
            if x.start < 1:
                bad("f", f"job {job.id} edge {i}->{r} starts at {x.start}")
            if x.width < 1 or x.first < 0 or x.first + x.width > F:
                bad("g", f"job {job.id} edge {i}->{r}: band [{x.first}, {x.first + x.width}) outside 0..{F}")
            elif x.finish - x.start + 1 != ceil_div(D, x.width):
                bad("g", f"job {job.id} edge {i}->{r}: {x.start}..{x.finish} but needs {ceil_div(D, x.width)} slots")
            if x.start <= tp.finish:
                bad("h", f"job {job.id} edge {i}->{r} starts {x.start} before parent ends {tp.finish}")
            if tc.start <= x.finish:
                bad("i", f"job {job.id} task {r} starts {tc.start} before transfer ends {x.finish}")
            if not same and 0 <= tp.node < net.node_count and 0 <= tc.node < net.node_count:
                if tuple(x.links) != net.route(tp.node, tc.node)[1]:
                    bad("j", f"job {job.id} edge {i}->{r} not on the fixed path {tp.node}->{tc.node}")
            if x.width >= 1:
                for l in x.links:
                    for s in range(x.start, x.finish + 1):
                        cells.setdefault((l, s), []).append((x.first, x.first + x.width, key))
    for (l, s), bands in sorted(cells.items()):
        bands.sort()
        for (a1, b1, k1), (a2, b2, k2) in zip(bands, bands[1:]):
            if a2 < b1:
                bad("k", f"link {l} slot {s}: bands of {k1} and {k2} overlap")
            elif a2 - b1 < G:
                bad("k", f"link {l} slot {s}: bands of {k1} and {k2} only {a2 - b1} apart (G={G})")
    return out
