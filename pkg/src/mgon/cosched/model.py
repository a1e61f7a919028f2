"""Jobs, the cluster network and schedules for VM + subcarrier co-scheduling.

Time is slotted and 1-based. A task on k VMs runs S..T with
T = S + ceil(w/k) - 1; a transfer on B subcarriers runs E..X with
X = E + ceil(D/B) - 1. A transfer starts after its parent finishes (E > T)
and the child starts after the transfer ends (S > X), or after the parent
finishes when both run on the same node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping, Sequence

import yaml

from mgon.net.paths import shortest_path
from mgon.net.topology import Topology


class CycleError(ValueError):
    pass


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class Job:
    id: int
    workloads: tuple[int, ...]
    edges: Mapping[tuple[int, int], int]  # (parent, child) -> transfer size D
    deadline: int | None = None  # slots after arrival (dynamic mode)
    arrival: int = 0

    def __post_init__(self):
        object.__setattr__(self, "workloads", tuple(int(w) for w in self.workloads))
        object.__setattr__(self, "edges", {(int(i), int(r)): int(d) for (i, r), d in dict(self.edges).items()})
        n = len(self.workloads)
        if n == 0:
            raise ValueError(f"job {self.id} has no tasks")
        if any(w < 1 for w in self.workloads):
            raise ValueError(f"job {self.id}: workloads must be >= 1")
        for (i, r), d in self.edges.items():
            if not (0 <= i < n and 0 <= r < n) or i == r:
                raise ValueError(f"job {self.id}: bad edge {i}->{r}")
            if d < 1:
                raise ValueError(f"job {self.id}: transfer size on {i}->{r} must be >= 1")

    @property
    def n_tasks(self) -> int:
        return len(self.workloads)

    @cached_property
    def parents(self) -> tuple[tuple[int, ...], ...]:
        acc = [[] for _ in self.workloads]
        for i, r in sorted(self.edges):
            acc[r].append(i)
        return tuple(tuple(a) for a in acc)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        acc = [[] for _ in self.workloads]
        for i, r in sorted(self.edges):
            acc[i].append(r)
        return tuple(tuple(a) for a in acc)

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "workloads": list(self.workloads),
            "edges": [[i, r, d] for (i, r), d in sorted(self.edges.items())],
        }
        if self.deadline is not None:
            out["deadline"] = self.deadline
        if self.arrival:
            out["arrival"] = self.arrival
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Job":
        edges = {(e[0], e[1]): e[2] for e in data.get("edges", [])}
        return cls(int(data["id"]), tuple(data["workloads"]), edges, data.get("deadline"), int(data.get("arrival", 0)))


def layerize(job: Job) -> list[list[int]]:
    """Longest-path layers: a task sits one layer above its deepest parent."""
    n = job.n_tasks
    indeg = [len(p) for p in job.parents]
    layer = [0] * n
    ready = [i for i in range(n) if indeg[i] == 0]
    seen = 0
    while ready:
        nxt = []
        for i in ready:
            seen += 1
            for r in job.children[i]:
                layer[r] = max(layer[r], layer[i] + 1)
                indeg[r] -= 1
                if indeg[r] == 0:
                    nxt.append(r)
        ready = nxt
    if seen != n:
        raise CycleError(f"job {job.id} has a dependency cycle")
    out: list[list[int]] = [[] for _ in range(max(layer) + 1)]
    for i in range(n):
        out[layer[i]].append(i)
    return out


@dataclass(frozen=True)
class TaskWeights:
    theta: tuple[float, ...]
    job: float
    alpha: float
    beta: float


def task_weights(job: Job, alpha: float, beta: float) -> TaskWeights:
    """theta_i = max over children r of alpha*w_i + beta*D_ir + theta_r; sinks get alpha*w_i."""
    layers = layerize(job)
    theta = [0.0] * job.n_tasks
    for layer in reversed(layers):
        for i in layer:
            base = alpha * job.workloads[i]
            kids = job.children[i]
            if kids:
                theta[i] = max(base + beta * job.edges[(i, r)] + theta[r] for r in kids)
            else:
                theta[i] = base
    return TaskWeights(tuple(theta), max(theta[i] for i in layers[0]), alpha, beta)


def estimated_deadline(job: Job, alpha: float = 0.01, beta: float = 0.01) -> int:
    """Gamma = max_i ceil(theta_i) under small weights (about 100 VMs and 100 subcarriers each)."""
    return max(math.ceil(t - 1e-9) for t in task_weights(job, alpha, beta).theta)


@dataclass(frozen=True)
class ClusterNet:
    """Topology plus VMs per node and guardband; one fiber per link direction."""

    topology: Topology
    vms: tuple[int, ...]
    guard: int = 2

    def __post_init__(self):
        object.__setattr__(self, "vms", tuple(int(h) for h in self.vms))
        if len(self.vms) != self.topology.node_count:
            raise ValueError("need one VM capacity per node")
        if any(h < 1 for h in self.vms):
            raise ValueError("every node needs at least one VM")
        if self.guard < 0:
            raise ValueError("guardband must be >= 0")

    @property
    def subcarriers(self) -> int:
        return self.topology.slots_per_fiber

    @property
    def node_count(self) -> int:
        return self.topology.node_count

    @cached_property
    def _routes(self) -> dict:
        return {}

    def route(self, s: int, d: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """(nodes, directed link ids) of the fixed min-hop path."""
        key = (s, d)
        hit = self._routes.get(key)
        if hit is None:
            nodes = shortest_path(self.topology, s, d)
            hit = self._routes[key] = (nodes, self.topology.path_links(nodes))
        return hit


@dataclass(frozen=True)
class TaskSlot:
    node: int
    k: int
    start: int
    finish: int


@dataclass(frozen=True)
class Transfer:
    """A result transfer; ``links`` empty means LOCAL (colocated endpoints)."""

    links: tuple[int, ...] = ()
    first: int = 0  # 0-based first subcarrier
    width: int = 0
    start: int = 0
    finish: int = 0

    @property
    def local(self) -> bool:
        return not self.links


LOCAL = Transfer()


@dataclass
class Schedule:
    tasks: dict[tuple[int, int], TaskSlot] = field(default_factory=dict)
    transfers: dict[tuple[int, int, int], Transfer] = field(default_factory=dict)

    @property
    def makespan(self) -> int:
        return max((t.finish for t in self.tasks.values()), default=0)

    def job_finish(self, job_id: int) -> int:
        return max(t.finish for (j, _), t in self.tasks.items() if j == job_id)

    def merge(self, other: "Schedule") -> None:
        self.tasks.update(other.tasks)
        self.transfers.update(other.transfers)

    def rows(self) -> list[tuple]:
        out = []
        for (j, i), t in sorted(self.tasks.items()):
            out.append(("task", j, i, "", t.node, t.k, t.start, t.finish, "", ""))
        for (j, i, r), x in sorted(self.transfers.items()):
            if x.local:
                out.append(("transfer", j, i, r, "LOCAL", "", "", "", "", ""))
            else:
                out.append(("transfer", j, i, r, "-".join(map(str, x.links)), x.width, x.start, x.finish, x.first, ""))
        return out


def critical_path_bound(job: Job, h_max: int) -> int:
    """max over DAG paths of sum ceil(w_i / H_max)."""
    best = [0] * job.n_tasks
    for layer in reversed(layerize(job)):
        for i in layer:
            tail = max((best[r] for r in job.children[i]), default=0)
            best[i] = ceil_div(job.workloads[i], h_max) + tail
    return max(best)


def load_jobs(path: str | Path) -> list[Job]:
    """Job set from YAML/JSON: ``jobs: [{id, workloads, edges: [[i, r, D], ...], deadline?}]``."""
    data = yaml.safe_load(Path(path).read_text())
    rows = data["jobs"] if isinstance(data, dict) else data
    return [Job.from_dict(r) for r in rows]


def dump_jobs(jobs: Sequence[Job]) -> str:
    return yaml.safe_dump({"jobs": [j.to_dict() for j in jobs]}, sort_keys=False)
