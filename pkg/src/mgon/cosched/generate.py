"""Random job batches and clusters in the two evaluation scales."""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx

from mgon.cosched.model import ClusterNet, Job
from mgon.net.rng import make_rng
from mgon.net.topology import Topology


@dataclass(frozen=True)
class JobPreset:
    tasks: tuple[int, int]
    edge_prob: float
    workload: tuple[int, int]
    transfer: tuple[int, int]
    vms: tuple[int, int]


PRESETS = {
    "small": JobPreset((2, 4), 0.8, (5, 15), (15, 20), (5, 10)),
    "nsf": JobPreset((5, 10), 0.5, (50, 150), (250, 350), (50, 100)),
}


def random_job(rng, job_id: int, preset: JobPreset, arrival: int = 0) -> Job:
    """Edges i -> r (r > i) with the preset probability; disconnected graphs are redrawn."""
    while True:
        n = int(rng.integers(preset.tasks[0], preset.tasks[1] + 1))
        w = [int(rng.integers(preset.workload[0], preset.workload[1] + 1)) for _ in range(n)]
        edges = {}
        for i in range(n):
            for r in range(i + 1, n):
                if rng.random() < preset.edge_prob:
                    edges[(i, r)] = int(rng.integers(preset.transfer[0], preset.transfer[1] + 1))
        g = nx.Graph()
        g.add_nodes_from(range(n))
        g.add_edges_from(edges)
        if nx.is_connected(g):
            return Job(job_id, tuple(w), edges, None, arrival)


def generate_jobs(n: int, seed: int, preset: str | JobPreset = "small") -> list[Job]:
    p = PRESETS[preset] if isinstance(preset, str) else preset
    rng = make_rng(seed, "cosched-jobs")
    return [random_job(rng, j, p) for j in range(n)]


def generate_arrivals(n: int, seed: int, p_new: float = 0.5, preset: str | JobPreset = "nsf") -> list[Job]:
    """n jobs; each slot holds one arrival with probability p_new, so gaps are geometric."""
    p = PRESETS[preset] if isinstance(preset, str) else preset
    rng = make_rng(seed, "cosched-arrivals")
    out, t = [], 0
    for j in range(n):
        t += int(rng.geometric(p_new))
        out.append(random_job(rng, j, p, arrival=t))
    return out


def make_cluster(topology: Topology, seed: int, preset: str | JobPreset = "small", guard: int = 2) -> ClusterNet:
    p = PRESETS[preset] if isinstance(preset, str) else preset
    rng = make_rng(seed, "cosched-vms")
    vms = tuple(int(rng.integers(p.vms[0], p.vms[1] + 1)) for _ in range(topology.node_count))
    return ClusterNet(topology, vms, guard)
