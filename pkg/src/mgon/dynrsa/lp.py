"""Offline path-selection probabilities that balance per-fiber load.

Routes are unordered node pairs and candidates are undirected node paths.
With y_r^e = sum_k A_{r,k}^e p_r^k, the LP minimises

    (1/L) sum_e sum_r W_r y_r^e / F^e  +  t,   t >= sum_r W_r y_r^e / F^e  for all e

subject to sum_k p_r^k = 1 and 0 <= p <= 1. Links are the physical
(undirected) links and F^e their fiber counts.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import networkx as nx
import numpy as np
from scipy.optimize import linprog

from mgon.net.topology import Topology
from mgon.net.traffic import TrafficSpec

Route = tuple[int, int]


class NoCandidates(ValueError):
    pass


def route_of(s: int, d: int) -> Route:
    return (s, d) if s < d else (d, s)


@dataclass
class PathTable:
    """Candidate node paths and selection probabilities per route."""

    candidates: dict[Route, list[tuple[int, ...]]]
    probs: dict[Route, list] = field(default_factory=dict)
    objective: float | None = None

    def __post_init__(self):
        for r, paths in self.candidates.items():
            for p in paths:
                if len(set(p)) != len(p):
                    raise ValueError(f"candidate {p} of route {r} is not simple")
                if route_of(p[0], p[-1]) != r:
                    raise ValueError(f"candidate {p} does not join route {r}")
            if r in self.probs and len(self.probs[r]) != len(paths):
                raise ValueError(f"route {r}: probability count mismatch")

    def directed(self, s: int, d: int) -> tuple[list[tuple[int, ...]], list]:
        """Candidates oriented s -> d with their probabilities."""
        r = route_of(s, d)
        paths = self.candidates[r]
        if s != r[0]:
            paths = [tuple(reversed(p)) for p in paths]
        return paths, self.probs[r]

    def check(self, tol: float = 1e-9) -> None:
        for r, ps in self.probs.items():
            if any(p < -tol or p > 1 + tol for p in ps):
                raise ValueError(f"route {r}: probability outside [0, 1]")
            if abs(float(sum(ps)) - 1.0) > tol:
                raise ValueError(f"route {r}: probabilities sum to {float(sum(ps))}")

    def dumps(self) -> str:
        rows = []
        for r in sorted(self.candidates):
            for p, q in zip(self.candidates[r], self.probs[r]):
                rows.append({"route": list(r), "path": list(p), "prob": float(q)})
        return json.dumps({"objective": self.objective, "paths": rows}, indent=1)

    @classmethod
    def loads(cls, text: str) -> "PathTable":
        data = json.loads(text)
        cands: dict[Route, list] = {}
        probs: dict[Route, list] = {}
        for row in data["paths"]:
            r = tuple(row["route"])
            cands.setdefault(r, []).append(tuple(row["path"]))
            probs.setdefault(r, []).append(row["prob"])
        return cls(cands, probs, data.get("objective"))


# -- candidates and loads -----------------------------------------------------


def min_hop_candidates(topology: Topology, slack: int = 0, limit: int | None = None) -> dict[Route, list]:
    """All simple paths within ``slack`` hops of the minimum, per unordered pair."""
    g = nx.Graph()
    g.add_nodes_from(range(topology.node_count))
    g.add_edges_from((u, v) for u, v, _ in topology.undirected_edges())
    out = {}
    for s, d in itertools.combinations(range(topology.node_count), 2):
        h = nx.shortest_path_length(g, s, d)
        paths = sorted(
            (tuple(p) for p in nx.all_simple_paths(g, s, d, cutoff=h + slack)),
            key=lambda p: (len(p), p),
        )
        out[(s, d)] = paths[:limit] if limit else paths
    return out


def route_loads(topology: Topology, spec: TrafficSpec | None = None) -> dict[Route, float]:
    """W_r: 1 for uniform traffic, else proportional to u_s u_d (mean 1)."""
    n = topology.node_count
    pairs = list(itertools.combinations(range(n), 2))
    if spec is None or spec.pattern == "uniform":
        return {r: 1.0 for r in pairs}
    u = spec.node_probabilities(topology)
    raw = {r: float(u[r[0]] * u[r[1]]) for r in pairs}
    scale = len(pairs) / math.fsum(raw.values())
    return {r: w * scale for r, w in raw.items()}


def _link_table(topology: Topology):
    edges = topology.undirected_edges()
    index = {}
    for e, (u, v, _) in enumerate(edges):
        index[(u, v)] = index[(v, u)] = e
    fibers = np.array([f for _, _, f in edges], dtype=float)
    return index, fibers


def objective_of(topology: Topology, table: PathTable, loads: Mapping[Route, float]) -> float:
    """Objective value of given probabilities (average + max per-fiber load)."""
    index, fibers = _link_table(topology)
    load = np.zeros(len(fibers))
    for r, paths in table.candidates.items():
        for p, q in zip(paths, table.probs[r]):
            for a, b in zip(p, p[1:]):
                load[index[(a, b)]] += loads[r] * float(q)
    per = load / fibers
    return float(per.mean() + per.max())


def solve_path_lp(
    topology: Topology,
    candidates: Mapping[Route, Sequence[tuple[int, ...]]],
    loads: Mapping[Route, float] | None = None,
) -> PathTable:
    routes = sorted(candidates)
    for r in routes:
        if not candidates[r]:
            raise NoCandidates(f"route {r} has no candidate paths")
    loads = loads or {r: 1.0 for r in routes}
    index, fibers = _link_table(topology)
    L = len(fibers)
    var = []  # (route, k)
    for r in routes:
        var += [(r, k) for k in range(len(candidates[r]))]
    nv = len(var) + 1  # last variable is t
    # per-link load coefficient of each probability variable
    A = np.zeros((L, nv))
    for i, (r, k) in enumerate(var):
        p = candidates[r][k]
        for a, b in zip(p, p[1:]):
            e = index[(a, b)]
            A[e, i] += loads[r] / fibers[e]
    c = A.sum(axis=0) / L
    c[-1] = 1.0
    A_ub = A.copy()
    A_ub[:, -1] = -1.0
    A_eq = np.zeros((len(routes), nv))
    pos = 0
    for j, r in enumerate(routes):
        n = len(candidates[r])
        A_eq[j, pos : pos + n] = 1.0
        pos += n
    bounds = [(0.0, 1.0)] * len(var) + [(0.0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(L), A_eq=A_eq, b_eq=np.ones(len(routes)), bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"path LP failed: {res.message}")
    probs: dict[Route, list] = {}
    pos = 0
    for r in routes:
        n = len(candidates[r])
        x = np.clip(res.x[pos : pos + n], 0.0, 1.0)
        probs[r] = list(map(float, x / x.sum()))
        pos += n
    table = PathTable({r: [tuple(p) for p in candidates[r]] for r in routes}, probs, float(res.fun))
    return table


def single_path_table(topology: Topology) -> PathTable:
    """SSP routing as a table: the first minimum-hop path per route, probability 1."""
    cands = {r: ps[:1] for r, ps in min_hop_candidates(topology).items()}
    return PathTable(cands, {r: [Fraction(1)] for r in cands}, None)


def topology_hash(topology: Topology) -> str:
    return hashlib.sha256(topology.dumps().encode()).hexdigest()[:16]


def cached_path_table(topology: Topology, spec: TrafficSpec | None, cache_dir: str | Path, slack: int = 0) -> PathTable:
    """Solve once per (topology, traffic pattern) and keep the table as JSON."""
    key = f"{topology_hash(topology)}-{spec.pattern if spec else 'uniform'}-s{slack}"
    path = Path(cache_dir) / f"paths-{key}.json"
    if path.exists():
        return PathTable.loads(path.read_text())
    table = solve_path_lp(topology, min_hop_candidates(topology, slack), route_loads(topology, spec))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(table.dumps())
    return table
