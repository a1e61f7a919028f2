"""Conflict graph, per-bin link capacities and next-state capacity loss.

c[e, x] is the number of fibers of directed link e on which bin x is
entirely free. The path capacity of k on x is min over its links; taking x
on path kappa costs every conflicting candidate k' its probability p(k')
when some link shared with kappa attains that minimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from mgon.dynrsa.lp import PathTable
from mgon.dynrsa.partition import PartitionPlan
from mgon.net.spectrum import SpectrumState, range_mask
from mgon.net.topology import Topology

BIG = np.iinfo(np.int32).max // 2


@dataclass(frozen=True)
class DirectedPath:
    nodes: tuple[int, ...]
    links: tuple[int, ...]
    prob: object  # float or Fraction
    route: tuple[int, int]


class ConflictGraph:
    """Directed candidate paths; edges join paths sharing a directed link."""

    def __init__(self, topology: Topology, table: PathTable):
        self.topology = topology
        self.paths: list[DirectedPath] = []
        self.index: dict[tuple[int, ...], int] = {}
        for r, cands in sorted(table.candidates.items()):
            for p, q in zip(cands, table.probs[r]):
                for nodes in (tuple(p), tuple(reversed(p))):
                    self.index[nodes] = len(self.paths)
                    self.paths.append(DirectedPath(nodes, topology.path_links(nodes), q, r))
        by_link: dict[int, list[int]] = {}
        for i, dp in enumerate(self.paths):
            for l in dp.links:
                by_link.setdefault(l, []).append(i)
        self.adj: list[set[int]] = [set() for _ in self.paths]
        for members in by_link.values():
            for i in members:
                self.adj[i].update(members)
        for i, s in enumerate(self.adj):
            s.discard(i)
        self._psi_cache: dict[int, tuple] = {}

    def path_id(self, nodes: Sequence[int]) -> int:
        return self.index[tuple(nodes)]

    def is_symmetric(self) -> bool:
        return all(i in self.adj[j] for i, s in enumerate(self.adj) for j in s)

    def psi(self, kappa: int) -> list[int]:
        """Conflicting paths of kappa with nonzero probability, ascending id."""
        return sorted(j for j in self.adj[kappa] if self.paths[j].prob > 0)

    def psi_arrays(self, kappa: int):
        """Padded link-index arrays (all links, shared links) and probabilities of psi."""
        hit = self._psi_cache.get(kappa)
        if hit is not None:
            return hit
        sentinel = len(self.topology.links)
        members = self.psi(kappa)
        mine = set(self.paths[kappa].links)
        full = [self.paths[j].links for j in members]
        shared = [tuple(l for l in self.paths[j].links if l in mine) for j in members]
        w1 = max((len(x) for x in full), default=1)
        w2 = max((len(x) for x in shared), default=1)
        fa = np.full((len(members), w1), sentinel, dtype=np.intp)
        sa = np.full((len(members), w2), sentinel, dtype=np.intp)
        for i, (f, s) in enumerate(zip(full, shared)):
            fa[i, : len(f)] = f
            sa[i, : len(s)] = s
        probs = [self.paths[j].prob for j in members]
        out = (members, fa, sa, probs, np.array([float(p) for p in probs]))
        self._psi_cache[kappa] = out
        return out


class BinState:
    """Link capacities per bin plus sharing flags, kept in step with a SpectrumState."""

    def __init__(self, topology: Topology, plan: PartitionPlan):
        self.topology = topology
        self.plan = plan
        self.bins = plan.global_bins()  # (segment, start, stop)
        self.bin_of = np.full(plan.S, -1, dtype=np.intp)
        for x, (_, a, b) in enumerate(self.bins):
            self.bin_of[a:b] = x
        self.masks = [range_mask(a, b) for _, a, b in self.bins]
        L = len(topology.links)
        self.cap = np.full((L + 1, len(self.bins)), BIG, dtype=np.int64)
        for l, link in enumerate(topology.links):
            self.cap[l, :] = link.fibers
        self.flags: dict[tuple[int, int], int] = {}

    def overlapped(self, start: int, stop: int) -> list[int]:
        xs = self.bin_of[start:stop]
        out = []
        for x in xs:
            if x >= 0 and (not out or out[-1] != x):
                out.append(int(x))
        return out

    def flagged(self, fiber: int, x: int) -> bool:
        return self.flags.get((fiber, x), 0) > 0

    def on_commit(self, segments, state: SpectrumState) -> None:
        fl = self.topology.fiber_link
        for f, a, b in segments:
            own = range_mask(a, b)
            for x in self.overlapped(a, b):
                m = self.masks[x]
                if state.occupancy[f] & m == own & m:  # bin was entirely free before
                    self.cap[fl[f], x] -= 1
                if self.bins[x][1:] != (a, b):
                    self.flags[(f, x)] = self.flags.get((f, x), 0) + 1

    def on_release(self, segments, state: SpectrumState) -> None:
        fl = self.topology.fiber_link
        for f, a, b in segments:
            for x in self.overlapped(a, b):
                if not state.occupancy[f] & self.masks[x]:
                    self.cap[fl[f], x] += 1
                if self.bins[x][1:] != (a, b):
                    n = self.flags[(f, x)] - 1
                    if n:
                        self.flags[(f, x)] = n
                    else:
                        del self.flags[(f, x)]

    def from_scratch(self, state: SpectrumState) -> np.ndarray:
        cap = np.full_like(self.cap, BIG)
        for l, link in enumerate(self.topology.links):
            for x, m in enumerate(self.masks):
                cap[l, x] = sum(1 for f in link.fiber_ids if not state.occupancy[f] & m)
        return cap

    def flags_from_scratch(self, state: SpectrumState) -> dict[tuple[int, int], int]:
        out: dict[tuple[int, int], int] = {}
        for segs in state.connections.values():
            for f, a, b in segs:
                for x in self.overlapped(a, b):
                    if self.bins[x][1:] != (a, b):
                        out[(f, x)] = out.get((f, x), 0) + 1
        return out


def loss_hits(graph: ConflictGraph, kappa: int, cap: np.ndarray, cols) -> np.ndarray:
    """Boolean [psi, bins]: does taking the bin on kappa shrink that path's capacity."""
    members, fa, sa, _, _ = graph.psi_arrays(kappa)
    if not members:
        return np.zeros((0, len(cols)), dtype=bool)
    sub = cap[:, cols]
    path_min = sub[fa].min(axis=1)
    shared_min = sub[sa].min(axis=1)
    return shared_min == path_min


def capacity_losses(graph: ConflictGraph, kappa: int, cap: np.ndarray, cols, exact: bool = False) -> list:
    """zeta per bin in ``cols``; with ``exact`` the probabilities are summed as given (e.g. Fractions)."""
    hits = loss_hits(graph, kappa, cap, cols)
    _, _, _, probs, pf = graph.psi_arrays(kappa)
    if not len(probs):
        return [0] * len(cols)
    if exact:
        return [sum((p for p, h in zip(probs, hits[:, i]) if h), 0) for i in range(len(cols))]
    return (pf @ hits).tolist()


def subset_loss(graph: ConflictGraph, kappa: int, cap: np.ndarray, x: int, dec_links: frozenset[int], exact: bool = False):
    """Loss on bin x when only ``dec_links`` (subset of kappa's links) lose a free fiber."""
    total = 0
    for j in graph.psi(kappa):
        dp = graph.paths[j]
        cmin = min(int(cap[l, x]) for l in dp.links)
        if any(l in dec_links and cap[l, x] == cmin for l in dp.links):
            total = total + (dp.prob if exact else float(dp.prob))
    return total


def brute_force_losses(graph: ConflictGraph, kappa: int, cap: np.ndarray, cols) -> list:
    """Before/after difference of the probability-weighted path capacities on each bin."""
    out = []
    links = graph.paths[kappa].links
    for x in cols:
        before = after = 0
        capx = cap[:, x].copy()
        for j in graph.psi(kappa):
            dp = graph.paths[j]
            before += dp.prob * min(int(capx[l]) for l in dp.links)
        capx[list(links)] -= 1
        for j in graph.psi(kappa):
            dp = graph.paths[j]
            after += dp.prob * min(int(capx[l]) for l in dp.links)
        out.append(before - after)
    return out
