"""Non-uniform waveband minimization by reordering wavelengths.

Each wavelength gets a row of switching-code bits. For a node of degree d the
code has one bit per unordered port pair (bypass between the two ports) and one
bit per port (add/drop at that port), d(d+1)/2 bits in all. A maximal run of
1s in a column is a group of consecutive wavelengths that can be switched as a
single band, so the total band count is the number of such runs. Reordering
the rows to minimise it is a fixed-start minimum-weight Hamiltonian path
problem over the rows.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from mgon.net.paths import shortest_path
from mgon.net.sim import PolicyBase
from mgon.net.spectrum import Assignment, SpectrumState
from mgon.net.topology import Topology
from mgon.net.traffic import Request

X = -1  # don't-care cell


class WavelengthConflict(ValueError):
    pass


class SizeTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Lightpath:
    nodes: tuple[int, ...]
    wavelength: int


@dataclass
class RwaMatrix:
    cells: np.ndarray  # int8, values 0, 1 or X
    column_index: list[tuple]  # (node, "pair", (i, j)) or (node, "port", i); ports 1-based

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def __str__(self) -> str:
        sym = {0: "0", 1: "1", X: "x"}
        return "\n".join("".join(sym[int(v)] for v in row) for row in self.cells)


@dataclass
class BandPlan:
    order: tuple[int, ...]
    bands: int
    per_column: np.ndarray
    matrix: np.ndarray = field(repr=False)
    first_row: int | None = None
    strategy: str = ""


def port_map(topology: Topology) -> list[dict[int, int]]:
    """Per node: neighbor -> 1-based port number, neighbors in ascending order."""
    return [{nb: i + 1 for i, nb in enumerate(topology.neighbors(v))} for v in range(topology.node_count)]


def column_layout(topology: Topology) -> list[tuple]:
    cols: list[tuple] = []
    for v in range(topology.node_count):
        d = topology.degree(v)
        cols += [(v, "pair", (i, j)) for i in range(1, d + 1) for j in range(i + 1, d + 1)]
        cols += [(v, "port", i) for i in range(1, d + 1)]
    return cols


def encode_rwa(topology: Topology, lightpaths: list[Lightpath], width: int | None = None) -> RwaMatrix:
    """Build the ternary matrix for lightpaths occupying both directions of every hop."""
    cols = column_layout(topology)
    where = {c: k for k, c in enumerate(cols)}
    ports = port_map(topology)
    W = width if width is not None else (max((lp.wavelength for lp in lightpaths), default=-1) + 1)
    used_links: set[tuple[int, frozenset]] = set()
    used_port = np.zeros((W, topology.node_count, max((len(p) for p in ports), default=0) + 1), dtype=bool)
    ones = np.zeros((W, len(cols)), dtype=bool)
    for lp in lightpaths:
        w, path = lp.wavelength, lp.nodes
        for a, b in zip(path, path[1:]):
            key = (w, frozenset((a, b)))
            if key in used_links:
                raise WavelengthConflict(f"wavelength {w} reused on link {a}-{b}")
            used_links.add(key)
            used_port[w, a, ports[a][b]] = True
            used_port[w, b, ports[b][a]] = True
        ones[w, where[(path[0], "port", ports[path[0]][path[1]])]] = True
        ones[w, where[(path[-1], "port", ports[path[-1]][path[-2]])]] = True
        for prev, v, nxt in zip(path, path[1:], path[2:]):
            i, j = sorted((ports[v][prev], ports[v][nxt]))
            ones[w, where[(v, "pair", (i, j))]] = True
    cells = np.zeros((W, len(cols)), dtype=np.int8)
    for k, (v, kind, p) in enumerate(cols):
        if kind == "pair":
            free = ~used_port[:, v, p[0]] & ~used_port[:, v, p[1]]
        else:
            free = ~used_port[:, v, p]
        cells[free, k] = X
    cells[ones] = 1
    return RwaMatrix(cells, cols)


def fill_dont_cares(m: RwaMatrix | np.ndarray) -> np.ndarray:
    """Don't-care in the first row becomes 0; elsewhere it copies the value above."""
    cells = m.cells if isinstance(m, RwaMatrix) else np.asarray(m)
    out = cells.astype(np.int8, copy=True)
    if out.shape[0] == 0:
        return out
    out[0][out[0] == X] = 0
    for r in range(1, out.shape[0]):
        row = out[r]
        hole = row == X
        row[hole] = out[r - 1][hole]
    return out


def count_bands(b: np.ndarray) -> tuple[int, np.ndarray]:
    """Runs of 1s per column."""
    b = np.asarray(b, dtype=np.int8)
    if b.shape[0] == 0:
        return 0, np.zeros(b.shape[1] if b.ndim == 2 else 0, dtype=int)
    starts = (b[0] == 1).astype(int)
    starts = starts + ((b[1:] == 1) & (b[:-1] == 0)).sum(axis=0)
    return int(starts.sum()), starts


def distance_matrix(b: np.ndarray, first: int) -> np.ndarray:
    """Row distances; pairs leaving ``first`` count every column that is not 0->0."""
    b = np.asarray(b, dtype=bool)
    zero_one = (~b[:, None, :] & b[None, :, :]).sum(axis=2)
    d = zero_one.astype(int)
    d[first] = (b[first][None, :] | b).sum(axis=1)
    np.fill_diagonal(d, 0)
    return d


def distance_sum(b: np.ndarray, order: list[int] | tuple[int, ...] | None = None) -> int:
    """Band count as the sum of adjacent-row distances under ``order``."""
    b = np.asarray(b, dtype=bool)
    order = list(range(b.shape[0])) if order is None else list(order)
    total = 0
    for pos in range(len(order) - 1):
        i, j = order[pos], order[pos + 1]
        if pos == 0:
            total += int((b[i] | b[j]).sum())
        else:
            total += int((~b[i] & b[j]).sum())
    return total


def nearest_neighbor(d: np.ndarray, first: int) -> tuple[list[int], int]:
    order = [first]
    rest = [r for r in range(d.shape[0]) if r != first]
    cur, weight = first, 0
    while rest:
        nxt = min(rest, key=lambda j: (d[cur, j], j))
        weight += int(d[cur, nxt])
        rest.remove(nxt)
        order.append(nxt)
        cur = nxt
    return order, weight


def _nn_search(filled: np.ndarray) -> tuple[tuple[int, ...], int, int | None]:
    W = filled.shape[0]
    best_order = tuple(range(W))
    best, _ = count_bands(filled)
    best_first = None
    if W < 2:
        return best_order, best, best_first
    for f in range(W):
        order, weight = nearest_neighbor(distance_matrix(filled, f), f)
        if weight < best:
            best, best_order, best_first = weight, tuple(order), f
    return best_order, best, best_first


def _plan(matrix: np.ndarray, order, strategy: str, first=None) -> BandPlan:
    B, per = count_bands(matrix)
    return BandPlan(tuple(order), B, per, matrix, first, strategy)


def solve_nn(filled: np.ndarray) -> BandPlan:
    order, _, first = _nn_search(filled)
    return _plan(filled[list(order)], order, "nn", first)


def solve_rdc(m: RwaMatrix) -> BandPlan:
    filled = fill_dont_cares(m)
    order, _, first = _nn_search(filled)
    refilled = fill_dont_cares(m.cells[list(order)])
    return _plan(refilled, order, "rdc", first)


def first_fit_rwa(topology: Topology, demands: list[tuple[int, int]]) -> list[Lightpath]:
    """Shortest path plus first-fit wavelength with an unbounded wavelength pool."""
    busy: list[set[frozenset]] = []
    out = []
    for s, d in demands:
        path = shortest_path(topology, s, d)
        hops = {frozenset(h) for h in zip(path, path[1:])}
        w = next((k for k, used in enumerate(busy) if not (used & hops)), len(busy))
        if w == len(busy):
            busy.append(set())
        busy[w] |= hops
        out.append(Lightpath(path, w))
    return out


def sort_by_path_length(topology: Topology, demands: list[tuple[int, int]]) -> list[tuple[int, int]]:
    return sorted(demands, key=lambda sd: -len(shortest_path(topology, *sd)))


def solve_bmp(m: RwaMatrix | None, strategy: str, context: dict | None = None) -> BandPlan:
    """Strategies: ``nn`` and ``rdc`` reorder ``m``; ``st`` re-routes the demands in
    ``context`` (keys ``topology``, ``demands``) longest-first, then applies RDC."""
    strategy = strategy.lower()
    if strategy == "nn":
        return solve_nn(fill_dont_cares(m))
    if strategy == "rdc":
        return solve_rdc(m)
    if strategy == "st":
        topo, demands = context["topology"], context["demands"]
        lps = first_fit_rwa(topo, sort_by_path_length(topo, demands))
        plan = solve_rdc(encode_rwa(topo, lps))
        plan.strategy = "st"
        return plan
    if strategy == "oracle":
        return oracle_bmp(m)
    raise ValueError(f"unknown strategy {strategy!r}")


def oracle_bmp(m: RwaMatrix) -> BandPlan:
    """Exact minimum over all row orders, re-filling don't-cares per order."""
    W = m.cells.shape[0]
    if W > 8:
        raise SizeTooLarge(f"exhaustive search limited to 8 rows, got {W}")
    cells = m.cells.astype(np.int8)
    ones = cells == 1
    best_total, best_order = [None], [()]

    def dfs(prefix, left, prev, total):
        # every column still at 0 that some remaining row sets to 1 starts at least one more band
        if best_total[0] is not None:
            pending = (prev == 0) & ones[left].any(axis=0) if left else np.zeros(0, bool)
            if total + int(pending.sum()) >= best_total[0]:
                return
        if not left:
            best_total[0], best_order[0] = total, tuple(prefix)
            return
        for i in left:
            v = cells[i]
            step = int((ones[i] & (prev == 0)).sum())
            dfs(prefix + [i], [j for j in left if j != i], np.where(v == X, prev, v), total + step)

    dfs([], list(range(W)), np.zeros(cells.shape[1], dtype=np.int8), 0)
    order = best_order[0]
    refilled = fill_dont_cares(cells[list(order)])
    B, per = count_bands(refilled)
    return BandPlan(order, B, per, refilled, order[0] if order else None, "oracle")


def identity_bands(m: RwaMatrix) -> int:
    return count_bands(fill_dont_cares(m))[0]


def switching_elements(m: RwaMatrix) -> int:
    """Distinct (wavelength, node) pairs where the wavelength is switched, added or dropped."""
    nodes = np.array([c[0] for c in m.column_index])
    total = 0
    for row in m.cells:
        total += len(np.unique(nodes[row == 1]))
    return total


# ---------------------------------------------------------------------------
# dynamic traffic: expand the all-to-all band layout to a larger spectrum


@dataclass
class Expansion:
    multiplicity: list[int]  # per row of the band plan, in plan order
    layout: np.ndarray  # expanded binary matrix
    designated: dict[tuple[int, int], list[int]]  # route -> expanded wavelength ids
    bands: int


def expand_bands(
    plan: BandPlan,
    W_m: int,
    W_s: int,
    route_rows: dict[tuple[int, int], int] | None = None,
) -> Expansion:
    """Duplicate every row of ``plan`` in place so the layout spans ``W_s`` wavelengths.

    ``route_rows`` maps a route to the original wavelength it received in the
    all-to-all assignment; its designated set is every copy of that row.
    """
    if W_s < W_m:
        raise ValueError(f"W_s={W_s} smaller than W_m={W_m}")
    if len(plan.order) != W_m:
        raise ValueError("plan row count differs from W_m")
    n, r = divmod(W_s, W_m)
    mult = [n + 1 if pos < r else n for pos in range(W_m)]
    layout = np.repeat(plan.matrix, mult, axis=0)
    offsets = np.concatenate([[0], np.cumsum(mult)])
    pos_of_row = {row: pos for pos, row in enumerate(plan.order)}
    designated = {}
    for route, row in (route_rows or {}).items():
        pos = pos_of_row[row]
        designated[route] = list(range(int(offsets[pos]), int(offsets[pos + 1])))
    return Expansion(mult, layout, designated, count_bands(layout)[0])


class DesignatedFirstFit(PolicyBase):
    """Per arrival: try the route's designated wavelengths, then all others ascending.

    Each connection takes the same wavelength on both directions of every hop
    of the shortest path (one fiber per link, one slot per wavelength).
    """

    name = "designated-ff"

    def __init__(self, topology: Topology, designated: dict[tuple[int, int], list[int]]):
        self.topology = topology
        self.designated = designated
        self._links: dict[tuple[int, int], tuple[int, ...]] = {}

    def links(self, s: int, d: int) -> tuple[int, ...]:
        key = (s, d)
        if key not in self._links:
            path = shortest_path(self.topology, min(s, d), max(s, d))
            fwd = self.topology.path_links(path)
            back = self.topology.path_links(path[::-1])
            self._links[key] = fwd + back
        return self._links[key]

    def admit(self, request: Request, state: SpectrumState) -> Assignment | None:
        links = self.links(request.source, request.destination)
        key = (min(request.source, request.destination), max(request.source, request.destination))
        preferred = self.designated.get(key, [])
        seen = set(preferred)
        candidates = list(preferred) + [w for w in range(state.capacity) if w not in seen]
        occ = state.occupancy
        fibers = [self.topology.links[ln].first_fiber for ln in links]
        for w in candidates:
            bit = 1 << w
            if all(not occ[f] & bit for f in fibers):
                return Assignment(tuple((f, w, w + 1) for f in fibers))
        return None


def designated_ff_policy(topology: Topology, designated: dict[tuple[int, int], list[int]]) -> DesignatedFirstFit:
    return DesignatedFirstFit(topology, designated)


def all_to_all_demands(node_count: int, copies: int = 1) -> list[tuple[int, int]]:
    """Unordered node pairs, repeated ``copies`` times in rounds."""
    pairs = [(s, d) for s in range(node_count) for d in range(s + 1, node_count)]
    return pairs * copies
