"""Directed multi-fiber topology and its text file format.

File format (UTF-8, ``#`` starts a comment)::

    nodes 4
    slots 352
    link 0 1 3      # bidirectional link 0<->1 with 3 fibers per direction

Every ``link`` line expands into two directed links with equal fiber counts.
Fibers get global integer ids, contiguous per directed link, in link order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import networkx as nx


class TopologyError(ValueError):
    """Base class for topology file problems; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class ParseError(TopologyError):
    pass


class DuplicateLink(TopologyError):
    pass


class OutOfRange(TopologyError):
    pass


@dataclass(frozen=True)
class Link:
    id: int
    src: int
    dst: int
    fibers: int
    first_fiber: int

    @property
    def fiber_ids(self) -> range:
        return range(self.first_fiber, self.first_fiber + self.fibers)


@dataclass(frozen=True)
class Topology:
    node_count: int
    slots_per_fiber: int
    links: tuple[Link, ...]
    name: str = ""
    _index: dict[tuple[int, int], int] = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_edges(
        cls,
        node_count: int,
        edges: list[tuple[int, int, int]],
        slots_per_fiber: int,
        name: str = "",
        directed: bool = False,
    ) -> "Topology":
        """Build from ``(u, v, fibers)`` triples; undirected triples are mirrored."""
        if node_count < 1:
            raise TopologyError("node count must be positive")
        if slots_per_fiber < 1:
            raise TopologyError("slots per fiber must be positive")
        links: list[Link] = []
        index: dict[tuple[int, int], int] = {}
        next_fiber = 0
        pairs = []
        for u, v, f in edges:
            pairs.append((u, v, f))
            if not directed:
                pairs.append((v, u, f))
        for u, v, f in pairs:
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise OutOfRange(f"node id out of range in link {u}-{v}")
            if u == v:
                raise TopologyError(f"self-loop at node {u}")
            if f < 1:
                raise TopologyError(f"link {u}-{v} needs at least one fiber")
            if (u, v) in index:
                raise DuplicateLink(f"duplicate link {u}-{v}")
            index[(u, v)] = len(links)
            links.append(Link(len(links), u, v, f, next_fiber))
            next_fiber += f
        return cls(node_count, slots_per_fiber, tuple(links), name, index)

    # -- lookups -------------------------------------------------------------
    def link_id(self, u: int, v: int) -> int:
        return self._index[(u, v)]

    def has_link(self, u: int, v: int) -> bool:
        return (u, v) in self._index

    def link(self, u: int, v: int) -> Link:
        return self.links[self._index[(u, v)]]

    @property
    def fiber_count(self) -> int:
        if not self.links:
            return 0
        last = self.links[-1]
        return last.first_fiber + last.fibers

    @cached_property
    def fiber_link(self) -> tuple[int, ...]:
        """Directed link id of every global fiber id."""
        out: list[int] = []
        for ln in self.links:
            out.extend([ln.id] * ln.fibers)
        return tuple(out)

    @cached_property
    def out_links(self) -> tuple[tuple[int, ...], ...]:
        acc: list[list[int]] = [[] for _ in range(self.node_count)]
        for ln in self.links:
            acc[ln.src].append(ln.id)
        return tuple(tuple(sorted(a, key=lambda i: self.links[i].dst)) for a in acc)

    @cached_property
    def in_links(self) -> tuple[tuple[int, ...], ...]:
        acc: list[list[int]] = [[] for _ in range(self.node_count)]
        for ln in self.links:
            acc[ln.dst].append(ln.id)
        return tuple(tuple(sorted(a, key=lambda i: self.links[i].src)) for a in acc)

    def neighbors(self, v: int) -> list[int]:
        """Distinct neighbors of ``v`` (either direction), ascending."""
        nb = {self.links[i].dst for i in self.out_links[v]}
        nb |= {self.links[i].src for i in self.in_links[v]}
        return sorted(nb)

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def port_count(self, v: int) -> int:
        """N_v: total number of input fibers at node ``v``."""
        return sum(self.links[i].fibers for i in self.in_links[v])

    def path_links(self, nodes: list[int] | tuple[int, ...]) -> tuple[int, ...]:
        return tuple(self._index[(a, b)] for a, b in zip(nodes, nodes[1:]))

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.node_count))
        for ln in self.links:
            g.add_edge(ln.src, ln.dst, fibers=ln.fibers, id=ln.id)
        return g

    def undirected_edges(self) -> list[tuple[int, int, int]]:
        return [(ln.src, ln.dst, ln.fibers) for ln in self.links if ln.src < ln.dst]

    def with_slots(self, slots: int) -> "Topology":
        return Topology.from_edges(
            self.node_count,
            [(ln.src, ln.dst, ln.fibers) for ln in self.links],
            slots,
            self.name,
            directed=True,
        )

    def dumps(self) -> str:
        lines = [f"nodes {self.node_count}", f"slots {self.slots_per_fiber}"]
        lines += [f"link {u} {v} {f}" for u, v, f in self.undirected_edges()]
        return "\n".join(lines) + "\n"


def parse_topology(text: str, name: str = "") -> Topology:
    nodes: int | None = None
    slots: int | None = None
    edges: list[tuple[int, int, int]] = []
    seen: set[frozenset[int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        key, args = parts[0], parts[1:]
        try:
            values = [int(a) for a in args]
        except ValueError:
            raise ParseError(f"expected integers after '{key}'", lineno) from None
        if key == "nodes" and len(values) == 1:
            nodes = values[0]
        elif key == "slots" and len(values) == 1:
            slots = values[0]
        elif key == "link" and len(values) == 3:
            if nodes is None:
                raise ParseError("'link' before 'nodes'", lineno)
            u, v, f = values
            if not (0 <= u < nodes and 0 <= v < nodes):
                raise OutOfRange(f"node id out of range [0, {nodes})", lineno)
            if u == v:
                raise ParseError("self-loop", lineno)
            if f < 1:
                raise ParseError("fiber count must be >= 1", lineno)
            pair = frozenset((u, v))
            if pair in seen:
                raise DuplicateLink(f"duplicate link {u}-{v}", lineno)
            seen.add(pair)
            edges.append((u, v, f))
        else:
            raise ParseError(f"unrecognised directive '{line}'", lineno)
    if nodes is None or nodes < 1:
        raise ParseError("missing or invalid 'nodes' line")
    if slots is None or slots < 1:
        raise ParseError("missing or invalid 'slots' line")
    return Topology.from_edges(nodes, edges, slots, name)


def load_topology(path: str | Path) -> Topology:
    p = Path(path)
    if not p.exists():
        # bundled topologies can be referenced by bare name
        from mgon.net import data_path

        alt = data_path(p.name if p.suffix else p.name + ".topo")
        if alt.exists():
            p = alt
    return parse_topology(p.read_text(encoding="utf-8"), name=p.stem)
