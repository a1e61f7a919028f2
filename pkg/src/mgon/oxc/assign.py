"""Fiber and wavelength assignment inside one multi-fiber node.

Requests are grouped by (input fiber, output link). An assignment maps each
request to an output fiber on its link and a wavelength, such that no fiber
carries a wavelength twice on either side of the node. Wavelengths come from
an edge coloring of the input-fiber x output-fiber multigraph.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from mgon.net.rng import make_rng
from mgon.oxc.coloring import color_bipartite


@dataclass(frozen=True)
class NodeSpec:
    D: int
    F: int | tuple[int, ...]
    W: int
    arch: str = "conv"  # conv | flex | hier | flexband
    k: int = 1
    B: int = 4

    def __post_init__(self):
        if self.D < 1 or self.W < 1 or self.k < 1 or self.B < 1:
            raise ValueError("D, W, k and B must be >= 1")
        if min(self.fibers) < 1:
            raise ValueError("every link needs at least one fiber")

    @property
    def fibers(self) -> tuple[int, ...]:
        if isinstance(self.F, int):
            return (self.F,) * self.D
        if len(self.F) != self.D:
            raise ValueError("per-link fiber list length differs from D")
        return tuple(self.F)

    @property
    def N(self) -> int:
        return sum(self.fibers)

    def link_fibers(self, d: int) -> range:
        off = sum(self.fibers[:d])
        return range(off, off + self.fibers[d])

    def capacity(self, d: int) -> int:
        return self.W * self.fibers[d]


@dataclass(frozen=True)
class RequestSlot:
    input_fiber: int
    link: int
    index: int  # position within its (input fiber, link) group
    output_fiber: int | None = None
    wavelength: int | None = None

    @property
    def blocked(self) -> bool:
        return self.output_fiber is None


@dataclass
class NodeAssignment:
    spec: NodeSpec
    slots: list[RequestSlot] = field(default_factory=list)

    @property
    def blocked(self) -> int:
        return sum(1 for s in self.slots if s.blocked)

    @property
    def accepted(self) -> list[RequestSlot]:
        return [s for s in self.slots if not s.blocked]

    def blocked_per_link(self) -> list[int]:
        out = [0] * self.spec.D
        for s in self.slots:
            if s.blocked:
                out[s.link] += 1
        return out

    def fiber_loads(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for s in self.accepted:
            out[s.output_fiber] = out.get(s.output_fiber, 0) + 1
        return out

    def spread(self) -> dict[tuple[int, int], set[int]]:
        """Output fibers used by each (input fiber, link) group."""
        out: dict[tuple[int, int], set[int]] = {}
        for s in self.accepted:
            out.setdefault((s.input_fiber, s.link), set()).add(s.output_fiber)
        return out


def as_demand(spec: NodeSpec, demand) -> np.ndarray:
    q = np.asarray(demand, dtype=int)
    if q.shape != (spec.N, spec.D):
        raise ValueError(f"demand shape {q.shape} != ({spec.N}, {spec.D})")
    if (q < 0).any():
        raise ValueError("negative demand")
    if (q.sum(axis=1) > spec.W).any():
        raise ValueError("an input fiber carries more than W requests")
    return q


def _color(spec: NodeSpec, groups: list[tuple[int, int, list[int | None]]]) -> NodeAssignment:
    """Build slots from per-group fiber lists and color the accepted requests."""
    slots_raw = []
    for f, d, fibers in groups:
        for i, of in enumerate(fibers):
            slots_raw.append((f, d, i, of))
    edges = [(f, of) for f, d, i, of in slots_raw if of is not None]
    colors = color_bipartite(edges, spec.N, spec.N, spec.W) if edges else []
    it = iter(colors)
    slots = []
    for f, d, i, of in slots_raw:
        slots.append(RequestSlot(f, d, i, of, None if of is None else next(it)))
    return NodeAssignment(spec, slots)


def flex_assign(spec: NodeSpec, demand) -> NodeAssignment:
    """Fill output fibers of each link in order; a group splits over at most two fibers."""
    q = as_demand(spec, demand)
    W = spec.W
    eps = [0] * spec.D  # current fiber position per link
    used = [0] * spec.D  # requests on the current fiber
    groups = []
    for f in range(spec.N):
        for d in range(spec.D):
            need = int(q[f, d])
            if need == 0:
                continue
            fibers: list[int | None] = []
            link = spec.link_fibers(d)
            while need > 0:
                if eps[d] >= len(link):
                    fibers += [None] * need
                    break
                take = min(need, W - used[d])
                fibers += [link[eps[d]]] * take
                used[d] += take
                need -= take
                if used[d] == W:
                    eps[d] += 1
                    used[d] = 0
            groups.append((f, d, fibers))
    return _color(spec, groups)


def _place_groups(spec: NodeSpec, d: int, sizes: list[tuple[int, int]], choice: list[int]) -> list:
    """Put whole groups on given fibers; overflow beyond W blocks the group's tail."""
    load: dict[int, int] = {}
    out = []
    for (f, n), of in zip(sizes, choice):
        room = spec.W - load.get(of, 0)
        take = min(n, max(room, 0))
        load[of] = load.get(of, 0) + take
        out.append((f, d, [of] * take + [None] * (n - take)))
    return out


def hrfs_assign(
    spec: NodeSpec,
    demand,
    seed: int | None = None,
    selection: dict[tuple[int, int], int] | None = None,
) -> NodeAssignment:
    """Each (input fiber, link) group goes to one uniformly random fiber of its link.

    ``selection`` maps (input fiber, link) to a fiber index within the link and
    overrides the random draw. Groups are processed in input-fiber order, so
    overflow blocks the requests from higher-numbered input fibers.
    """
    q = as_demand(spec, demand)
    rng = make_rng(0 if seed is None else seed, "hrfs")
    groups = []
    for d in range(spec.D):
        link = spec.link_fibers(d)
        draws = rng.integers(0, len(link), size=spec.N)
        sizes, choice = [], []
        for f in range(spec.N):
            if q[f, d] == 0:
                continue
            j = selection[(f, d)] if selection and (f, d) in selection else int(draws[f])
            sizes.append((f, int(q[f, d])))
            choice.append(link[j])
        groups += _place_groups(spec, d, sizes, choice)
    groups.sort(key=lambda g: (g[0], g[1]))
    return _color(spec, groups)


def hsa_assign(spec: NodeSpec, demand) -> NodeAssignment:
    """Largest group first onto the fiber with the most remaining room."""
    q = as_demand(spec, demand)
    groups = []
    for d in range(spec.D):
        link = list(spec.link_fibers(d))
        room = {of: spec.W for of in link}
        order = sorted((f for f in range(spec.N) if q[f, d] > 0), key=lambda f: (-int(q[f, d]), f))
        for f in order:
            n = int(q[f, d])
            of = max(link, key=lambda x: (room[x], -x))
            take = min(n, room[of])
            room[of] -= take
            groups.append((f, d, [of] * take + [None] * (n - take)))
    groups.sort(key=lambda g: (g[0], g[1]))
    return _color(spec, groups)


def hier_k2_assign(spec: NodeSpec, demand) -> NodeAssignment:
    if spec.k < 2:
        raise ValueError("HIER with k >= 2 required")
    out = flex_assign(spec, demand)
    worst = max((len(v) for v in out.spread().values()), default=0)
    if worst > 2:
        raise AssertionError(f"fiber spread {worst} exceeds 2")
    return out


def lemma_violations(a: NodeAssignment) -> list[str]:
    """Check the three structural guarantees of the in-order fill."""
    spec = a.spec
    problems = []
    loads = a.fiber_loads()
    for of, n in loads.items():
        if n > spec.W:
            problems.append(f"fiber {of} carries {n} > W")
    for d in range(spec.D):
        partial = [of for of in spec.link_fibers(d) if 0 < loads.get(of, 0) < spec.W]
        if len(partial) > 1:
            problems.append(f"link {d} has {len(partial)} partially filled fibers")
    for key, fibers in a.spread().items():
        if len(fibers) > 2:
            problems.append(f"group {key} spread over {len(fibers)} fibers")
    return problems


def coloring_violations(a: NodeAssignment) -> list[str]:
    problems = []
    seen_in: set[tuple[int, int]] = set()
    seen_out: set[tuple[int, int]] = set()
    for s in a.accepted:
        if not 0 <= s.wavelength < a.spec.W:
            problems.append(f"wavelength {s.wavelength} outside [0, W)")
        if (s.input_fiber, s.wavelength) in seen_in:
            problems.append(f"input fiber {s.input_fiber} reuses wavelength {s.wavelength}")
        if (s.output_fiber, s.wavelength) in seen_out:
            problems.append(f"output fiber {s.output_fiber} reuses wavelength {s.wavelength}")
        seen_in.add((s.input_fiber, s.wavelength))
        seen_out.add((s.output_fiber, s.wavelength))
    return problems


def random_demand(spec: NodeSpec, rng: np.random.Generator, p: float) -> np.ndarray:
    """Bin(W, p) requests per input fiber, each to a uniformly random output link."""
    n = rng.binomial(spec.W, p, size=spec.N)
    return rng.multinomial(n, np.full(spec.D, 1.0 / spec.D))
