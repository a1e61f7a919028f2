"""Reference policy: fixed shortest path with first-fit spectrum."""

from __future__ import annotations

from mgon.net.paths import shortest_path
from mgon.net.sim import PolicyBase
from mgon.net.spectrum import Assignment, SpectrumState, lowest_bit
from mgon.net.traffic import Request


class ShortestPathFirstFit(PolicyBase):
    name = "ff-ssp"

    def __init__(self, topology):
        self.topology = topology
        self._paths: dict[tuple[int, int], tuple[int, ...]] = {}

    def links(self, s: int, d: int) -> tuple[int, ...]:
        key = (s, d)
        if key not in self._paths:
            self._paths[key] = self.topology.path_links(shortest_path(self.topology, s, d))
        return self._paths[key]

    def admit(self, request: Request, state: SpectrumState) -> Assignment | None:
        links = self.links(request.source, request.destination)
        starts = state.path_window_starts(links, request.demand)
        if not starts:
            return None
        a = lowest_bit(starts)
        b = a + request.demand
        return Assignment(tuple((state.free_fiber(ln, a, b), a, b) for ln in links))
