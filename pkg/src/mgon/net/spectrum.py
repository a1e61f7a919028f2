"""Per-fiber slot occupancy, live connections and per-node band tables.

Occupancy of each fiber is a Python int used as a bitmap: bit ``s`` set means
slot ``s`` (0-based) is in use. Slot ranges are half-open ``(start, stop)``.
A WDM wavelength is simply a range of width 1.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable

from mgon.net.topology import Topology

Segment = tuple[int, int, int]  # (fiber id, start, stop)
BandKey = tuple[int, int, int]  # (node, input fiber, output fiber)


class ConflictingAllocation(RuntimeError):
    pass


class UnknownConnection(KeyError):
    pass


def range_mask(start: int, stop: int) -> int:
    return ((1 << (stop - start)) - 1) << start


def window_starts(occ: int, width: int, capacity: int) -> int:
    """Bitmask of start slots ``s`` such that ``[s, s+width)`` is free and in range."""
    if width <= 0 or width > capacity:
        return 0
    free = ~occ & ((1 << capacity) - 1)
    run = 1
    while run < width and free:
        step = min(run, width - run)
        free &= free >> step
        run += step
    return free


def lowest_bit(x: int) -> int:
    return (x & -x).bit_length() - 1


def iter_bits(x: int) -> Iterable[int]:
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


@dataclass(frozen=True)
class Assignment:
    """What a policy hands back to the simulator: slot segments plus band usage."""

    segments: tuple[Segment, ...]
    bands: tuple[BandKey, ...] = ()
    cost: float = 0.0

    @property
    def start(self) -> int:
        return self.segments[0][1]

    @property
    def stop(self) -> int:
        return self.segments[0][2]


class SpectrumState:
    """Mutable network occupancy. Mutations go through ``allocate``/``release``."""

    def __init__(self, topology: Topology, capacity: int | None = None):
        self.topology = topology
        self.capacity = topology.slots_per_fiber if capacity is None else capacity
        self.occupancy: list[int] = [0] * topology.fiber_count
        self.connections: dict[object, tuple[Segment, ...]] = {}
        self.connection_bands: dict[object, tuple[BandKey, ...]] = {}
        # node -> input fiber -> output fiber -> number of live connections
        self.band_tables: list[dict[int, dict[int, int]]] = [
            defaultdict(dict) for _ in range(topology.node_count)
        ]

    # -- queries -------------------------------------------------------------
    def _check_range(self, start: int, stop: int) -> None:
        if not (0 <= start < stop <= self.capacity):
            raise ValueError(f"slot range [{start}, {stop}) outside [0, {self.capacity})")

    def is_free(self, fiber: int, start: int, stop: int) -> bool:
        return not (self.occupancy[fiber] & range_mask(start, stop))

    def availability(self, link: int, start: int, stop: int) -> int:
        """Number of fibers on ``link`` whose slots ``[start, stop)`` are all free."""
        self._check_range(start, stop)
        m = range_mask(start, stop)
        ln = self.topology.links[link]
        occ = self.occupancy
        return sum(1 for f in ln.fiber_ids if not occ[f] & m)

    def free_fiber(self, link: int, start: int, stop: int) -> int | None:
        """Lowest-id fiber on ``link`` with the range free, or None."""
        m = range_mask(start, stop)
        occ = self.occupancy
        for f in self.topology.links[link].fiber_ids:
            if not occ[f] & m:
                return f
        return None

    def link_window_starts(self, link: int, width: int) -> int:
        """Starts usable on at least one fiber of ``link``."""
        acc = 0
        for f in self.topology.links[link].fiber_ids:
            acc |= window_starts(self.occupancy[f], width, self.capacity)
        return acc

    def path_window_starts(self, links: Iterable[int], width: int) -> int:
        acc = (1 << self.capacity) - 1
        for ln in links:
            acc &= self.link_window_starts(ln, width)
            if not acc:
                break
        return acc

    def bands(self, node: int, fin: int) -> dict[int, int]:
        return self.band_tables[node].get(fin, {})

    def band_count(self, node: int, fin: int) -> int:
        return len(self.band_tables[node].get(fin, ()))

    def has_band(self, node: int, fin: int, fout: int) -> bool:
        return fout in self.band_tables[node].get(fin, ())

    def fiber_msu(self, fiber: int) -> int:
        """Highest used slot index, 1-based (0 if the fiber is empty)."""
        return self.occupancy[fiber].bit_length()

    def used_bits(self) -> int:
        return sum(o.bit_count() for o in self.occupancy)

    # -- mutations -----------------------------------------------------------
    def allocate(
        self,
        conn_id: object,
        segments: Iterable[Segment],
        bands: Iterable[BandKey] = (),
    ) -> None:
        if conn_id in self.connections:
            raise ConflictingAllocation(f"connection {conn_id!r} already live")
        segs = tuple(segments)
        occ = self.occupancy
        staged: dict[int, int] = {}
        for f, start, stop in segs:
            self._check_range(start, stop)
            m = range_mask(start, stop)
            cur = staged.get(f, occ[f])
            if cur & m:
                raise ConflictingAllocation(
                    f"connection {conn_id!r}: fiber {f} slots [{start}, {stop}) busy"
                )
            staged[f] = cur | m
        for f, bits in staged.items():
            occ[f] = bits
        self.connections[conn_id] = segs
        bkeys = tuple(bands)
        if bkeys:
            self.connection_bands[conn_id] = bkeys
            for node, fin, fout in bkeys:
                row = self.band_tables[node].setdefault(fin, {})
                row[fout] = row.get(fout, 0) + 1

    def release(self, conn_id: object) -> tuple[Segment, ...]:
        try:
            segs = self.connections.pop(conn_id)
        except KeyError:
            raise UnknownConnection(conn_id) from None
        occ = self.occupancy
        for f, start, stop in segs:
            occ[f] &= ~range_mask(start, stop)
        # a band disappears with the last connection that uses it
        for node, fin, fout in self.connection_bands.pop(conn_id, ()):
            row = self.band_tables[node][fin]
            row[fout] -= 1
            if row[fout] == 0:
                del row[fout]
                if not row:
                    del self.band_tables[node][fin]
        return segs

    def copy(self) -> "SpectrumState":
        c = SpectrumState.__new__(SpectrumState)
        c.topology = self.topology
        c.capacity = self.capacity
        c.occupancy = list(self.occupancy)
        c.connections = dict(self.connections)
        c.connection_bands = dict(self.connection_bands)
        c.band_tables = [
            defaultdict(dict, {k: dict(v) for k, v in t.items()}) for t in self.band_tables
        ]
        return c


def availability(state: SpectrumState, link: int, slot_range: tuple[int, int]) -> int:
    return state.availability(link, slot_range[0], slot_range[1])


def allocate(state: SpectrumState, conn_id: object, assignment: Iterable[Segment]) -> None:
    state.allocate(conn_id, assignment)


def release(state: SpectrumState, conn_id: object) -> None:
    state.release(conn_id)
