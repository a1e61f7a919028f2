"""Time-slotted VM and subcarrier occupancy, h_v(t) and s_e^c(t).

VM usage is an int array [node, slot]; spectrum is one Python-int bitmask
per (link, slot). Both grow by doubling when a slot past the horizon is
touched, so static scheduling never runs out of time.
"""

from __future__ import annotations

import numpy as np

from mgon.cosched.model import ClusterNet
from mgon.net.spectrum import lowest_bit, range_mask, window_starts


class ResourceState:
    def __init__(self, net: ClusterNet, horizon: int = 64):
        self.net = net
        self.cap = np.array(net.vms, dtype=np.int64)
        self.used = np.zeros((net.node_count, horizon + 1), dtype=np.int64)  # column 0 unused
        self.spec: list[list[int]] = [[0] * (horizon + 1) for _ in net.topology.links]
        # last slot holding anything; every slot after it is idle
        self.busy_until = 0

    @property
    def horizon(self) -> int:
        return self.used.shape[1] - 1

    def _grow(self, slot: int) -> None:
        h = self.horizon
        if slot <= h:
            return
        while h < slot:
            h *= 2
        extra = h - self.horizon
        self.used = np.concatenate([self.used, np.zeros((self.used.shape[0], extra), dtype=np.int64)], axis=1)
        for row in self.spec:
            row.extend([0] * extra)

    def copy(self) -> "ResourceState":
        out = ResourceState.__new__(ResourceState)
        out.net = self.net
        out.cap = self.cap
        out.used = self.used.copy()
        out.spec = [list(r) for r in self.spec]
        out.busy_until = self.busy_until
        return out

    def same_as(self, other: "ResourceState") -> bool:
        h = max(self.horizon, other.horizon)
        self._grow(h)
        other._grow(h)
        return bool(np.array_equal(self.used, other.used)) and self.spec == other.spec

    # -- VMs -------------------------------------------------------------------
    def free_vms(self, node: int, slot: int) -> int:
        if slot > self.horizon:
            return int(self.cap[node])
        return int(self.cap[node] - self.used[node, slot])

    def min_free_vms(self, node: int, start: int, stop: int) -> int:
        """Fewest free VMs on ``node`` over slots start..stop inclusive."""
        self._grow(stop)
        return int(self.cap[node] - self.used[node, start : stop + 1].max())

    def reserve_vms(self, node: int, k: int, start: int, stop: int) -> None:
        self._grow(stop)
        self.used[node, start : stop + 1] += k
        self.busy_until = max(self.busy_until, stop)

    def release_vms(self, node: int, k: int, start: int, stop: int) -> None:
        self.used[node, start : stop + 1] -= k

    # -- spectrum --------------------------------------------------------------
    def blocked(self, links, start: int, stop: int) -> int:
        self._grow(stop)
        m = 0
        for l in links:
            row = self.spec[l]
            for t in range(start, stop + 1):
                m |= row[t]
        return m

    def first_band(self, links, start: int, stop: int, width: int) -> int | None:
        """Lowest first subcarrier of a ``width`` band free on every link for start..stop,
        at least G subcarriers away from any other band."""
        F = self.net.subcarriers
        occ = self.blocked(links, start, stop)
        G = self.net.guard
        if occ and G:
            grown = occ
            for s in range(1, G + 1):
                grown |= (occ << s) | (occ >> s)
            occ = grown & range_mask(0, F)
        starts = window_starts(occ, width, F)
        return lowest_bit(starts) if starts else None

    def reserve_band(self, links, first: int, width: int, start: int, stop: int) -> None:
        self._grow(stop)
        m = range_mask(first, first + width)
        for l in links:
            row = self.spec[l]
            for t in range(start, stop + 1):
                row[t] |= m
        self.busy_until = max(self.busy_until, stop)

    def release_band(self, links, first: int, width: int, start: int, stop: int) -> None:
        m = ~range_mask(first, first + width)
        for l in links:
            row = self.spec[l]
            for t in range(start, stop + 1):
                row[t] &= m
