"""Dedicated spectrum segments, one per request size, cut into size-aligned bins."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence


class PartitionTooSmall(UserWarning):
    pass


@dataclass(frozen=True)
class Segment:
    size: int  # request size b_j served by this segment
    start: int  # 0-based first slot
    length: int  # P_j, a multiple of size

    @property
    def stop(self) -> int:
        return self.start + self.length

    @property
    def bins(self) -> int:
        return self.length // self.size

    def bin_range(self, x: int) -> tuple[int, int]:
        a = self.start + x * self.size
        return a, a + self.size


@dataclass(frozen=True)
class PartitionPlan:
    S: int
    segments: tuple[Segment, ...]

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(s.length for s in self.segments)

    @property
    def bin_counts(self) -> tuple[int, ...]:
        return tuple(s.bins for s in self.segments)

    @property
    def unassigned(self) -> int:
        return self.S - sum(self.lengths)

    @property
    def total_bins(self) -> int:
        return sum(self.bin_counts)

    def segment_for(self, size: int) -> int:
        for j, s in enumerate(self.segments):
            if s.size == size:
                return j
        raise KeyError(f"no segment for request size {size}")

    def bin_offset(self, j: int) -> int:
        """Global index of segment ``j``'s first bin."""
        return sum(s.bins for s in self.segments[:j])

    def global_bins(self) -> list[tuple[int, int, int]]:
        """(segment, start, stop) of every bin in spectrum order."""
        out = []
        for j, seg in enumerate(self.segments):
            for x in range(seg.bins):
                out.append((j, *seg.bin_range(x)))
        return out


def plan_partitions(S: int, sizes: Sequence[int], probs: Sequence[float]) -> PartitionPlan:
    """Segment lengths proportional to rho_j * b_j, rounded to whole bins.

    Each size gets floor(raw_j / b_j) bins; then, in order of decreasing
    fractional remainder (ties by size order), one extra bin is added
    whenever it still fits in S. Leftover slots stay unassigned.
    """
    if len(sizes) != len(probs) or not sizes:
        raise ValueError("sizes and probs must be non-empty and aligned")
    if abs(math.fsum(probs) - 1.0) > 1e-9:
        raise ValueError("probabilities must sum to 1")
    if sum(sizes) > S:
        raise ValueError("spectrum too small for one bin of every size")
    weight = math.fsum(p * b for p, b in zip(probs, sizes))
    raw_bins = [S * p * b / weight / b for p, b in zip(probs, sizes)]
    bins = [math.floor(r + 1e-12) for r in raw_bins]
    used = sum(n * b for n, b in zip(bins, sizes))
    order = sorted(range(len(sizes)), key=lambda j: (-(raw_bins[j] - bins[j]), j))
    for j in order:
        if raw_bins[j] - bins[j] <= 1e-12:
            continue
        if used + sizes[j] <= S:
            bins[j] += 1
            used += sizes[j]
    segs, start = [], 0
    for b, n in zip(sizes, bins):
        segs.append(Segment(b, start, n * b))
        start += n * b
    if any(n == 0 for n in bins):
        warnings.warn("a request size received no bins", PartitionTooSmall, stacklevel=2)
    return PartitionPlan(S, tuple(segs))


def equal_segments(S: int, sizes: Sequence[int]) -> PartitionPlan:
    """M equal-width segments in size order (FLF layout); the remainder goes to the last."""
    m = len(sizes)
    width = S // m
    segs = []
    for j, b in enumerate(sizes):
        length = width if j < m - 1 else S - width * (m - 1)
        segs.append(Segment(b, j * width, length))
    return PartitionPlan(S, tuple(segs))
