"""Linking arc segments into groups.

Consecutive arc segments that continue one latent curve are chained: a seed
segment searches past its head, then past its tail, admitting only unused
segments of the same polarity whose direction rotates in the seed's sense by
less than twice the angle tolerance and which reach into a small statistical
window beyond the current terminal.  Among admissible candidates the one
whose support region drops the most pixels inside the window wins the vote.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .angles import wrap_deg_scalar
from .segments import ArcSegment, SupportRegion


@dataclass
class ArcGroup:
    """Ordered chain of arc segments on one latent curve (tail..seed..head)."""

    segments: List[ArcSegment]
    polarity: int
    angle_intervals_deg: List[float] = field(default_factory=list)

    @property
    def start_point(self) -> np.ndarray:
        return self.segments[0].start

    @property
    def end_point(self) -> np.ndarray:
        return self.segments[-1].end

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.start_point + self.end_point)

    @property
    def spanning_angle_deg(self) -> float:
        return float(sum(self.angle_intervals_deg))

    @property
    def saliency(self) -> float:
        return min(1.0, self.spanning_angle_deg / 360.0)

    def endpoints(self) -> np.ndarray:
        pts = []
        for seg in self.segments:
            pts.append(seg.start)
            pts.append(seg.end)
        return np.array(pts)


def group_saliency(group: ArcGroup) -> float:
    """Spanning angle over a full turn, clamped to [0, 1]."""
    return group.saliency


class _Window:
    """Statistical window at a segment terminal: a rectangle aligned with the
    segment, long along the travel direction to bridge corner gaps but
    laterally tight so a parallel boundary one band away cannot link."""

    def __init__(self, center: np.ndarray, direction: np.ndarray,
                 half_along: float, half_across: float):
        self.center = center
        self.u = direction
        self.n = np.array([-direction[1], direction[0]])
        self.half_along = half_along
        self.half_across = half_across

    def _local(self, pts: np.ndarray):
        d = pts - self.center
        return d @ self.u, d @ self.n

    def contains(self, pts: np.ndarray) -> np.ndarray:
        along, across = self._local(np.atleast_2d(pts))
        return (np.abs(along) <= self.half_along) & (np.abs(across) <= self.half_across)

    def admits_entry(self, point: np.ndarray) -> bool:
        """A continuation's entry endpoint must sit on the travel track:
        laterally inside the window, longitudinally at most one window ahead
        (the gap allowance) though arbitrarily overlapping behind."""
        along, across = self._local(point[None, :])
        return (abs(float(across[0])) <= self.half_across
                and float(along[0]) <= self.half_along)

    def intersects_segment(self, seg: ArcSegment) -> bool:
        # Liang-Barsky clip in the window's local frame.
        p0 = np.array([(seg.start - self.center) @ self.u,
                       (seg.start - self.center) @ self.n])
        p1 = np.array([(seg.end - self.center) @ self.u,
                       (seg.end - self.center) @ self.n])
        d = p1 - p0
        t0, t1 = 0.0, 1.0
        for p, q in ((-d[0], p0[0] + self.half_along),
                     (d[0], self.half_along - p0[0]),
                     (-d[1], p0[1] + self.half_across),
                     (d[1], self.half_across - p0[1])):
            if p == 0.0:
                if q < 0.0:
                    return False
                continue
            r = q / p
            if p < 0.0:
                if r > t1:
                    return False
                t0 = max(t0, r)
            else:
                if r < t0:
                    return False
                t1 = min(t1, r)
        return t0 <= t1

    def votes(self, region: SupportRegion) -> int:
        return int(self.contains(region.pixels.astype(float)).sum())


def _next_link(current: ArcSegment, sense: int, forward: bool,
               segments: Sequence[ArcSegment], regions: Sequence[SupportRegion],
               used: np.ndarray, alpha_deg: float,
               window_half: float, extension: float,
               midpoints: np.ndarray, reach: np.ndarray):
    """Pick the best continuation at one terminal of the current segment."""
    u = current.direction_unit()
    if forward:
        center = current.end + extension * u
    else:
        center = current.start - extension * u
    window = _Window(center, u, window_half, 0.625 * window_half)
    near = (np.hypot(midpoints[:, 0] - center[0], midpoints[:, 1] - center[1])
            <= reach) & ~used
    best = None
    best_key = None
    for j in np.nonzero(near)[0]:
        cand = segments[j]
        if cand.polarity != sense:
            continue
        dev = wrap_deg_scalar(cand.direction_deg - current.direction_deg)
        if abs(dev) >= 2.0 * alpha_deg:
            continue
        expected = sense if forward else -sense
        if dev != 0.0 and (1 if dev > 0 else -1) != expected:
            continue
        if not window.intersects_segment(cand):
            continue
        entry = cand.start if forward else cand.end
        if not window.admits_entry(entry):
            continue
        votes = window.votes(regions[cand.region_id])
        if forward:
            gap = float(np.hypot(*(cand.start - current.end)))
        else:
            gap = float(np.hypot(*(cand.end - current.start)))
        key = (-votes, gap, j)
        if best_key is None or key < best_key:
            best_key = key
            best = j
    return best


def link_groups(segments: Sequence[ArcSegment], regions: Sequence[SupportRegion],
                alpha_deg: float, epsilon_px: float = 2.0,
                window_factor: float = 8.0, extension_factor: float = 0.5) -> List[ArcGroup]:
    """Partition the segments into groups by bidirectional chained search.

    Seeds are taken in descending length order; every segment ends up in
    exactly one group (singletons allowed).
    """
    n = len(segments)
    used = np.zeros(n, dtype=bool)
    window_half = 0.5 * window_factor * epsilon_px
    extension = extension_factor * epsilon_px
    order = sorted(range(n), key=lambda i: (-segments[i].length, i))
    if n:
        midpoints = np.array([s.midpoint() for s in segments])
        reach = np.array([s.length / 2.0 for s in segments]) + 2.0 * window_half
    else:
        midpoints = np.zeros((0, 2))
        reach = np.zeros(0)

    groups: List[ArcGroup] = []
    for seed_idx in order:
        if used[seed_idx]:
            continue
        used[seed_idx] = True
        seed = segments[seed_idx]
        sense = seed.polarity

        chain_head = []
        current = seed
        while True:
            nxt = _next_link(current, sense, True, segments, regions, used,
                             alpha_deg, window_half, extension, midpoints, reach)
            if nxt is None:
                break
            used[nxt] = True
            chain_head.append(segments[nxt])
            current = segments[nxt]

        chain_tail = []
        current = seed
        while True:
            nxt = _next_link(current, sense, False, segments, regions, used,
                             alpha_deg, window_half, extension, midpoints, reach)
            if nxt is None:
                break
            used[nxt] = True
            chain_tail.append(segments[nxt])
            current = segments[nxt]

        members = list(reversed(chain_tail)) + [seed] + chain_head
        intervals = [
            abs(wrap_deg_scalar(members[k + 1].direction_deg - members[k].direction_deg))
            for k in range(len(members) - 1)
        ]
        groups.append(ArcGroup(members, sense, intervals))
    return groups
