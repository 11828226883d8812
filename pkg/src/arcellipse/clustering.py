"""Hierarchical mean-shift clustering of initial ellipses.

Duplicates of one latent ellipse are collapsed by clustering the 5-D
parameter space in three cascaded stages: centers (2-D), then orientation
(1-D on the period-180 circle) within each center partition, then semi-axes
(2-D) within each orientation partition.  Each surviving (center,
orientation, axes) mode combination becomes one candidate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .candidates import InitialEllipse
from .config import Config
from .fitting import EllipseGeom


@dataclass
class CandidateSet:
    candidates: List[EllipseGeom] = field(default_factory=list)
    members: List[List[int]] = field(default_factory=list)
    n_center_modes: int = 0
    n_orientation_modes: List[int] = field(default_factory=list)
    n_axes_modes: Dict[Tuple[int, int], int] = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.candidates)

    def counts_consistent(self) -> bool:
        """Total candidates must equal the sum of axes modes over (k, s)."""
        return self.count == sum(self.n_axes_modes.values())


def _wrap(diff: np.ndarray, periods) -> np.ndarray:
    if periods is None:
        return diff
    out = diff.copy()
    for d, period in enumerate(periods):
        if period:
            out[..., d] = (out[..., d] + period / 2.0) % period - period / 2.0
    return out


def mean_shift_modes(points: np.ndarray, bandwidth, max_iter: int = 20,
                     periods: Optional[Sequence[Optional[float]]] = None):
    """Flat-kernel mean shift; returns (modes, assignment).

    Every sample iterates toward the mean of its bandwidth neighborhood
    (per-dimension scaled, wrapped on circular dimensions) until the shift
    drops below 1e-3 bandwidths or ``max_iter`` is hit; converged positions
    within half a bandwidth collapse into one mode and each sample is
    assigned to its nearest mode.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n, dim = pts.shape
    bw = np.broadcast_to(np.asarray(bandwidth, dtype=float), (dim,)).copy()
    if np.any(bw <= 0):
        raise ValueError("bandwidth must be positive")

    positions = pts.copy()
    active = np.ones(n, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        for i in np.nonzero(active)[0]:
            diff = _wrap(pts - positions[i], periods)
            inside = np.sqrt(((diff / bw) ** 2).sum(axis=1)) <= 1.0
            step = diff[inside].mean(axis=0)
            positions[i] += step
            if periods is not None:
                for d, period in enumerate(periods):
                    if period:
                        positions[i, d] %= period
            if float(np.sqrt(((step / bw) ** 2).sum())) < 1e-3:
                active[i] = False

    modes: List[np.ndarray] = []
    merged: List[List[int]] = []
    for i in range(n):
        placed = False
        for m, mode in enumerate(modes):
            diff = _wrap(positions[i][None, :] - mode[None, :], periods)[0]
            if float(np.sqrt(((diff / bw) ** 2).sum())) <= 0.5:
                merged[m].append(i)
                placed = True
                break
        if not placed:
            modes.append(positions[i].copy())
            merged.append([i])
    # Refine each mode to the (circular) mean of its converged members.
    for m, idxs in enumerate(merged):
        anchor = modes[m]
        diffs = _wrap(positions[idxs] - anchor, periods)
        mode = anchor + diffs.mean(axis=0)
        if periods is not None:
            for d, period in enumerate(periods):
                if period:
                    mode[d] %= period
        modes[m] = mode

    mode_arr = np.array(modes)
    assignment = np.empty(n, dtype=int)
    for i in range(n):
        diff = _wrap(mode_arr - pts[i], periods)
        dist = np.sqrt(((diff / bw) ** 2).sum(axis=1))
        assignment[i] = int(np.argmin(dist))
    return mode_arr, assignment


def hierarchical_cluster(initial: Sequence[InitialEllipse], cfg: Config,
                         image_diag: float) -> CandidateSet:
    """Three-stage clustering of the initial set into candidates.

    Initial ellipses of opposite polarity never share a candidate: a
    boundary's polarity identifies the latent ellipse as much as its
    geometry does.  Near-circular members (b/a above the configured ratio)
    skip the orientation stage and join their partition's largest
    orientation cluster, since their orientation is ill-defined.
    """
    result = CandidateSet()
    if not initial:
        return result
    part_id = 0
    for polarity in sorted({ie.geom.polarity for ie in initial}):
        indices = [i for i, ie in enumerate(initial)
                   if ie.geom.polarity == polarity]
        part_id = _cluster_one_polarity(initial, indices, polarity, cfg,
                                        image_diag, result, part_id)
    return result


def _cluster_one_polarity(initial: Sequence[InitialEllipse], indices: List[int],
                          polarity: int, cfg: Config, image_diag: float,
                          result: CandidateSet, part_id: int) -> int:
    floor = cfg.bandwidth_floor()
    center_bw = max(floor, cfg.center_bandwidth_frac * image_diag)
    centers = np.array([(initial[i].geom.cx, initial[i].geom.cy)
                        for i in indices])
    center_modes, center_assign = mean_shift_modes(
        centers, (center_bw, center_bw), cfg.mean_shift_max_iter)

    occupied = sorted(set(int(a) for a in center_assign))
    result.n_center_modes += len(occupied)

    for k in occupied:
        idx_k = [indices[p] for p in range(len(indices)) if center_assign[p] == k]
        center_mode = center_modes[k]
        is_round = {i for i in idx_k
                    if initial[i].geom.b / initial[i].geom.a > cfg.near_circle_ratio}
        oriented = [i for i in idx_k if i not in is_round]
        round_members = [i for i in idx_k if i in is_round]

        clusters: List[Tuple[float, List[int]]] = []
        if oriented:
            phis = np.array([[initial[i].geom.phi_deg] for i in oriented])
            phi_modes, phi_assign = mean_shift_modes(
                phis, (cfg.orientation_bandwidth_deg,), cfg.mean_shift_max_iter,
                periods=(180.0,))
            buckets: Dict[int, List[int]] = {}
            for pos, i in enumerate(oriented):
                buckets.setdefault(int(phi_assign[pos]), []).append(i)
            clusters = [(float(phi_modes[s][0]) % 180.0, members)
                        for s, members in sorted(buckets.items())]
        else:
            clusters = [(0.0, [])]
        if round_members:
            largest = max(range(len(clusters)),
                          key=lambda s: (len(clusters[s][1]), -s))
            clusters[largest][1].extend(round_members)
        clusters = [(phi, members) for phi, members in clusters if members]
        result.n_orientation_modes.append(len(clusters))

        for s, (phi_mode, members_ks) in enumerate(clusters):
            axes = np.array([(initial[i].geom.a, initial[i].geom.b)
                             for i in members_ks])
            axes_bw = max(floor, cfg.axes_bandwidth_frac * float(np.median(axes[:, 0])))
            axes_modes, axes_assign = mean_shift_modes(
                axes, (axes_bw, axes_bw), cfg.mean_shift_max_iter)
            buckets_t: Dict[int, List[int]] = {}
            for pos, i in enumerate(members_ks):
                buckets_t.setdefault(int(axes_assign[pos]), []).append(i)
            result.n_axes_modes[(part_id, s)] = len(buckets_t)

            for t, members_t in sorted(buckets_t.items()):
                a_mode, b_mode = axes_modes[t]
                geom = EllipseGeom(float(center_mode[0]), float(center_mode[1]),
                                   float(a_mode), float(b_mode), float(phi_mode),
                                   polarity)
                result.candidates.append(geom)
                result.members.append(list(members_t))
        part_id += 1
    return part_id
