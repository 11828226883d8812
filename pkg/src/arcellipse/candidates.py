"""Initial ellipse generation from arc groups.

Two complementary branches feed the initial set: salient single groups are
fitted on their own, and every group pair that passes the polarity, mutual
region and adaptive-inlier constraints is fitted from the merged per-group
scatter matrices (so each group's endpoints are accumulated exactly once).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config import Config
from .errors import NonEllipseError, SingularFitError
from .fitting import (EllipseGeom, NormTransform, ScatterMatrix, accumulate_scatter,
                      ellipse_normal_many, fit_ellipse, merge_scatter,
                      rosin_distance_many, with_polarity)
from .grouping import ArcGroup
from .image_io import GradientMap
from .segments import SupportRegion


@dataclass
class InitialEllipse:
    geom: EllipseGeom
    source: Tuple[int, ...]   # (group,) for single groups, (g1, g2) for pairs
    inlier_count: int


def polarity_compatible(g1: ArcGroup, g2: ArcGroup) -> bool:
    """Paired groups must share one polarity."""
    return g1.polarity == g2.polarity


def _perp_clockwise(v: np.ndarray) -> np.ndarray:
    n = float(np.hypot(v[0], v[1]))
    return np.array([v[1], -v[0]]) / n


def region_restriction(g1: ArcGroup, g2: ArcGroup, rho_d: float) -> bool:
    """Mutual valid-region test for a candidate pair.

    For both orderings (i, j): the start segment's arc direction must point
    toward the partner's end point, the end segment's arc direction toward
    the partner's start point, and the partner's midpoint must lie on the
    concave side of the chord; all with slack ``rho_d`` (usually negative).
    """
    pol = g1.polarity
    for gi, gj in ((g1, g2), (g2, g1)):
        if float(gi.segments[0].arc_dir @ (gj.end_point - gi.start_point)) <= rho_d:
            return False
        if float(gi.segments[-1].arc_dir @ (gj.start_point - gi.end_point)) <= rho_d:
            return False
        perp = _perp_clockwise(gi.end_point - gi.start_point)
        if float(-pol * (perp @ (gj.midpoint - gi.midpoint))) <= rho_d:
            return False
    return True


def segment_support_inliers(e: EllipseGeom, region: SupportRegion, gmap: GradientMap,
                            dist_tol: float, alpha_deg: float) -> np.ndarray:
    """Ridge pixels of the region within distance tolerance whose gradients
    face the ellipse normal (sign-corrected by the ellipse polarity).

    Counting ridge pixels makes the tally track arc length, so comparing it
    against the segment length stays meaningful; the full gradient band is
    several pixels thick and would let an ellipse threading between two
    nearby boundaries pass.
    """
    sel = region.pixels[gmap.edge_max[region.pixels[:, 1], region.pixels[:, 0]]]
    if len(sel) == 0:
        return np.empty((0, 2))
    pts = sel.astype(float)
    close = rosin_distance_many(pts, e) < dist_tol
    if not np.any(close):
        return pts[:0]
    pts = pts[close]
    sel = sel[close]
    normals = ellipse_normal_many(pts, e)
    grads = gmap.unit_gradients(sel[:, 0], sel[:, 1])
    cosang = np.clip((normals * (-e.polarity * grads)).sum(axis=1), -1.0, 1.0)
    ok = np.degrees(np.arccos(cosang)) < alpha_deg
    return pts[ok]


def adaptive_inliers_check(e: EllipseGeom, groups: Sequence[ArcGroup],
                           regions: Sequence[SupportRegion], gmap: GradientMap,
                           epsilon_px: float, alpha_deg: float,
                           length_margin: float = 0.7):
    """Every member segment must contribute support inliers in proportion to
    its own length; returns (passed, union of inlier points).

    The tally uses ridge pixels, whose density per unit arc length sits just
    around one (0.88..1.26 on clean digitized boundaries), so the length
    comparison carries a margin factor; an ellipse threading between two
    nearby boundaries scores near zero either way.
    """
    collected = []
    for group in groups:
        for seg in group.segments:
            inl = segment_support_inliers(e, regions[seg.region_id], gmap,
                                          epsilon_px, alpha_deg)
            if len(inl) <= length_margin * seg.length:
                return False, np.empty((0, 2))
            collected.append(inl)
    points = np.unique(np.vstack(collected), axis=0)
    return True, points


def _group_scatter(group: ArcGroup, norm: NormTransform) -> Optional[ScatterMatrix]:
    pts = np.unique(group.endpoints(), axis=0)
    if len(pts) == 0:
        return None
    return accumulate_scatter(pts, norm)


def _distinct_endpoint_count(group: ArcGroup) -> int:
    return len(np.unique(group.endpoints(), axis=0))


def fit_salient_groups(groups: Sequence[ArcGroup], regions: Sequence[SupportRegion],
                       gmap: GradientMap, cfg: Config,
                       norm: NormTransform) -> List[InitialEllipse]:
    """Fit each group whose saliency reaches t_ss from its segment endpoints."""
    out: List[InitialEllipse] = []
    for gi, group in enumerate(groups):
        if group.saliency < cfg.t_ss:
            continue
        if _distinct_endpoint_count(group) < 5:
            continue
        scatter = _group_scatter(group, norm)
        try:
            geom = fit_ellipse(scatter)
        except (SingularFitError, NonEllipseError):
            continue
        geom = with_polarity(geom, group.polarity)
        ok, inliers = adaptive_inliers_check(geom, [group], regions, gmap,
                                             cfg.epsilon_px, cfg.alpha_deg)
        if ok:
            out.append(InitialEllipse(geom, (gi,), len(inliers)))
    return out


def _valid_pair_matrix(groups: Sequence[ArcGroup], rho_d: float) -> np.ndarray:
    """Vectorized polarity + mutual-region prefilter over all group pairs."""
    n = len(groups)
    starts = np.array([g.start_point for g in groups])
    ends = np.array([g.end_point for g in groups])
    mids = np.array([g.midpoint for g in groups])
    arc_s = np.array([g.segments[0].arc_dir for g in groups])
    arc_e = np.array([g.segments[-1].arc_dir for g in groups])
    pol = np.array([g.polarity for g in groups])
    chord = ends - starts
    perp = np.column_stack((chord[:, 1], -chord[:, 0]))
    perp /= np.hypot(perp[:, 0], perp[:, 1])[:, None]

    def dots(vecs: np.ndarray, heads: np.ndarray, tails: np.ndarray) -> np.ndarray:
        diff = heads[None, :, :] - tails[:, None, :]
        return (vecs[:, None, :] * diff).sum(axis=2)

    cond = (dots(arc_s, ends, starts) > rho_d)
    cond &= dots(arc_e, starts, ends) > rho_d
    cond &= (-pol[:, None]) * dots(perp, mids, mids) > rho_d
    return (pol[:, None] == pol[None, :]) & cond & cond.T


def generate_initial_set(groups: Sequence[ArcGroup], regions: Sequence[SupportRegion],
                         gmap: GradientMap, cfg: Config,
                         norm: NormTransform) -> List[InitialEllipse]:
    """Union of the salient-single-group branch and the global pair search."""
    initial: List[InitialEllipse] = []
    if cfg.local_branch:
        initial.extend(fit_salient_groups(groups, regions, gmap, cfg, norm))

    scatters = [_group_scatter(g, norm) for g in groups]
    valid = _valid_pair_matrix(groups, cfg.rho_d_px) if groups else None
    order = sorted(
        ((i, j) for i in range(len(groups)) for j in range(i + 1, len(groups))
         if valid[i, j]),
        key=lambda ij: (-(groups[ij[0]].saliency + groups[ij[1]].saliency), ij))
    for i, j in order:
        g1, g2 = groups[i], groups[j]
        if scatters[i] is None or scatters[j] is None:
            continue
        try:
            geom = fit_ellipse(merge_scatter([scatters[i], scatters[j]]))
        except (SingularFitError, NonEllipseError):
            continue
        geom = with_polarity(geom, g1.polarity)
        ok, inliers = adaptive_inliers_check(geom, [g1, g2], regions, gmap,
                                             cfg.epsilon_px, cfg.alpha_deg)
        if not ok:
            continue
        refined = geom
        if len(inliers) >= 5:
            try:
                refined = with_polarity(fit_ellipse(accumulate_scatter(inliers, norm)),
                                        g1.polarity)
            except (SingularFitError, NonEllipseError):
                refined = geom
        initial.append(InitialEllipse(refined, (i, j), len(inliers)))

    initial.sort(key=lambda ie: (len(ie.source), ie.source))
    return initial
