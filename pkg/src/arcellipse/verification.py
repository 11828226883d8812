"""Candidate verification: goodness scoring, admission and refinement.

Candidates are ranked by a goodness score combining how much of the
approximate perimeter is covered by strict support inliers and how much of
the boundary's angular extent they occupy.  Ranked candidates then collect
inliers at the full distance tolerance, must reach the inlier-ratio and
angular-coverage floors, and survivors are refit on their inlier sets.
Pixels claimed by an accepted detection are masked away from later
candidates so one boundary cannot fuel two detections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .clustering import CandidateSet
from .config import Config
from .errors import NonEllipseError, SingularFitError
from .fitting import (EllipseGeom, NormTransform, accumulate_scatter,
                      ellipse_normal_many, fit_ellipse, perimeter_approx,
                      rosin_distance_many, with_polarity)
from .image_io import GradientMap


@dataclass
class Detection:
    geom: EllipseGeom
    goodness: float
    inlier_count: int
    coverage_deg: float
    inlier_ratio: float


def _band_pixels(e: EllipseGeom, gmap: GradientMap, dist_tol: float) -> np.ndarray:
    """Indices (x, y) of map pixels within dist_tol+1 of the boundary band."""
    reach = dist_tol + 1.0
    step_deg = math.degrees(1.0 / max(e.a, 1.0))  # ~1 px along the boundary
    ts = np.arange(0.0, 360.0, max(min(step_deg, 2.0), 0.02))
    boundary = e.boundary_points(ts)
    r = int(math.ceil(reach))
    offs = np.arange(-r, r + 1)
    ox, oy = np.meshgrid(offs, offs)
    cells = np.rint(boundary).astype(int)
    xs = (cells[:, 0, None] + ox.ravel()[None, :]).ravel()
    ys = (cells[:, 1, None] + oy.ravel()[None, :]).ravel()
    keep = (xs >= 0) & (xs < gmap.width) & (ys >= 0) & (ys < gmap.height)
    xs, ys = xs[keep], ys[keep]
    flat = np.unique(ys.astype(np.int64) * gmap.width + xs)
    return np.column_stack((flat % gmap.width, flat // gmap.width)).astype(int)


@dataclass
class BandSupport:
    """One candidate's supporting pixels: band membership, distances and
    the ridge (skeleton) flag per pixel."""

    pixels: np.ndarray    # (n, 2) int
    dist: np.ndarray      # (n,) distance to the candidate boundary
    ridge: np.ndarray     # (n,) bool

    def free(self, claimed: Optional[np.ndarray]) -> "BandSupport":
        if claimed is None or len(self.pixels) == 0:
            return self
        keep = ~claimed[self.pixels[:, 1], self.pixels[:, 0]]
        return BandSupport(self.pixels[keep], self.dist[keep], self.ridge[keep])

    def strict(self, dist_tol: float) -> "BandSupport":
        keep = self.dist < dist_tol
        return BandSupport(self.pixels[keep], self.dist[keep], self.ridge[keep])

    def ridge_pixels(self) -> np.ndarray:
        return self.pixels[self.ridge]


def _collect_band(e: EllipseGeom, gmap: GradientMap, dist_tol: float,
                  alpha_deg: float,
                  claimed: Optional[np.ndarray] = None) -> BandSupport:
    """Band and ridge inliers in one scan.

    Band inliers are all valid pixels inside the tolerance whose gradient
    agrees with the outward normal within the angle tolerance; ridge inliers
    are their one-per-crossing skeleton subset, whose tally tracks boundary
    arc length.  With unspecified polarity both gradient signs are tried.
    Pixels flagged in ``claimed`` are skipped.
    """
    empty = BandSupport(np.empty((0, 2), dtype=int), np.empty(0), np.empty(0, dtype=bool))
    pix = _band_pixels(e, gmap, dist_tol)
    if len(pix) == 0:
        return empty
    ok = gmap.valid[pix[:, 1], pix[:, 0]]
    if claimed is not None:
        ok &= ~claimed[pix[:, 1], pix[:, 0]]
    pix = pix[ok]
    if len(pix) == 0:
        return empty
    pts = pix.astype(float)
    dist = rosin_distance_many(pts, e)
    close = dist < dist_tol
    pix, pts, dist = pix[close], pts[close], dist[close]
    if len(pix) == 0:
        return empty
    normals = ellipse_normal_many(pts, e)
    grads = gmap.unit_gradients(pix[:, 0], pix[:, 1])
    dots = (normals * grads).sum(axis=1)
    cos_alpha = math.cos(math.radians(alpha_deg))
    if e.polarity == 0:
        agree = np.abs(dots) > cos_alpha
    else:
        agree = (-e.polarity * dots) > cos_alpha
    pix, dist = pix[agree], dist[agree]
    return BandSupport(pix, dist, gmap.edge_max[pix[:, 1], pix[:, 0]])


def collect_support_inliers(e: EllipseGeom, gmap: GradientMap, dist_tol: float,
                            alpha_deg: float,
                            claimed: Optional[np.ndarray] = None) -> np.ndarray:
    """Ridge inliers of the candidate (see _collect_band)."""
    return _collect_band(e, gmap, dist_tol, alpha_deg, claimed).ridge_pixels()


def angular_coverage(inliers: np.ndarray, e: EllipseGeom,
                     bin_deg: float = 2.0, min_run: int = 2) -> float:
    """Angular extent of the boundary occupied by connected inlier runs.

    Inliers are binned by eccentric angle; only bins belonging to circular
    runs of at least ``min_run`` consecutive non-empty bins count.
    """
    if len(inliers) == 0:
        return 0.0
    n_bins = int(round(360.0 / bin_deg))
    t = e.eccentric_angles_deg(np.asarray(inliers, dtype=float))
    bins = np.minimum((t / bin_deg).astype(int), n_bins - 1)
    occupied = np.zeros(n_bins, dtype=bool)
    occupied[bins] = True
    if occupied.all():
        return 360.0
    if not occupied.any():
        return 0.0
    # Rotate so index 0 is empty, then measure simple runs.
    first_empty = int(np.argmin(occupied))
    rolled = np.roll(occupied, -first_empty)
    count = 0
    run = 0
    for filled in rolled:
        if filled:
            run += 1
        else:
            if run >= min_run:
                count += run
            run = 0
    if run >= min_run:
        count += run
    return count * bin_deg


def _goodness_of(support: BandSupport, e: EllipseGeom, cfg: Config) -> float:
    strict = support.strict(cfg.epsilon_px / 2.0)
    b = perimeter_approx(e)
    cov = angular_coverage(strict.pixels, e, cfg.coverage_bin_deg, cfg.coverage_min_run)
    return math.sqrt(min(1.0, int(strict.ridge.sum()) / b) * (cov / 360.0))


def goodness(e: EllipseGeom, gmap: GradientMap, cfg: Config,
             claimed: Optional[np.ndarray] = None) -> float:
    """sqrt(min(1, strict inliers / perimeter) * coverage / 360).

    Strict inliers use half the distance tolerance to keep the score
    credible under noise; their count is taken on the ridge while coverage
    is measured on the full band, so bin occupancy reflects boundary
    presence rather than ridge sampling density.
    """
    support = _collect_band(e, gmap, cfg.epsilon_px, cfg.alpha_deg, claimed)
    return _goodness_of(support, e, cfg)


def _bucket(score: float, buckets: int) -> int:
    return min(buckets - 1, int(score * buckets))


def verify_candidates(cands: CandidateSet, gmap: GradientMap, cfg: Config,
                      norm: NormTransform) -> List[Detection]:
    """Admit, refine and emit detections in descending goodness order.

    Each candidate's band is scanned once; masking by earlier detections is
    applied by indexing the cached pixels when the candidate's turn comes.
    """
    claimed = np.zeros((gmap.height, gmap.width), dtype=bool)
    supports = [_collect_band(c, gmap, cfg.epsilon_px, cfg.alpha_deg)
                for c in cands.candidates]
    scores = [_goodness_of(s, c, cfg)
              for s, c in zip(supports, cands.candidates)]
    # Linear-time pseudo-descending order: high buckets first, stable inside.
    order: List[int] = []
    for b in range(cfg.goodness_buckets - 1, -1, -1):
        order.extend(i for i, s in enumerate(scores)
                     if _bucket(s, cfg.goodness_buckets) == b)

    detections: List[Detection] = []
    for i in order:
        candidate = cands.candidates[i]
        free = supports[i].free(claimed)
        admitted = _admit(candidate, free, cfg)
        if admitted is None:
            continue
        geom, support, cov = admitted
        refined = _refit(geom, support.ridge_pixels(), norm)
        if refined is not None:
            resupport = _collect_band(refined, gmap, cfg.epsilon_px,
                                      cfg.alpha_deg, claimed)
            readmitted = _admit(refined, resupport, cfg)
            if readmitted is not None and \
                    int(readmitted[1].ridge.sum()) >= int(support.ridge.sum()):
                geom, support, cov = readmitted
        inliers = support.ridge_pixels()
        claimed[inliers[:, 1], inliers[:, 0]] = True
        detections.append(Detection(
            geom=geom,
            goodness=_goodness_of(support, geom, cfg),
            inlier_count=len(inliers),
            coverage_deg=cov,
            inlier_ratio=len(inliers) / perimeter_approx(geom),
        ))
    detections.sort(
        key=lambda d: -_bucket(d.goodness, cfg.goodness_buckets))
    return detections


def _admit(geom: EllipseGeom, support: BandSupport, cfg: Config):
    if int(support.ridge.sum()) < cfg.t_r * perimeter_approx(geom):
        return None
    cov = angular_coverage(support.pixels, geom,
                           cfg.coverage_bin_deg, cfg.coverage_min_run)
    if cov < cfg.t_ac_deg:
        return None
    return geom, support, cov


def _refit(geom: EllipseGeom, inliers: np.ndarray,
           norm: NormTransform) -> Optional[EllipseGeom]:
    if len(inliers) < 5:
        return None
    try:
        refit = fit_ellipse(accumulate_scatter(inliers.astype(float), norm))
    except (SingularFitError, NonEllipseError):
        return None
    return with_polarity(refit, geom.polarity)
