"""Arc segment extraction.

Level-line regions are grown from high-gradient seeds; each accepted region
is summarized by its circumscribed rectangle and classified by how the main
angles of its two halves rotate around the overall main angle.  Regions that
curve consistently yield arc segments carrying convexity (the direction
toward the latent curve center) and polarity; straight regions are dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .angles import unit_vector_deg, wrap_deg_scalar
from .config import Config
from .errors import DegenerateRegionError, EmptyRegionError
from .image_io import GradientMap, GrayImage, compute_gradient_map, gaussian_downscale

_SORT_BINS = 1024


@dataclass
class SupportRegion:
    """A grown level-line region and its circumscribed rectangle summary."""

    pixels: np.ndarray          # (n, 2) int, (x, y) in gradient-grid coords
    rect_a: np.ndarray          # sub-pixel axis terminal A
    rect_b: np.ndarray          # sub-pixel axis terminal B
    centroid: np.ndarray        # magnitude-weighted centroid C
    main_angle_deg: float       # circular mean of level-line angles, all pixels
    sub_angle_ac_deg: float     # same, A-side half
    sub_angle_cb_deg: float     # same, B-side half
    width: float                # rectangle width, px
    length: float               # rectangle length, px
    density: float              # pixel count / rectangle area


@dataclass
class ArcSegment:
    """Oriented line segment approximating a curved support region."""

    start: np.ndarray           # sub-pixel; traversal start->end follows the curve
    end: np.ndarray
    length: float
    direction_deg: float        # angle of start->end
    arc_dir: np.ndarray         # unit vector toward the latent curve center
    polarity: int               # +1 brighter interior, -1 darker
    region_id: int

    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.start + self.end)

    def direction_unit(self) -> np.ndarray:
        return (self.end - self.start) / self.length


def region_main_angle(pixels: np.ndarray, gmap: GradientMap) -> float:
    """Circular mean of the level-line angles over a pixel set, in [0, 360)."""
    pts = np.atleast_2d(np.asarray(pixels, dtype=int))
    if pts.size == 0:
        raise EmptyRegionError("main angle of an empty region")
    rad = np.radians(gmap.level_line_angle[pts[:, 1], pts[:, 0]])
    return math.degrees(math.atan2(np.sin(rad).sum(), np.cos(rad).sum())) % 360.0


def _grow(gmap: GradientMap, x0: int, y0: int, tol_deg: float, used: np.ndarray):
    """8-connected growth admitting pixels within tol of the running mean angle.

    Growth additionally stops once the region's level-line span exceeds
    1.5 * tol, so a segment approximates a bounded stretch of tangent angle
    and consecutive segments on one curve stay inside the 2-tol link gate.
    """
    lla = gmap.level_line_angle
    h, w = lla.shape
    span_cap = 1.5 * tol_deg
    xs = [x0]
    ys = [y0]
    used[y0, x0] = True
    seed_angle = lla[y0, x0]
    rad0 = math.radians(seed_angle)
    sum_sin = math.sin(rad0)
    sum_cos = math.cos(rad0)
    theta = seed_angle
    dev_lo = dev_hi = 0.0
    i = 0
    while i < len(xs):
        cx = xs[i]
        cy = ys[i]
        i += 1
        for ny in (cy - 1, cy, cy + 1):
            if ny < 0 or ny >= h:
                continue
            row_used = used[ny]
            row_lla = lla[ny]
            for nx in (cx - 1, cx, cx + 1):
                if nx < 0 or nx >= w or row_used[nx]:
                    continue
                if abs(wrap_deg_scalar(row_lla[nx] - theta)) >= tol_deg:
                    continue
                dev = wrap_deg_scalar(row_lla[nx] - seed_angle)
                if max(dev_hi, dev) - min(dev_lo, dev) > span_cap:
                    continue
                dev_lo = min(dev_lo, dev)
                dev_hi = max(dev_hi, dev)
                row_used[nx] = True
                xs.append(nx)
                ys.append(ny)
                rad = math.radians(row_lla[nx])
                sum_sin += math.sin(rad)
                sum_cos += math.cos(rad)
                theta = math.degrees(math.atan2(sum_sin, sum_cos)) % 360.0
    return np.column_stack((xs, ys))


def _build_region(pixels: np.ndarray, gmap: GradientMap) -> Optional[SupportRegion]:
    """Summarize a pixel set by its weighted principal rectangle."""
    pts = pixels.astype(float)
    weights = gmap.magnitude[pixels[:, 1], pixels[:, 0]]
    wsum = weights.sum()
    if wsum <= 0:
        return None
    centroid = (pts * weights[:, None]).sum(axis=0) / wsum
    centered = pts - centroid
    cov = (centered.T * weights) @ centered / wsum
    evals, evecs = np.linalg.eigh(cov)
    axis = evecs[:, int(np.argmax(evals))]

    main = region_main_angle(pixels, gmap)
    if axis @ unit_vector_deg(main) < 0.0:
        axis = -axis

    normal = np.array([-axis[1], axis[0]])
    along = centered @ axis
    perp = centered @ normal
    t_min, t_max = float(along.min()), float(along.max())
    length = t_max - t_min + 1.0
    # Width from the magnitude-weighted perpendicular spread: k discrete rows
    # at unit pitch have variance (k^2 - 1) / 12, so sqrt(12 var + 1) recovers
    # the k-pixel footprint exactly.  Low-weight tail pixels of a blurred
    # gradient band would inflate a min/max extent and starve density.
    perp_var = float((weights * perp * perp).sum() / wsum)
    width = math.sqrt(12.0 * perp_var + 1.0)
    density = len(pixels) / (length * width)

    first = pixels[along < 0.0]
    second = pixels[along >= 0.0]
    if len(first) == 0 or len(second) == 0:
        return None

    # Axis terminals sit at the extreme projections; their perpendicular
    # position comes from the tip pixels so the terminals land on the curve
    # rather than on the axis line, which a curved band leaves.
    tip = max(2.0, 0.15 * (t_max - t_min))
    lo = along <= t_min + tip
    hi = along >= t_max - tip
    perp_a = float((weights[lo] * perp[lo]).sum() / weights[lo].sum())
    perp_b = float((weights[hi] * perp[hi]).sum() / weights[hi].sum())
    return SupportRegion(
        pixels=pixels,
        rect_a=centroid + t_min * axis + perp_a * normal,
        rect_b=centroid + t_max * axis + perp_b * normal,
        centroid=centroid,
        main_angle_deg=main,
        sub_angle_ac_deg=region_main_angle(first, gmap),
        sub_angle_cb_deg=region_main_angle(second, gmap),
        width=width,
        length=length,
        density=density,
    )


def _shrink_to_density(pixels: np.ndarray, seed, gmap: GradientMap, used: np.ndarray,
                       density_th: float, min_pixels: int) -> Optional[SupportRegion]:
    """Drop the pixels farthest from the seed until the rectangle densifies."""
    d2 = ((pixels.astype(float) - seed) ** 2).sum(axis=1)
    order = np.argsort(d2, kind="stable")
    pixels = pixels[order]
    d2 = d2[order]
    while len(pixels) >= min_pixels:
        region = _build_region(pixels, gmap)
        if region is not None and region.density >= density_th:
            return region
        radius2 = d2[-1] * 0.75 * 0.75
        keep = d2 <= radius2
        if keep.all():
            keep[-1] = False
        dropped = pixels[~keep]
        used[dropped[:, 1], dropped[:, 0]] = False
        pixels = pixels[keep]
        d2 = d2[keep]
    return None


def grow_regions(gmap: GradientMap, alpha_deg: float,
                 min_pixels: int = 10, density_th: float = 0.7) -> list:
    """Grow all support regions, visiting seeds in pseudo-sorted magnitude order.

    A region must reach ``density_th`` inside its circumscribed rectangle;
    failing that it is regrown once with a halved angle tolerance and, if
    still too sparse, shrunk toward its seed until dense enough or discarded.
    """
    ys, xs = np.nonzero(gmap.valid)
    if len(xs) == 0:
        return []
    mags = gmap.magnitude[ys, xs]
    top = float(mags.max())
    bins = np.minimum((mags / (top + 1e-12) * _SORT_BINS).astype(int), _SORT_BINS - 1)
    order = np.argsort(-bins, kind="stable")

    used = ~gmap.valid
    regions = []
    for idx in order:
        x = int(xs[idx])
        y = int(ys[idx])
        if used[y, x]:
            continue
        pixels = _grow(gmap, x, y, alpha_deg, used)
        if len(pixels) < min_pixels:
            continue
        region = _build_region(pixels, gmap)
        if region is not None and region.density >= density_th:
            regions.append(region)
            continue
        # Retry with a tightened tolerance: release and regrow from the seed.
        used[pixels[:, 1], pixels[:, 0]] = False
        retry = _grow(gmap, x, y, alpha_deg / 2.0, used)
        if len(retry) >= min_pixels:
            region = _build_region(retry, gmap)
            if region is not None and region.density >= density_th:
                regions.append(region)
                continue
            region = _shrink_to_density(retry, (x, y), gmap, used, density_th, min_pixels)
            if region is not None:
                regions.append(region)
                continue
        # Consume the originally grown pixels so the seed is not revisited.
        used[pixels[:, 1], pixels[:, 0]] = True
    return regions


def classify_region(region: SupportRegion, t_ai_deg: float,
                    region_id: int = -1) -> Optional[ArcSegment]:
    """Return an ArcSegment when the region curves consistently, else None.

    The halves' main angles must rotate in one sense around the overall main
    angle with a circular interval of at least ``t_ai_deg`` on both sides
    (ties accepted).  The arc direction is the main angle rotated 90 degrees
    in the rotation sense, which lands on the concave side; polarity equals
    the rotation sense.
    """
    a = region.rect_a
    b = region.rect_b
    chord = b - a
    norm = float(np.hypot(chord[0], chord[1]))
    if norm <= 1e-9:
        raise DegenerateRegionError("rectangle terminals coincide")
    d1 = wrap_deg_scalar(region.main_angle_deg - region.sub_angle_ac_deg)
    d2 = wrap_deg_scalar(region.sub_angle_cb_deg - region.main_angle_deg)
    if d1 == 0.0 or d2 == 0.0 or (d1 > 0) != (d2 > 0):
        return None
    if abs(d1) < t_ai_deg or abs(d2) < t_ai_deg:
        return None
    sense = 1 if d1 > 0 else -1
    direction = math.degrees(math.atan2(chord[1], chord[0])) % 360.0
    return ArcSegment(
        start=a.copy(),
        end=b.copy(),
        length=norm,
        direction_deg=direction,
        arc_dir=unit_vector_deg(region.main_angle_deg + 90.0 * sense),
        polarity=sense,
        region_id=region_id,
    )


def extract_arc_segments(img: GrayImage, cfg: Config):
    """Full extraction: downscale, gradient map, region growth, classification.

    Returns (segments, gradient_map, regions) in the downscaled frame.
    """
    img.check_detectable()
    work = gaussian_downscale(img, cfg.scale)
    gmap = compute_gradient_map(work, cfg.quant_threshold)
    regions = grow_regions(gmap, cfg.alpha_deg, cfg.min_region_pixels, cfg.region_density)
    segments = []
    for i, region in enumerate(regions):
        try:
            seg = classify_region(region, cfg.t_ai_deg, region_id=i)
        except DegenerateRegionError:
            continue
        if seg is not None and seg.length >= cfg.min_ls_length:
            segments.append(seg)
    return segments, gmap, regions
