"""Synthetic dataset generation, overlap scoring and runtime measurement.

The generator renders anti-aliased ellipses (4x supersampled coverage) onto
uniform backgrounds, optionally restricted to an eccentric-angle range to
mimic occluded arcs, and writes binary graymaps next to per-image ground
truth CSVs.  Evaluation matches detections to ground truth greedily by
rasterized intersection-over-union.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config import Config
from .errors import InsufficientSamplesError
from .fitting import EllipseGeom
from .image_io import GrayImage, write_pgm

_SUBSAMPLES = 4


@dataclass
class GroundTruthRecord:
    geom: EllipseGeom
    coverage_deg: float = 360.0


@dataclass
class EvalReport:
    precision: float
    recall: float
    f_measure: float
    mor: float
    true_positives: int
    false_positives: int
    false_negatives: int
    d0: float
    matches: List[List[Tuple[int, int, float]]] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f_measure": self.f_measure,
            "mor": self.mor,
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "d0": self.d0,
            "matches": [
                [{"detection": d, "truth": g, "overlap": o} for d, g, o in per_img]
                for per_img in self.matches
            ],
        }


class SyntheticCanvas:
    """Float canvas composited with supersampled coverage fractions."""

    def __init__(self, width: int = 250, height: int = 250, background: float = 220.0):
        self.width = width
        self.height = height
        self.data = np.full((height, width), float(background))

    def _subgrid(self, x0: int, x1: int, y0: int, y1: int):
        sub = (np.arange(_SUBSAMPLES) + 0.5) / _SUBSAMPLES - 0.5
        xs = (np.arange(x0, x1)[:, None] + sub[None, :]).ravel()
        ys = (np.arange(y0, y1)[:, None] + sub[None, :]).ravel()
        gx, gy = np.meshgrid(xs, ys)
        return gx, gy

    def _composite(self, x0, x1, y0, y1, inside, intensity):
        h = y1 - y0
        w = x1 - x0
        frac = inside.reshape(h, _SUBSAMPLES, w, _SUBSAMPLES).mean(axis=(1, 3))
        patch = self.data[y0:y1, x0:x1]
        self.data[y0:y1, x0:x1] = patch * (1.0 - frac) + intensity * frac

    def draw_ellipse(self, cx: float, cy: float, a: float, b: float,
                     phi_deg: float = 0.0, intensity: float = 40.0,
                     coverage_deg: float = 360.0) -> None:
        """Fill an ellipse; coverage below 360 keeps only the elliptical
        sector whose boundary spans that eccentric-angle range."""
        margin = max(a, b) + 2.0
        x0 = max(0, int(math.floor(cx - margin)))
        x1 = min(self.width, int(math.ceil(cx + margin)) + 1)
        y0 = max(0, int(math.floor(cy - margin)))
        y1 = min(self.height, int(math.ceil(cy + margin)) + 1)
        if x0 >= x1 or y0 >= y1:
            return
        gx, gy = self._subgrid(x0, x1, y0, y1)
        c = math.cos(math.radians(phi_deg))
        s = math.sin(math.radians(phi_deg))
        u = (c * (gx - cx) + s * (gy - cy)) / a
        v = (-s * (gx - cx) + c * (gy - cy)) / b
        inside = u * u + v * v <= 1.0
        if coverage_deg < 360.0:
            t = np.degrees(np.arctan2(v, u))
            half = coverage_deg / 2.0
            inside &= np.abs(((t + 180.0) % 360.0) - 180.0) <= half
        self._composite(x0, x1, y0, y1, inside, intensity)

    def draw_bar(self, p0, p1, width: float, intensity: float = 40.0) -> None:
        """Fill a rotated rectangle of the given width between two points."""
        p0 = np.asarray(p0, dtype=float)
        p1 = np.asarray(p1, dtype=float)
        axis = p1 - p0
        length = float(np.hypot(*axis))
        u = axis / length
        n = np.array([-u[1], u[0]])
        center = 0.5 * (p0 + p1)
        margin = 0.5 * length + width
        x0 = max(0, int(math.floor(center[0] - margin)))
        x1 = min(self.width, int(math.ceil(center[0] + margin)) + 1)
        y0 = max(0, int(math.floor(center[1] - margin)))
        y1 = min(self.height, int(math.ceil(center[1] + margin)) + 1)
        if x0 >= x1 or y0 >= y1:
            return
        gx, gy = self._subgrid(x0, x1, y0, y1)
        dx = gx - center[0]
        dy = gy - center[1]
        along = dx * u[0] + dy * u[1]
        across = dx * n[0] + dy * n[1]
        inside = (np.abs(along) <= 0.5 * length) & (np.abs(across) <= 0.5 * width)
        self._composite(x0, x1, y0, y1, inside, intensity)

    def to_image(self) -> GrayImage:
        return GrayImage.from_array(np.clip(np.rint(self.data), 0, 255))


def rasterize_filled(e: EllipseGeom, width: int, height: int) -> np.ndarray:
    ys, xs = np.mgrid[0:height, 0:width]
    pts = np.column_stack((xs.ravel(), ys.ravel())).astype(float)
    return e.contains(pts).reshape(height, width)


def overlap_ratio(e1: EllipseGeom, e2: EllipseGeom, canvas: Tuple[int, int]) -> float:
    """Intersection-over-union of the two filled ellipses on the pixel grid."""
    w, h = canvas
    m1 = rasterize_filled(e1, w, h)
    m2 = rasterize_filled(e2, w, h)
    union = np.logical_or(m1, m2).sum()
    if union == 0:
        return 0.0
    return float(np.logical_and(m1, m2).sum() / union)


def evaluate(detections: Sequence[Sequence[EllipseGeom]],
             truths: Sequence[Sequence[GroundTruthRecord]],
             canvas: Tuple[int, int], d0: float = 0.8) -> EvalReport:
    """Greedy overlap matching, micro-averaged over images.

    A detection is a true positive when its overlap with a still-unmatched
    ground truth exceeds ``d0``; each truth matches at most one detection.
    """
    tp = fp = fn = 0
    overlaps_tp: List[float] = []
    all_matches: List[List[Tuple[int, int, float]]] = []
    for dets, gts in zip(detections, truths):
        pairs = []
        for di, det in enumerate(dets):
            for gi, gt in enumerate(gts):
                ov = overlap_ratio(det, gt.geom, canvas)
                if ov > d0:
                    pairs.append((-ov, di, gi))
        pairs.sort()
        det_used = set()
        gt_used = set()
        matches = []
        for neg_ov, di, gi in pairs:
            if di in det_used or gi in gt_used:
                continue
            det_used.add(di)
            gt_used.add(gi)
            matches.append((di, gi, -neg_ov))
            overlaps_tp.append(-neg_ov)
        tp += len(matches)
        fp += len(dets) - len(matches)
        fn += len(gts) - len(matches)
        all_matches.append(matches)

    precision = tp / (tp + fp) if (tp + fp) > 0 else 0.0
    recall = tp / (tp + fn) if (tp + fn) > 0 else 0.0
    if precision > 0.0 and recall > 0.0:
        f_measure = 2.0 / (1.0 / precision + 1.0 / recall)
    else:
        f_measure = 0.0
    mor = float(np.mean(overlaps_tp)) if overlaps_tp else 0.0
    return EvalReport(precision, recall, f_measure, mor, tp, fp, fn, d0, all_matches)


# --- Synthetic sweeps -------------------------------------------------------

IMAGE_SIDE = 250
FOREGROUND = 40.0
BACKGROUND = 220.0

SWEEPS = ("size_ratio", "orientation_ratio", "coverage_ratio")


def sweep_parameters(sweep: str, desk_scale: bool = True) -> List[dict]:
    """Parameter grid for one sweep; desk scale subsamples 10x per axis."""
    if sweep not in SWEEPS:
        raise ValueError(f"unknown sweep {sweep!r}; expected one of {SWEEPS}")
    a_step = 10 if desk_scale else 1
    ratio_step = 0.1 if desk_scale else 0.01
    phi_step = 20 if desk_scale else 2
    cov_step = 30 if desk_scale else 3
    ratios = np.round(np.arange(ratio_step, 1.0 + 1e-9, ratio_step), 4)
    entries = []
    if sweep == "size_ratio":
        for a in range(a_step, 101, a_step):
            for ratio in ratios:
                entries.append(dict(a=float(a), ratio=float(ratio), phi=0.0,
                                    coverage=360.0))
    elif sweep == "orientation_ratio":
        for phi in range(-88, 91, phi_step):
            for ratio in ratios:
                entries.append(dict(a=100.0, ratio=float(ratio), phi=float(phi),
                                    coverage=360.0))
    else:
        for cov in range(cov_step, 361, cov_step):
            for ratio in ratios:
                entries.append(dict(a=100.0, ratio=float(ratio), phi=0.0,
                                    coverage=float(cov)))
    return entries


def render_entry(entry: dict, polarity: int = -1,
                 side: int = IMAGE_SIDE) -> Tuple[GrayImage, GroundTruthRecord]:
    """Render one sweep entry; returns the image and its ground truth."""
    if polarity == -1:
        fg, bg = FOREGROUND, BACKGROUND
    else:
        fg, bg = BACKGROUND, FOREGROUND
    canvas = SyntheticCanvas(side, side, bg)
    cx = cy = side / 2.0
    a = entry["a"]
    b = max(entry["a"] * entry["ratio"], 0.5)
    phi = entry["phi"] % 180.0
    canvas.draw_ellipse(cx, cy, a, b, phi, fg, entry["coverage"])
    geom = EllipseGeom(cx, cy, a, b, phi, polarity)
    return canvas.to_image(), GroundTruthRecord(geom, entry["coverage"])


def write_ground_truth(path: Path, records: Sequence[GroundTruthRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cx", "cy", "a", "b", "phi_deg", "coverage_deg"])
        for rec in records:
            g = rec.geom
            writer.writerow([f"{g.cx:.6f}", f"{g.cy:.6f}", f"{g.a:.6f}",
                             f"{g.b:.6f}", f"{g.phi_deg:.6f}",
                             f"{rec.coverage_deg:.6f}"])


def read_ground_truth(path: Path) -> List[GroundTruthRecord]:
    records = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                values = [float(v) for v in row]
            except ValueError:
                continue  # header row
            coverage = values[5] if len(values) > 5 else 360.0
            records.append(GroundTruthRecord(
                EllipseGeom(values[0], values[1], values[2], values[3], values[4]),
                coverage))
    return records


def generate_synthetic(sweep: str, out_dir, desk_scale: bool = True,
                       polarity: int = -1) -> List[Tuple[Path, Path]]:
    """Write one sweep's images and ground-truth CSVs; returns file pairs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pairs = []
    for i, entry in enumerate(sweep_parameters(sweep, desk_scale)):
        img, record = render_entry(entry, polarity)
        img_path = out / f"{sweep}_{i:05d}.pgm"
        gt_path = out / f"{sweep}_{i:05d}.csv"
        write_pgm(img_path, img)
        write_ground_truth(gt_path, [record])
        pairs.append((img_path, gt_path))
    return pairs


def timing_scene(side: int, pitch: int = 128) -> GrayImage:
    """Timing workload with constant content density.

    Ellipses tile the frame at a fixed pitch so the edge content grows with
    the pixel count, the regime where detection cost tracks image area (a
    larger camera view of the same kind of scene, not a zoomed crop).
    """
    canvas = SyntheticCanvas(side, side)
    k = 0
    for cy in range(pitch // 2, side, pitch):
        for cx in range(pitch // 2, side, pitch):
            a = 44.0 if k % 2 == 0 else 36.0
            b = a * (0.75 if k % 3 else 0.55)
            canvas.draw_ellipse(cx, cy, a, b, (k * 37) % 180.0, FOREGROUND)
            k += 1
    return canvas.to_image()


def timing_sweep(images: Sequence[GrayImage], cfg: Optional[Config] = None,
                 repeats: int = 3):
    """Median detect() wall time per image plus the log-log pixel slope."""
    from .pipeline import detect

    if len(images) < 2:
        raise InsufficientSamplesError(
            f"need at least 2 image sizes to fit a trend, got {len(images)}")
    cfg = cfg or Config()
    rows = []
    for img in images:
        times = []
        for _ in range(max(1, repeats)):
            start = time.perf_counter()
            detect(img, cfg)
            times.append(time.perf_counter() - start)
        rows.append((img.width * img.height, float(np.median(times))))
    logs = np.log(np.asarray(rows, dtype=float))
    slope = float(np.polyfit(logs[:, 0], logs[:, 1], 1)[0])
    return rows, slope
