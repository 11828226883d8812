"""End-to-end detection: extraction, grouping, generation, clustering,
verification, and mapping results back to input-image coordinates."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .candidates import generate_initial_set
from .clustering import hierarchical_cluster
from .config import Config
from .fitting import image_norm
from .grouping import link_groups
from .image_io import GrayImage
from .segments import extract_arc_segments
from .verification import Detection, verify_candidates


@dataclass
class PipelineStats:
    n_segments: int = 0
    n_groups: int = 0
    n_initial: int = 0
    n_candidates: int = 0
    n_detections: int = 0
    cluster_counts_consistent: bool = True
    stage_seconds: Dict[str, float] = field(default_factory=dict)


def _descale(d: Detection, scale: float) -> Detection:
    """Map a detection from the working (downscaled gradient) frame to
    input-image pixel-center coordinates."""
    g = d.geom
    cx = (g.cx + 1.0) / scale - 0.5
    cy = (g.cy + 1.0) / scale - 0.5
    geom = replace(g, cx=cx, cy=cy, a=g.a / scale, b=g.b / scale)
    return Detection(geom, d.goodness, d.inlier_count, d.coverage_deg, d.inlier_ratio)


def detect(img: GrayImage, cfg: Optional[Config] = None,
           dump_dir: Optional[Path] = None) -> Tuple[List[Detection], PipelineStats]:
    """Detect ellipses in a grayscale image.

    Returns detections in input-image coordinates plus per-stage statistics.
    """
    cfg = cfg or Config()
    stats = PipelineStats()

    t0 = time.perf_counter()
    segments, gmap, regions = extract_arc_segments(img, cfg)
    if cfg.polarity_mode == "positive":
        segments = [s for s in segments if s.polarity == 1]
    elif cfg.polarity_mode == "negative":
        segments = [s for s in segments if s.polarity == -1]
    elif cfg.polarity_mode != "all":
        raise ValueError(f"unknown polarity mode {cfg.polarity_mode!r}")
    stats.n_segments = len(segments)
    stats.stage_seconds["extract"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    groups = link_groups(segments, regions, cfg.alpha_deg, cfg.epsilon_px,
                         cfg.link_window_factor, cfg.link_extension_factor)
    stats.n_groups = len(groups)
    stats.stage_seconds["group"] = time.perf_counter() - t0

    norm = image_norm(gmap.width, gmap.height)
    t0 = time.perf_counter()
    initial = generate_initial_set(groups, regions, gmap, cfg, norm)
    stats.n_initial = len(initial)
    stats.stage_seconds["generate"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    diag = math.hypot(gmap.width, gmap.height)
    cands = hierarchical_cluster(initial, cfg, diag)
    stats.n_candidates = cands.count
    stats.cluster_counts_consistent = cands.counts_consistent()
    stats.stage_seconds["cluster"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    detections = verify_candidates(cands, gmap, cfg, norm)
    stats.stage_seconds["verify"] = time.perf_counter() - t0

    detections = [_descale(d, cfg.scale) for d in detections]
    stats.n_detections = len(detections)

    if dump_dir is not None:
        _dump_stages(Path(dump_dir), segments, groups)
    return detections, stats


def _dump_stages(dump_dir: Path, segments, groups) -> None:
    dump_dir.mkdir(parents=True, exist_ok=True)
    with open(dump_dir / "segments.txt", "w") as fh:
        for seg in segments:
            fh.write(f"{seg.start[0]:.3f} {seg.start[1]:.3f} "
                     f"{seg.end[0]:.3f} {seg.end[1]:.3f} {seg.polarity:+d} "
                     f"{seg.arc_dir[0]:.6f} {seg.arc_dir[1]:.6f} {seg.region_id}\n")
    seg_ids = {id(seg): i for i, seg in enumerate(segments)}
    with open(dump_dir / "groups.txt", "w") as fh:
        for gi, group in enumerate(groups):
            ids = " ".join(str(seg_ids[id(s)]) for s in group.segments)
            fh.write(f"{gi} saliency={group.saliency:.4f} members=[{ids}]\n")
