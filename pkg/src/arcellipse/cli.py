"""Command-line ellipse detection.

Usage:
    detect <image> [--tr F] [--tac DEG] [--polarity all|positive|negative]
                   [--format json|csv] [--overlay PATH] [--dump-stages DIR]
                   [--scale F] [--seedless]

Prints one record per detection (cx, cy, a, b, phi_deg, polarity, goodness,
inliers, coverage_deg) as JSON or CSV on stdout.  Exit codes: 0 success
(even with zero detections), 1 input error, 2 bad flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .config import Config
from .errors import DetectorError
from .fitting import EllipseGeom
from .image_io import GrayImage, load_grayscale, write_pgm
from .pipeline import detect

FIELDS = ["cx", "cy", "a", "b", "phi_deg", "polarity", "goodness",
          "inliers", "coverage_deg"]


def detection_record(d) -> dict:
    g = d.geom
    return {
        "cx": round(g.cx, 6),
        "cy": round(g.cy, 6),
        "a": round(g.a, 6),
        "b": round(g.b, 6),
        "phi_deg": round(g.phi_deg, 6),
        "polarity": g.polarity,
        "goodness": round(d.goodness, 6),
        "inliers": d.inlier_count,
        "coverage_deg": round(d.coverage_deg, 6),
    }


def format_detections(detections, fmt: str) -> str:
    records = [detection_record(d) for d in detections]
    if fmt == "json":
        return json.dumps(records, indent=2) + "\n"
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(FIELDS)
    for rec in records:
        writer.writerow([f"{rec[f]:.6f}" if isinstance(rec[f], float) else rec[f]
                         for f in FIELDS])
    return out.getvalue()


def draw_overlay(img: GrayImage, detections, intensity: float) -> GrayImage:
    """Stroke each detection's boundary at 1 px onto a copy of the input."""
    canvas = img.data.copy()
    for d in detections:
        g = d.geom
        n = max(64, int(8.0 * g.a))
        ts = np.linspace(0.0, 360.0, n, endpoint=False)
        pts = np.rint(g.boundary_points(ts)).astype(int)
        keep = ((pts[:, 0] >= 0) & (pts[:, 0] < img.width)
                & (pts[:, 1] >= 0) & (pts[:, 1] < img.height))
        pts = pts[keep]
        canvas[pts[:, 1], pts[:, 0]] = intensity
    return GrayImage(img.width, img.height, canvas)


def save_overlay(path: Path, overlay: GrayImage) -> None:
    if path.suffix.lower() == ".png":
        from PIL import Image
        arr = np.clip(np.rint(overlay.data), 0, 255).astype(np.uint8)
        Image.fromarray(arr, mode="L").save(path)
    else:
        write_pgm(path, overlay)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="detect",
        description="Detect ellipses in a grayscale image (PGM P2/P5 or 8-bit PNG).")
    parser.add_argument("image", help="input image path")
    parser.add_argument("--tr", type=float, default=None,
                        help="inlier ratio threshold (default 0.6)")
    parser.add_argument("--tac", type=float, default=None,
                        help="angular coverage threshold in degrees (default 165)")
    parser.add_argument("--polarity", choices=["all", "positive", "negative"],
                        default="all", help="restrict detection to one polarity")
    parser.add_argument("--format", choices=["json", "csv"], default="json",
                        help="output format (default json)")
    parser.add_argument("--overlay", type=Path, default=None,
                        help="write an overlay image with detections drawn")
    parser.add_argument("--overlay-intensity", type=float, default=255.0,
                        help="stroke intensity for the overlay (default 255)")
    parser.add_argument("--dump-stages", type=Path, default=None,
                        help="directory for per-stage debug dumps")
    parser.add_argument("--scale", type=float, default=None,
                        help="pre-detection downscale ratio (default 0.8)")
    parser.add_argument("--seedless", action="store_true",
                        help="skip the salient single-group branch; "
                             "only paired groups seed initial ellipses")
    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    cfg = Config()
    if args.tr is not None:
        cfg.t_r = args.tr
    if args.tac is not None:
        cfg.t_ac_deg = args.tac
    if args.scale is not None:
        if not (0.0 < args.scale <= 1.0):
            print(f"error: --scale must be in (0, 1], got {args.scale}",
                  file=sys.stderr)
            return 2
        cfg.scale = args.scale
    cfg.polarity_mode = args.polarity
    if args.seedless:
        cfg.local_branch = False

    try:
        img = load_grayscale(args.image)
    except (DetectorError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    detections, _stats = detect(img, cfg, dump_dir=args.dump_stages)
    sys.stdout.write(format_detections(detections, args.format))

    if args.overlay is not None:
        overlay = draw_overlay(img, detections, args.overlay_intensity)
        try:
            save_overlay(args.overlay, overlay)
        except OSError as exc:
            print(f"error: cannot write overlay: {exc}", file=sys.stderr)
            return 1
    return 0


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
