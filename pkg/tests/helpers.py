"""Shared synthetic-scene builders for the test suite."""

import numpy as np

from arcellipse.bench import SyntheticCanvas, overlap_ratio
from arcellipse.fitting import EllipseGeom


def single_ellipse_image(a, ratio, phi=0.0, coverage=360.0, side=250,
                         polarity=-1):
    """One anti-aliased ellipse centered on the canvas; returns (img, gt)."""
    fg, bg = (40.0, 220.0) if polarity == -1 else (220.0, 40.0)
    canvas = SyntheticCanvas(side, side, bg)
    cx = cy = side / 2.0
    b = max(a * ratio, 0.5)
    canvas.draw_ellipse(cx, cy, a, b, phi, fg, coverage)
    return canvas.to_image(), EllipseGeom(cx, cy, a, b, phi % 180.0, polarity)


def concentric_rings_image(n=8, a0=110.0, b0=86.0, gap=6.0, phi=15.0, side=250):
    """Nested filled ellipses with alternating fill; returns (img, gts)."""
    canvas = SyntheticCanvas(side, side, 220.0)
    gts = []
    for i in range(n):
        fill = 40.0 if i % 2 == 0 else 220.0
        a = a0 - gap * i
        b = b0 - gap * i
        canvas.draw_ellipse(side / 2.0, side / 2.0, a, b, phi, fill)
        polarity = -1 if i % 2 == 0 else 1
        gts.append(EllipseGeom(side / 2.0, side / 2.0, a, b, phi, polarity))
    return canvas.to_image(), gts


def ring_belt_image(belts=((100, 86), (70, 58), (40, 30)), ratio=0.75,
                    side=300):
    """Dark elliptic belts on bright ground; each belt contributes a
    negative-polarity outer ellipse and a positive-polarity inner one."""
    canvas = SyntheticCanvas(side, side, 220.0)
    c = side / 2.0
    negatives, positives = [], []
    for outer, inner in belts:
        canvas.draw_ellipse(c, c, outer, outer * ratio, 0.0, 40.0)
        canvas.draw_ellipse(c, c, inner, inner * ratio, 0.0, 220.0)
        negatives.append(EllipseGeom(c, c, outer, outer * ratio, 0.0, -1))
        positives.append(EllipseGeom(c, c, inner, inner * ratio, 0.0, 1))
    return canvas.to_image(), negatives, positives


def cluttered_scene_image():
    """Two ellipses plus straight bars (the classic mixed scene)."""
    canvas = SyntheticCanvas(300, 200, 220.0)
    gts = [EllipseGeom(90, 100, 70, 40, 20.0, -1),
           EllipseGeom(220, 90, 55, 45, 150.0, -1)]
    canvas.draw_ellipse(90, 100, 70, 40, 20.0, 40.0)
    canvas.draw_ellipse(220, 90, 55, 45, 150.0, 40.0)
    canvas.draw_bar((10, 20), (280, 20), 4, 40.0)
    canvas.draw_bar((20, 180), (250, 160), 4, 40.0)
    canvas.draw_bar((10, 60), (60, 190), 4, 40.0)
    return canvas.to_image(), gts


def blank_image(side=250, level=128.0):
    return SyntheticCanvas(side, side, level).to_image()


def best_overlap(detections, gt_geom, canvas):
    """Best IoU of any detection against one ground-truth ellipse."""
    return max((overlap_ratio(d.geom, gt_geom, canvas) for d in detections),
               default=0.0)


def to_working(value, scale=0.8):
    """Input-image coordinate -> downscaled gradient-frame coordinate."""
    return (value + 0.5) * scale - 1.0


def working_geom(gt: EllipseGeom, scale=0.8) -> EllipseGeom:
    return EllipseGeom(to_working(gt.cx, scale), to_working(gt.cy, scale),
                       gt.a * scale, gt.b * scale, gt.phi_deg, gt.polarity)
