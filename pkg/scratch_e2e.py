"""End-to-end checks on the acceptance-critical synthetic scenes."""
import time

import numpy as np

from arcellipse.bench import (SyntheticCanvas, GroundTruthRecord, evaluate,
                              overlap_ratio, render_entry)
from arcellipse.config import Config
from arcellipse.fitting import EllipseGeom
from arcellipse.pipeline import detect

cfg = Config()

# 1. Orientation sweep sample
print("== orientation sweep (a=100) ==")
t0 = time.time()
for ratio in (0.3, 0.5, 0.8):
    for phi in (-88, -48, 2, 32, 82):
        img, gt = render_entry(dict(a=100.0, ratio=ratio, phi=float(phi), coverage=360.0))
        dets, stats = detect(img, cfg)
        best = max((overlap_ratio(d.geom, gt.geom, (250, 250)) for d in dets), default=0.0)
        print(f"  ratio={ratio} phi={phi:+d}: {len(dets)} dets, best IoU {best:.3f}")
print(f"  ({time.time()-t0:.1f}s for 15 images)")

# 2. Size sweep corners
print("== size sweep ==")
for a, ratio in ((30, 0.3), (30, 1.0), (100, 0.3), (60, 0.5), (20, 0.5), (10, 1.0)):
    img, gt = render_entry(dict(a=float(a), ratio=ratio, phi=20.0, coverage=360.0))
    dets, _ = detect(img, cfg)
    best = max((overlap_ratio(d.geom, gt.geom, (250, 250)) for d in dets), default=0.0)
    print(f"  a={a} ratio={ratio}: {len(dets)} dets, best IoU {best:.3f}")

# 3. Coverage arcs
print("== coverage sweep (a=100, ratio 0.5) ==")
for cov in (90, 120, 135, 165, 195, 240, 300, 360):
    img, gt = render_entry(dict(a=100.0, ratio=0.5, phi=30.0, coverage=float(cov)))
    dets, _ = detect(img, cfg)
    best = max((overlap_ratio(d.geom, gt.geom, (250, 250)) for d in dets), default=0.0)
    print(f"  cov={cov}: {len(dets)} dets, best IoU {best:.3f}")

# 4. Concentric ellipses, 6 px gaps
print("== concentric 8 rings ==")
canvas = SyntheticCanvas(250, 250, 220.0)
gts = []
a0, b0 = 110.0, 68.0
fills = [40.0, 220.0] * 4
for i in range(8):
    a = a0 - 6.0 * i
    b = b0 - 6.0 * i
    canvas.draw_ellipse(125, 125, a, b, 15.0, fills[i])
    gts.append(GroundTruthRecord(EllipseGeom(125, 125, a, b, 15.0)))
img = canvas.to_image()
t0 = time.time()
dets, stats = detect(img, cfg)
print(f"  {len(dets)} detections ({time.time()-t0:.2f}s), {stats.n_segments} segs, "
      f"{stats.n_groups} groups, {stats.n_initial} init, {stats.n_candidates} cands")
for gt in gts:
    best = max((overlap_ratio(d.geom, gt.geom, (250, 250)) for d in dets), default=0.0)
    print(f"  GT a={gt.geom.a:.0f}: best IoU {best:.3f}")

# 5. Ring belts, polarity modes
print("== ring belts ==")
canvas = SyntheticCanvas(300, 300, 220.0)
belts = [(100, 86), (70, 58), (40, 30)]
gts_pos, gts_neg = [], []
for outer, inner in belts:
    canvas.draw_ellipse(150, 150, outer, outer * 0.75, 0.0, 40.0)
    canvas.draw_ellipse(150, 150, inner, inner * 0.75, 0.0, 220.0)
    gts_neg.append(EllipseGeom(150, 150, outer, outer * 0.75, 0.0, -1))
    gts_pos.append(EllipseGeom(150, 150, inner, inner * 0.75, 0.0, +1))
img = canvas.to_image()
for mode in ("all", "positive", "negative"):
    c = Config()
    c.polarity_mode = mode
    dets, _ = detect(img, c)
    pols = [d.geom.polarity for d in dets]
    print(f"  mode={mode}: {len(dets)} dets, polarities {pols}")

# 6. Two ellipses + straight bars (flow-figure analog)
print("== two ellipses + bars ==")
canvas = SyntheticCanvas(300, 200, 220.0)
canvas.draw_ellipse(90, 100, 70, 40, 20.0, 40.0)
canvas.draw_ellipse(220, 90, 55, 45, 150.0, 40.0)
canvas.draw_bar((10, 20), (280, 20), 4, 40.0)
canvas.draw_bar((20, 180), (250, 160), 4, 40.0)
canvas.draw_bar((10, 60), (60, 190), 4, 40.0)
img = canvas.to_image()
dets, stats = detect(img, cfg)
print(f"  {len(dets)} detections; segs={stats.n_segments} groups={stats.n_groups} "
      f"init={stats.n_initial} cands={stats.n_candidates}")
for d in dets:
    g = d.geom
    print(f"   ({g.cx:.1f},{g.cy:.1f}) a={g.a:.1f} b={g.b:.1f} phi={g.phi_deg:.1f} pol={g.polarity}")

# 7. Blank image
blank = SyntheticCanvas(250, 250, 128.0).to_image()
dets, stats = detect(blank, cfg)
print(f"== blank: {len(dets)} dets, segs={stats.n_segments}")
