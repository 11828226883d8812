"""Scratch sanity checks (not part of the deliverable)."""
import math
import time

import numpy as np

from arcellipse.bench import SyntheticCanvas
from arcellipse.config import Config
from arcellipse.fitting import EllipseGeom, fit_points, rosin_distance
from arcellipse.image_io import compute_gradient_map
from arcellipse.pipeline import detect
from arcellipse.segments import extract_arc_segments

# 1. fit round-trip
rng = np.random.default_rng(0)
e = EllipseGeom(120, 90, 80, 40, 30)
ts = rng.uniform(0, 360, 12)
pts = e.boundary_points(ts)
fit = fit_points(pts)
print("fit:", fit.cx, fit.cy, fit.a, fit.b, fit.phi_deg)

# 2. orthogonal-projection oracle vs rosin
def ortho_dist(p, e):
    uv = e.to_canonical(np.asarray(p, float)[None, :])[0]
    x, y = abs(uv[0]), abs(uv[1])
    a, b = e.a, e.b
    t = math.atan2(y * a, x * b)
    for _ in range(60):
        ct, st = math.cos(t), math.sin(t)
        f = (a*a - b*b) * ct * st - x * a * st + y * b * ct
        fp = (a*a - b*b) * math.cos(2*t) - x * a * ct - y * b * st
        if fp == 0:
            break
        step = f / fp
        t -= step
        t = min(max(t, 0.0), math.pi / 2)
        if abs(step) < 1e-14:
            break
    return math.hypot(x - a * math.cos(t), y - b * math.sin(t))

worst = 0.0
for _ in range(3000):
    a = rng.uniform(10, 120)
    ratio = rng.uniform(0.2, 1.0)
    b = a * ratio
    ee = EllipseGeom(rng.uniform(-50, 50), rng.uniform(-50, 50), a, b, rng.uniform(0, 180))
    t = rng.uniform(0, 360)
    d = rng.uniform(-0.25 * b, 0.25 * b)
    bp = ee.boundary_points(np.array([t]))[0]
    from arcellipse.fitting import ellipse_normal
    nrm = ellipse_normal(bp + 1e-9, ee) if False else None
    # normal via parametric formula
    tr = math.radians(t)
    phi = math.radians(ee.phi_deg)
    tang = np.array([-ee.a*math.sin(tr), ee.b*math.cos(tr)])
    c, s = math.cos(phi), math.sin(phi)
    tang = np.array([c*tang[0]-s*tang[1], s*tang[0]+c*tang[1]])
    nvec = np.array([tang[1], -tang[0]])
    nvec /= np.hypot(*nvec)
    # orient outward
    if nvec @ (bp - np.array([ee.cx, ee.cy])) < 0:
        nvec = -nvec
    p = bp + d * nvec
    true = ortho_dist(p, ee)
    approx = rosin_distance(p, ee)
    if true > 1e-9:
        rel = abs(approx - true) / true
        worst = max(worst, rel)
print("rosin worst rel error (ratio>=0.2):", worst)

# 3. disk arc_dir / polarity check
canvas = SyntheticCanvas(120, 120, 40.0)
canvas.draw_ellipse(60, 60, 40, 40, 0, 220.0)  # bright disk on dark
img = canvas.to_image()
cfg = Config()
t0 = time.time()
segs, gmap, regions = extract_arc_segments(img, cfg)
print(f"bright disk: {len(segs)} segments, {len(regions)} regions, {time.time()-t0:.3f}s")
center_scaled = np.array([(60 + 0.5) * cfg.scale - 0.5 - 0.5, (60 + 0.5) * cfg.scale - 0.5 - 0.5])
# center in working frame: spatial shift: W = S_scaled - 0.5; S_scaled = (S_in+0.5)*scale-0.5
cw = (60 + 0.5) * cfg.scale - 0.5 - 0.5
for s in segs[:6]:
    to_center = np.array([cw, cw]) - s.midpoint()
    to_center /= np.hypot(*to_center)
    print("  pol", s.polarity, "arc_dir·to_center", round(float(s.arc_dir @ to_center), 3),
          "len", round(s.length, 1))

# 4. end-to-end single ellipse
canvas = SyntheticCanvas(250, 250, 220.0)
canvas.draw_ellipse(125, 125, 100, 50, 30, 40.0)
img = canvas.to_image()
t0 = time.time()
dets, stats = detect(img, Config())
print(f"detect: {len(dets)} detections in {time.time()-t0:.3f}s; stats={stats.n_segments} segs, "
      f"{stats.n_groups} groups, {stats.n_initial} init, {stats.n_candidates} cands")
for d in dets:
    g = d.geom
    print("  ", round(g.cx,2), round(g.cy,2), round(g.a,2), round(g.b,2), round(g.phi_deg,2),
          g.polarity, round(d.goodness,3), d.inlier_count, round(d.coverage_deg,1))
