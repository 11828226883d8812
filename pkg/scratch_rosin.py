"""Diagnose rosin_distance error distribution with a robust oracle."""
import math

import numpy as np

from arcellipse.fitting import EllipseGeom, rosin_distance


def ortho_dist_robust(p, e):
    """Dense scan + golden polish on the parametric angle."""
    uv = e.to_canonical(np.asarray(p, float)[None, :])[0]
    x, y = uv
    a, b = e.a, e.b
    ts = np.linspace(0, 2 * math.pi, 1441)
    d2 = (x - a * np.cos(ts)) ** 2 + (y - b * np.sin(ts)) ** 2
    i = int(np.argmin(d2))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)]
    f = lambda t: (x - a * math.cos(t)) ** 2 + (y - b * math.sin(t)) ** 2
    gr = (math.sqrt(5) - 1) / 2
    c = hi - gr * (hi - lo)
    d = lo + gr * (hi - lo)
    for _ in range(80):
        if f(c) < f(d):
            hi = d
        else:
            lo = c
        c = hi - gr * (hi - lo)
        d = lo + gr * (hi - lo)
    return math.sqrt(f(0.5 * (lo + hi)))


rng = np.random.default_rng(7)
worst = []
for k in range(4000):
    a = rng.uniform(10, 120)
    ratio = rng.uniform(0.2, 1.0)
    b = a * ratio
    ee = EllipseGeom(0, 0, a, b, 0)
    t = rng.uniform(0, 360)
    d = rng.uniform(-0.25 * b, 0.25 * b)
    tr = math.radians(t)
    bp = np.array([a * math.cos(tr), b * math.sin(tr)])
    tang = np.array([-a * math.sin(tr), b * math.cos(tr)])
    nvec = np.array([tang[1], -tang[0]])
    nvec /= np.hypot(*nvec)
    if nvec @ bp < 0:
        nvec = -nvec
    p = bp + d * nvec
    true = ortho_dist_robust(p, ee)
    approx = rosin_distance(p, ee)
    if true > 1e-9:
        rel = abs(approx - true) / true
        worst.append((rel, ratio, d / b, t % 360, a, true, approx))

worst.sort(reverse=True)
print("top-10 worst:")
for rel, ratio, db, t, a, true, approx in worst[:10]:
    print(f"  rel={rel:.3f} ratio={ratio:.2f} d/b={db:+.2f} t={t:7.2f} a={a:6.1f} "
          f"true={true:7.3f} approx={approx:7.3f}")
rels = np.array([w[0] for w in worst])
print("frac >10%:", (rels > 0.10).mean(), " max:", rels.max())
for lo in (0.2, 0.3, 0.4, 0.5):
    sel = np.array([w[0] for w in worst if w[1] >= lo])
    print(f"ratio>={lo}: max rel {sel.max():.4f}")
