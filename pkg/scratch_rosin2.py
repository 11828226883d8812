"""Compare focal-distance approximations against the robust oracle."""
import math

import numpy as np

from arcellipse.fitting import EllipseGeom


def ortho_dist_robust(p, e):
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


def ray_bisector(p, e):
    """|PX| cos(beta): X = focal-ray boundary hit, beta = half focal angle at X."""
    uv = e.to_canonical(np.asarray(p, float)[None, :])[0]
    a, b = e.a, e.b
    c = math.sqrt(max(a * a - b * b, 0.0))
    f1 = np.array([c, 0.0])
    f2 = np.array([-c, 0.0])
    v = uv - f1
    rho1 = float(np.hypot(*v))
    if rho1 < 1e-12:
        return a - c
    u = v / rho1
    el = b * b / a  # semi-latus rectum
    ecc = c / a
    rho_b = el / (1.0 + ecc * u[0])
    x = f1 + rho_b * u
    w1 = f1 - x
    w2 = f2 - x
    n1 = np.hypot(*w1)
    n2 = np.hypot(*w2)
    cosg = float(np.clip((w1 @ w2) / (n1 * n2), -1.0, 1.0))
    beta = 0.5 * math.acos(cosg)
    return abs(rho_b - rho1) * math.cos(beta)


rng = np.random.default_rng(7)
rels = []
for k in range(6000):
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
    approx = ray_bisector(p, ee)
    if true > 1e-9:
        rels.append((abs(approx - true) / true, ratio, d / b, t % 360, a, true, approx))

rels.sort(reverse=True)
print("ray-bisector top-8 worst:")
for rel, ratio, db, t, a, true, approx in rels[:8]:
    print(f"  rel={rel:.4f} ratio={ratio:.2f} d/b={db:+.2f} t={t:7.2f} a={a:6.1f} "
          f"true={true:7.3f} approx={approx:7.3f}")
arr = np.array([r[0] for r in rels])
print("frac >10%:", (arr > 0.10).mean(), " max:", arr.max())
for lo in (0.2, 0.3, 0.5):
    sel = np.array([r[0] for r in rels if r[1] >= lo])
    print(f"ratio>={lo}: max rel {sel.max():.4f}")
# circle exactness
circ = EllipseGeom(10, -5, 30, 30, 0)
print("circle check:", ray_bisector(np.array([10 + 33.0, -5]), circ))
print("boundary check:", ray_bisector(circ.boundary_points(np.array([77.0]))[0], circ))
