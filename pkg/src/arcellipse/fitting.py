"""Direct least-squares ellipse fitting on mergeable scatter matrices, plus
the point-to-ellipse geometry used by candidate generation and verification.

The fit solves the generalized eigensystem ``S u = lambda C u`` where ``S`` is
the 6x6 scatter of conic design rows [x^2, xy, y^2, x, y, 1] and ``C`` is the
constant constraint matrix with nonzero block C[0][2] = C[2][0] = -1,
C[1][1] = 2.  Scatter matrices accumulated over disjoint point sets add
elementwise, so partial fits can be merged without revisiting points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import AtCenterError, NonEllipseError, SingularFitError

# Inverse of the 3x3 constraint block [[0,0,-1],[0,2,0],[-1,0,0]].
_C1_INV = np.array([
    [0.0, 0.0, -1.0],
    [0.0, 0.5, 0.0],
    [-1.0, 0.0, 0.0],
])


@dataclass(frozen=True)
class NormTransform:
    """Isotropic conditioning transform x' = (x - x0) * scale."""

    x0: float = 0.0
    y0: float = 0.0
    scale: float = 1.0

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return (pts - (self.x0, self.y0)) * self.scale


IDENTITY_NORM = NormTransform()


def image_norm(width: int, height: int) -> NormTransform:
    """Shared conditioning transform for all scatters built from one image."""
    diag = math.hypot(width, height)
    return NormTransform(width / 2.0, height / 2.0, 2.0 / diag)


@dataclass
class ScatterMatrix:
    """6x6 accumulator S = D^T D over conic design rows, plus point count.

    Scatters may only be merged when they share the same conditioning
    transform; within one image everything uses the image-global transform.
    """

    s: np.ndarray
    count: int
    norm: NormTransform = IDENTITY_NORM

    @classmethod
    def zero(cls, norm: NormTransform = IDENTITY_NORM) -> "ScatterMatrix":
        return cls(np.zeros((6, 6)), 0, norm)


@dataclass(frozen=True)
class EllipseGeom:
    """Geometric ellipse: center, orientation in [0, 180) deg, semi-axes a >= b.

    ``polarity`` is +1 when the interior side of the boundary is brighter
    than the exterior, -1 when darker, 0 when unspecified.
    """

    cx: float
    cy: float
    a: float
    b: float
    phi_deg: float
    polarity: int = 0

    def __post_init__(self):
        a, b, phi = float(self.a), float(self.b), float(self.phi_deg)
        if not (a > 0.0 and b > 0.0) or not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError(f"semi-axes must be positive, got a={a}, b={b}")
        if b > a:
            a, b = b, a
            phi += 90.0
        phi %= 180.0
        if (a - b) <= 1e-9 * a:
            phi = 0.0
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "phi_deg", phi)
        object.__setattr__(self, "cx", float(self.cx))
        object.__setattr__(self, "cy", float(self.cy))

    def _rotation(self):
        rad = math.radians(self.phi_deg)
        return math.cos(rad), math.sin(rad)

    def to_canonical(self, points: np.ndarray) -> np.ndarray:
        """Map image points into the axis-aligned, center-origin frame."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        c, s = self._rotation()
        dx = pts[:, 0] - self.cx
        dy = pts[:, 1] - self.cy
        return np.column_stack((c * dx + s * dy, -s * dx + c * dy))

    def from_canonical(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        c, s = self._rotation()
        x = c * pts[:, 0] - s * pts[:, 1] + self.cx
        y = s * pts[:, 0] + c * pts[:, 1] + self.cy
        return np.column_stack((x, y))

    def boundary_points(self, t_deg: np.ndarray) -> np.ndarray:
        """Boundary samples at the given eccentric angles (degrees)."""
        t = np.radians(np.asarray(t_deg, dtype=float))
        return self.from_canonical(
            np.column_stack((self.a * np.cos(t), self.b * np.sin(t))))

    def foci(self):
        c = math.sqrt(max(self.a * self.a - self.b * self.b, 0.0))
        cc, ss = self._rotation()
        f = np.array([cc * c, ss * c])
        center = np.array([self.cx, self.cy])
        return center + f, center - f

    def eccentric_angles_deg(self, points: np.ndarray) -> np.ndarray:
        uv = self.to_canonical(points)
        t = np.degrees(np.arctan2(uv[:, 1] / self.b, uv[:, 0] / self.a))
        return np.mod(t, 360.0)

    def contains(self, points: np.ndarray) -> np.ndarray:
        uv = self.to_canonical(points)
        return (uv[:, 0] / self.a) ** 2 + (uv[:, 1] / self.b) ** 2 <= 1.0


def design_rows(points: np.ndarray) -> np.ndarray:
    """Conic design rows [x^2, xy, y^2, x, y, 1] for each point."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x, y = pts[:, 0], pts[:, 1]
    return np.column_stack((x * x, x * y, y * y, x, y, np.ones_like(x)))


def accumulate_scatter(points, norm: NormTransform = IDENTITY_NORM) -> ScatterMatrix:
    """Accumulate the 6x6 scatter of a point set under the given transform."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise SingularFitError("cannot accumulate an empty point set")
    d = design_rows(norm.apply(pts))
    return ScatterMatrix(d.T @ d, len(pts), norm)


def merge_scatter(parts: Sequence[ScatterMatrix]) -> ScatterMatrix:
    """Elementwise sum of scatters sharing one conditioning transform."""
    if not parts:
        raise SingularFitError("cannot merge an empty scatter list")
    ref = parts[0].norm
    for p in parts[1:]:
        if not (math.isclose(p.norm.x0, ref.x0) and math.isclose(p.norm.y0, ref.y0)
                and math.isclose(p.norm.scale, ref.scale)):
            raise ValueError("scatter matrices carry different conditioning transforms")
    total = np.zeros((6, 6))
    count = 0
    for p in parts:
        total += p.s
        count += p.count
    return ScatterMatrix(total, count, ref)


def _conic_to_geometry(u: np.ndarray) -> tuple:
    """Convert conic coefficients (A,B,C,D,E,F) to (cx, cy, a, b, phi_deg)."""
    A, B, C, D, E, F = (float(v) for v in u)
    m = np.array([[2.0 * A, B], [B, 2.0 * C]])
    det = np.linalg.det(m)
    if abs(det) < 1e-300:
        raise NonEllipseError("degenerate conic: no finite center")
    cx, cy = np.linalg.solve(m, [-D, -E])
    f_c = F + 0.5 * (D * cx + E * cy)
    quad = np.array([[A, B / 2.0], [B / 2.0, C]])
    evals, evecs = np.linalg.eigh(quad)
    axes2 = np.empty(2)
    for i in range(2):
        if evals[i] == 0.0:
            raise NonEllipseError("degenerate conic: zero quadratic eigenvalue")
        axes2[i] = -f_c / evals[i]
    if axes2[0] <= 0.0 or axes2[1] <= 0.0:
        raise NonEllipseError("conic is not an ellipse")
    semi = np.sqrt(axes2)
    major = int(np.argmax(semi))
    phi = math.degrees(math.atan2(evecs[1, major], evecs[0, major]))
    return float(cx), float(cy), float(semi[major]), float(semi[1 - major]), phi % 180.0


def fit_ellipse(scatter: ScatterMatrix) -> EllipseGeom:
    """Fit an ellipse from an accumulated scatter matrix.

    Raises SingularFitError for rank-deficient scatters (fewer than five
    points, collinear points) and NonEllipseError when no eigenvector has a
    positive ellipse discriminant 4*u0*u2 - u1^2.
    """
    if scatter.count < 5:
        raise SingularFitError(f"need at least 5 points, got {scatter.count}")
    s = scatter.s
    s1 = s[:3, :3]
    s2 = s[:3, 3:]
    s3 = s[3:, 3:]
    try:
        if np.linalg.cond(s3) > 1e12:
            raise SingularFitError("degenerate point configuration")
        t = -np.linalg.solve(s3, s2.T)
    except np.linalg.LinAlgError as exc:
        raise SingularFitError("degenerate point configuration") from exc
    reduced = _C1_INV @ (s1 + s2 @ t)
    evals, evecs = np.linalg.eig(reduced)

    best = None
    best_residual = math.inf
    for i in range(3):
        if abs(evals[i].imag) > 1e-8 * (abs(evals[i].real) + 1.0):
            continue
        v = np.real(evecs[:, i])
        nv = np.linalg.norm(v)
        if nv == 0.0 or not np.all(np.isfinite(v)):
            continue
        v = v / nv
        disc = 4.0 * v[0] * v[2] - v[1] * v[1]
        if disc <= 0.0:
            continue
        u = np.concatenate((v, t @ v))
        residual = float(u @ s @ u) / float(u @ u)
        if residual < best_residual:
            best_residual = residual
            best = u
    if best is None:
        raise NonEllipseError("no eigenvector satisfies the ellipse discriminant")

    cx, cy, a, b, phi = _conic_to_geometry(best)
    n = scatter.norm
    return EllipseGeom(cx / n.scale + n.x0, cy / n.scale + n.y0,
                       a / n.scale, b / n.scale, phi)


def fit_points(points) -> EllipseGeom:
    """Fit raw points, conditioning them to zero mean / unit spread first."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if len(pts) < 5:
        raise SingularFitError(f"need at least 5 points, got {len(pts)}")
    mean = pts.mean(axis=0)
    spread = float(np.sqrt(((pts - mean) ** 2).sum(axis=1).mean()))
    scale = math.sqrt(2.0) / spread if spread > 0 else 1.0
    norm = NormTransform(float(mean[0]), float(mean[1]), scale)
    return fit_ellipse(accumulate_scatter(pts, norm))


def with_polarity(e: EllipseGeom, polarity: int) -> EllipseGeom:
    return replace(e, polarity=polarity)


def rosin_distance_many(points: np.ndarray, e: EllipseGeom) -> np.ndarray:
    """Focal-chord-bisector approximation of point-to-boundary distance.

    The ray from the farther focus through the point crosses the boundary at
    a chord point X whose normal bisects the focal angle; the distance is the
    normal component of the residual there, refined once by sliding X along
    the boundary by the tangential residual.  Exact for circles and for
    points on the boundary; within a few percent of the true orthogonal
    distance for points near the boundary.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    a, b = e.a, e.b
    uv = e.to_canonical(pts)
    c = math.sqrt(max(a * a - b * b, 0.0))
    rho1 = np.hypot(uv[:, 0] - c, uv[:, 1])
    rho2 = np.hypot(uv[:, 0] + c, uv[:, 1])
    use_f1 = rho1 >= rho2
    sign = np.where(use_f1, 1.0, -1.0)
    rho = np.where(use_f1, rho1, rho2)
    safe_rho = np.maximum(rho, 1e-12)
    ux = (uv[:, 0] - sign * c) / safe_rho
    uy = uv[:, 1] / safe_rho
    semi_latus = b * b / a
    ecc = c / a
    rho_b = semi_latus / (1.0 + ecc * sign * ux)
    x_hit = np.column_stack((sign * c + rho_b * ux, rho_b * uy))
    resid = uv - x_hit

    t = np.arctan2(x_hit[:, 1] / b, x_hit[:, 0] / a)
    nx = np.cos(t) / a
    ny = np.sin(t) / b
    nmag = np.hypot(nx, ny)
    d0 = np.abs(resid[:, 0] * nx + resid[:, 1] * ny) / nmag

    # One tangential refinement, applied only near the boundary where the
    # slide is local; far away the chord estimate is already conservative.
    near = d0 <= 0.5 * b
    if np.any(near):
        tx = -a * np.sin(t[near])
        ty = b * np.cos(t[near])
        speed = np.hypot(tx, ty)
        dt = (resid[near, 0] * tx + resid[near, 1] * ty) / (speed * speed)
        t2 = t[near] + dt
        x2 = np.column_stack((a * np.cos(t2), b * np.sin(t2)))
        n2x = np.cos(t2) / a
        n2y = np.sin(t2) / b
        n2mag = np.hypot(n2x, n2y)
        res2 = uv[near] - x2
        d0 = d0.copy()
        d0[near] = np.abs(res2[:, 0] * n2x + res2[:, 1] * n2y) / n2mag
    # Points at coincident foci (circle center): distance is the radius.
    center = rho < 1e-12
    if np.any(center):
        d0 = d0.copy()
        d0[center] = a - c
    return d0


def rosin_distance(point, e: EllipseGeom) -> float:
    return float(rosin_distance_many(np.asarray(point, dtype=float)[None, :], e)[0])


def ellipse_normal_many(points: np.ndarray, e: EllipseGeom) -> np.ndarray:
    """Outward unit normals of the implicit conic evaluated at the points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    uv = e.to_canonical(pts)
    gu = uv[:, 0] / (e.a * e.a)
    gv = uv[:, 1] / (e.b * e.b)
    c, s = e._rotation()
    gx = c * gu - s * gv
    gy = s * gu + c * gv
    mag = np.hypot(gx, gy)
    if np.any(mag < 1e-12 / e.a):
        raise AtCenterError("normal undefined at the ellipse center")
    return np.column_stack((gx / mag, gy / mag))


def ellipse_normal(point, e: EllipseGeom) -> np.ndarray:
    return ellipse_normal_many(np.asarray(point, dtype=float)[None, :], e)[0]


def perimeter_approx(e: EllipseGeom) -> float:
    """Ramanujan-style perimeter approximation pi*(3/2*(a+b) - sqrt(a*b))."""
    return math.pi * (1.5 * (e.a + e.b) - math.sqrt(e.a * e.b))
