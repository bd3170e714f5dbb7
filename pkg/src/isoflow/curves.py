"""Closed simple polygons and their metric functionals.

Curves are vertex lists (counterclockwise, implicitly closed).  Length
under a conformal density u is the per-edge two-point Gauss rule applied
to sqrt(u); interior integrals use a signed fan from the area centroid,
which is exact for arbitrary simple polygons because winding
contributions of fan triangles outside the region cancel in pairs.
Radial fan panels are split where the ray crosses a circle on which the
density is only C^1, so kinked caps do not degrade the quadrature order.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
import shapely

from .errors import (DegenerateCurve, DomainError, SelfIntersection,
                     TriangulationFailure)
from .metric import ConformalMetric

_GL2 = 0.5 - 0.5 / math.sqrt(3.0)  # two-point Gauss nodes on [0, 1]
_T10, _W10 = np.polynomial.legendre.leggauss(10)
_T10 = 0.5 * (_T10 + 1.0)
_W10 = 0.5 * _W10


class ClosedCurve:
    """Simple closed polygon, counterclockwise, at least 8 vertices."""

    def __init__(self, vertices):
        pts = np.asarray(vertices, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise DegenerateCurve("vertices must be an (n, 2) array")
        if len(pts) >= 2 and np.allclose(pts[0], pts[-1]):
            pts = pts[:-1]  # tolerate explicitly closed input
        if len(pts) < 8:
            raise DegenerateCurve("need at least 8 vertices")
        if not np.all(np.isfinite(pts)):
            raise DegenerateCurve("non-finite vertex")
        span = pts.max(axis=0) - pts.min(axis=0)
        scale = float(np.hypot(span[0], span[1]))
        if scale <= 0.0:
            raise DegenerateCurve("curve has zero extent")
        edges = np.roll(pts, -1, axis=0) - pts
        lengths = np.hypot(edges[:, 0], edges[:, 1])
        if lengths.min() <= 1e-14 * scale:
            raise DegenerateCurve("repeated or nearly repeated consecutive vertices")
        signed = 0.5 * float(np.sum(pts[:, 0] * np.roll(pts[:, 1], -1)
                                    - pts[:, 1] * np.roll(pts[:, 0], -1)))
        if abs(signed) <= 1e-14 * scale * scale:
            raise DegenerateCurve("enclosed signed area is zero")
        if signed < 0.0:
            pts = pts[::-1].copy()
            signed = -signed
        ring = shapely.LineString(np.vstack([pts, pts[:1]]))
        if not ring.is_simple:
            raise SelfIntersection("polygon edges cross")
        self.vertices = pts
        self.vertices.setflags(write=False)
        self._area = signed
        self._scale = scale

    # -- construction ------------------------------------------------------
    @classmethod
    def circle(cls, center=(0.0, 0.0), radius=1.0, n=512, phase=0.0):
        if radius <= 0:
            raise DegenerateCurve("radius must be positive")
        th = phase + np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        return cls(np.column_stack([center[0] + radius * np.cos(th),
                                    center[1] + radius * np.sin(th)]))

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if [c.strip() for c in header] != ["x", "y"]:
                raise ValueError("curve file must have header 'x,y'")
            pts = [(float(a), float(b)) for a, b in reader]
        return cls(np.asarray(pts, dtype=float))

    def to_csv(self, path):
        buf = io.StringIO()
        buf.write("x,y\n")
        for x, y in self.vertices:
            buf.write(f"{x:.17g},{y:.17g}\n")
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())

    # -- basic geometry ----------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def scale(self) -> float:
        return self._scale

    def edge_vectors(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    def edge_lengths(self) -> np.ndarray:
        e = self.edge_vectors()
        return np.hypot(e[:, 0], e[:, 1])

    @property
    def euclidean_area(self) -> float:
        return self._area

    @property
    def euclidean_length(self) -> float:
        return float(self.edge_lengths().sum())

    @property
    def centroid(self) -> np.ndarray:
        p = self.vertices
        q = np.roll(p, -1, axis=0)
        w = p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]
        return (p + q).T @ w / (6.0 * self._area)

    def contains_point(self, point) -> bool:
        poly = shapely.Polygon(self.vertices)
        return bool(poly.contains(shapely.Point(point)))


# ---------------------------------------------------------------------------
# metric functionals

def length_g(curve: ClosedCurve, metric: ConformalMetric) -> float:
    """Metric length: two-point Gauss sampling of sqrt(u) per edge."""
    p = curve.vertices
    e = curve.edge_vectors()
    x1 = p + _GL2 * e
    x2 = p + (1.0 - _GL2) * e
    w = 0.5 * (np.sqrt(metric.u(x1)) + np.sqrt(metric.u(x2)))
    return float(np.sum(w * curve.edge_lengths()))


def _fan_quadrature(curve: ClosedCurve, metric: ConformalMetric, integrand):
    """Signed centroid-fan integral of ``integrand(points)`` over the interior.

    Each edge spans a (possibly negatively oriented) triangle with the
    centroid; the map x = c + t*((1-s)(a-c) + s(b-c)) has Jacobian
    t * cross(a-c, b-c), independent of s.  Radial panels in t are split
    where |x| crosses one of the metric's breakpoint circles.
    """
    c = curve.centroid
    A = curve.vertices - c
    B = np.roll(curve.vertices, -1, axis=0) - c
    cross = A[:, 0] * B[:, 1] - A[:, 1] * B[:, 0]
    total = 0.0
    for s in (_GL2, 1.0 - _GL2):
        w = (1.0 - s) * A + s * B  # (n, 2) ray directions from c
        breaks = _panel_breaks(c, w, metric.quad_breakpoints)
        if breaks is None:
            # single panel, 10-point rule
            t = _T10
            # points: (n, 10, 2)
            pts = c[None, None, :] + t[None, :, None] * w[:, None, :]
            vals = integrand(pts.reshape(-1, 2)).reshape(len(w), len(t))
            total += 0.5 * float(cross @ (vals * (t * _W10)[None, :]).sum(axis=1))
        else:
            lo, hi = breaks  # (n, p) panel bounds, zero-width padding allowed
            mid = lo[:, :, None] + (hi - lo)[:, :, None] * _T10[None, None, :]
            pts = c[None, None, None, :] + mid[..., None] * w[:, None, None, :]
            vals = integrand(pts.reshape(-1, 2)).reshape(mid.shape)
            wgt = (hi - lo)[:, :, None] * _W10[None, None, :] * mid
            total += 0.5 * float(cross @ (vals * wgt).sum(axis=(1, 2)))
    if not math.isfinite(total):
        raise TriangulationFailure("interior quadrature produced a non-finite value")
    return total


def _panel_breaks(c, w, breakpoints):
    """Panel bounds in t where rays c + t*w cross breakpoint circles.

    Returns None when no split is needed, else (lo, hi) arrays of shape
    (n_rays, n_breaks + 1) with zero-width padding for absent crossings.
    """
    if not breakpoints:
        return None
    ww = np.einsum("ij,ij->i", w, w)
    cw = w @ c
    cc = float(c @ c)
    roots = []
    for rb in breakpoints:
        disc = cw**2 - ww * (cc - rb * rb)
        ok = disc > 0.0
        sq = np.sqrt(np.where(ok, disc, 0.0))
        for sgn in (-1.0, 1.0):
            t = np.where(ok, (-cw + sgn * sq) / ww, 2.0)
            roots.append(np.where((t > 0.0) & (t < 1.0), t, 2.0))
    if not roots:
        return None
    tcross = np.sort(np.stack(roots, axis=1), axis=1)
    tcross = np.minimum(tcross, 1.0)
    n = len(w)
    lo = np.concatenate([np.zeros((n, 1)), tcross], axis=1)
    hi = np.concatenate([tcross, np.ones((n, 1))], axis=1)
    hi = np.maximum(hi, lo)
    if np.all(tcross >= 1.0):
        return None
    return lo, hi


def integrate_over_interior(curve: ClosedCurve, metric: ConformalMetric,
                            integrand) -> float:
    return _fan_quadrature(curve, metric, integrand)


def area_in(curve: ClosedCurve, metric: ConformalMetric) -> float:
    """Metric area enclosed by the curve."""
    val = _fan_quadrature(curve, metric, metric.u)
    if not val > 0.0:
        raise TriangulationFailure(f"enclosed metric area evaluated to {val!r}")
    return val


def area_out(curve: ClosedCurve, metric: ConformalMetric) -> float:
    """Complement area; defined as total minus inside so the sum is exact."""
    out = metric.total_area - area_in(curve, metric)
    if not out > 0.0:
        raise DomainError("curve encloses the entire finite area")
    return out


@dataclass(frozen=True)
class CurveMetrics:
    """Length, split areas, ratio, and curvature diagnostics of one curve."""
    length_g: float
    area_in: float
    area_out: float
    ratio: float
    total_curvature: float
    curvature_energy: float
    gb_residual: float


def isoperimetric_ratio(curve: ClosedCurve, metric: ConformalMetric) -> CurveMetrics:
    """Full metric bundle: I = L*(1/A_in + 1/A_out) plus curvature integrals."""
    from .flow import geodesic_curvature, metric_arc_weights

    L = length_g(curve, metric)
    a_in = area_in(curve, metric)
    a_out = metric.total_area - a_in
    if not a_out > 0.0:
        raise DomainError("curve encloses the entire finite area")
    k = geodesic_curvature(curve, metric)
    ds = metric_arc_weights(curve, metric)
    k_int = float(np.sum(k * ds))
    k2_int = float(np.sum(k * k * ds))
    curv_area = _fan_quadrature(
        curve, metric, lambda pts: metric.gauss_curvature(pts) * metric.u(pts))
    gb = abs(k_int + curv_area - 2.0 * math.pi)
    return CurveMetrics(length_g=L, area_in=a_in, area_out=a_out,
                        ratio=L * (1.0 / a_in + 1.0 / a_out),
                        total_curvature=k_int, curvature_energy=k2_int,
                        gb_residual=gb)


def euclidean_isoperimetric_check(curve: ClosedCurve):
    """Returns (L_e, |interior|, L_e^2 - 4 pi |interior|); slack >= 0 up to
    discretization for simple curves."""
    L = curve.euclidean_length
    A = curve.euclidean_area
    return L, A, L * L - 4.0 * math.pi * A


def circle_comparison_inequality(A_total, A_in, A_out, shift):
    """Area-shift monotonicity: moving shift <= A_in - A_out from the larger
    part to the smaller cannot increase 1/A_in + 1/A_out.

    Returns (shifted_value, original_value, holds).
    """
    if min(A_total, A_in, A_out) <= 0.0:
        raise DomainError("areas must be positive")
    if abs(A_in + A_out - A_total) > 1e-9 * A_total:
        raise DomainError("areas must add up to the total")
    if shift < 0.0 or shift > A_in - A_out:
        raise DomainError("shift must lie in [0, A_in - A_out]")
    lhs = 1.0 / (A_in - shift) + 1.0 / (A_out + shift)
    rhs = 1.0 / A_in + 1.0 / A_out
    return lhs, rhs, lhs <= rhs * (1.0 + 1e-12)
