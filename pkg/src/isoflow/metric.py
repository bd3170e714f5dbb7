"""Conformal plane metrics with finite total area.

A metric here is g = u(x) * delta_ij for a strictly positive density u
on R^2.  Lengths scale by sqrt(u), areas by u, and the Gauss curvature
is K = -laplacian(log u) / (2u).  Families:

* ``RoundSphere(scale)``   stereographic sphere density 4 R^4 / (R^2 + |x|^2)^2,
  constant curvature 1/R^2, total area 4 pi R^2;
* ``CuspProfile(C, r_cap)``  the slow density C / (|x| log|x|)^2 outside
  ``r_cap``, capped inside by a radial quadratic matched in value and
  slope (the density stays C^1, so curvature has no singular layer);
* ``RadialTable(r, u)``    log-log cubic interpolation of sampled radial
  data, constant inside the first knot and power-law beyond the last;
* ``Scale``, ``Sum``, ``Translate``  composites.

Total area is computed by composite Gauss-Legendre panels in
s = log(1 + r) with 64 angular samples for non-radial densities, plus a
closed-form or extrapolated tail; ``DivergentArea`` is raised when the
tail fails to settle within the extrapolation budget.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (DivergentArea, DivergentTail, NonPositiveFactor,
                     NumericalDifferentiationFailure)
from .quadrature import adaptive_panels, log_tail_integral

log = logging.getLogger(__name__)

_TAIL_SWITCH_RADIUS = 54.598150033144236  # e^4; panels inside, tail machinery outside
_N_ANGLES = 64


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must have shape (2,) or (n, 2)")
    return pts


@dataclass(frozen=True)
class RadialEnvelope:
    """Monotone radial bounds lambda1 <= u <= lambda2 valid for |x| >= r0.

    ``sqrt_lambda1_antiderivative`` is F with F' = sqrt(lambda1), used for
    ring-length integrals.  ``rho_lambda2_tail`` maps r to the full tail
    integral of rho * lambda2(rho) over [r, inf).  Both are optional; when
    absent the checks fall back to log-substitution quadrature.
    ``window`` records the radii range the envelope was fitted from, if any.
    """
    lambda1: Callable[[np.ndarray], np.ndarray]
    lambda2: Callable[[np.ndarray], np.ndarray]
    r0: float
    sqrt_lambda1_antiderivative: Optional[Callable[[float], float]] = None
    rho_lambda2_tail: Optional[Callable[[float], float]] = None
    window: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if not self.r0 > 1.0:
            raise ValueError("envelope base radius must exceed 1")


def _cusp_density(C: float, rho):
    rho = np.asarray(rho, dtype=float)
    return C / (rho * np.log(rho)) ** 2


def cusp_envelope(C1: float, C2: float, r0: float,
                  window: Optional[tuple[float, float]] = None) -> RadialEnvelope:
    """Envelope pair lambda_i = C_i / (rho log rho)^2 with closed-form integrals."""
    if C1 <= 0 or C2 <= 0 or C1 > C2:
        raise ValueError("need 0 < C1 <= C2")
    sqrt_c1 = math.sqrt(C1)
    return RadialEnvelope(
        lambda1=lambda rho: _cusp_density(C1, rho),
        lambda2=lambda rho: _cusp_density(C2, rho),
        r0=r0,
        sqrt_lambda1_antiderivative=lambda rho: sqrt_c1 * math.log(math.log(rho)),
        rho_lambda2_tail=lambda rho: C2 / math.log(rho),
        window=window,
    )


class ConformalMetric:
    """Base class: a positive conformal density and its derived quantities."""

    is_radial: bool = False
    #: radii of origin-centered circles where u is only C^1; interior
    #: quadrature splits its radial panels there.
    quad_breakpoints: tuple[float, ...] = ()
    envelope: Optional[RadialEnvelope] = None

    def __init__(self):
        self._total_area: Optional[float] = None

    # -- density ---------------------------------------------------------
    def u(self, points) -> np.ndarray:
        raise NotImplementedError

    def grad_log_u(self, points) -> np.ndarray:
        """Gradient of log u; central finite differences unless overridden."""
        pts = _as_points(points)
        h = 1e-6 * (1.0 + np.hypot(pts[:, 0], pts[:, 1]))[:, None]
        ex = np.column_stack([h[:, 0], np.zeros(len(pts))])
        ey = np.column_stack([np.zeros(len(pts)), h[:, 0]])
        with np.errstate(divide="ignore", invalid="ignore"):
            gx = (np.log(self.u(pts + ex)) - np.log(self.u(pts - ex))) / (2 * h[:, 0])
            gy = (np.log(self.u(pts + ey)) - np.log(self.u(pts - ey))) / (2 * h[:, 0])
        out = np.column_stack([gx, gy])
        if not np.all(np.isfinite(out)):
            raise NumericalDifferentiationFailure("grad log u is not finite")
        return out

    def gauss_curvature(self, points) -> np.ndarray:
        """K = -laplacian(log u)/(2u); five-point stencil unless overridden."""
        return finite_difference_gauss_curvature(self, points)

    # -- radial structure --------------------------------------------------
    def radial_log_density(self, sigma: np.ndarray) -> np.ndarray:
        """r^2 u(r) at r = exp(sigma), computed stably for large sigma.

        Only meaningful for radial densities; used by the tail quadrature.
        """
        raise NotImplementedError

    def tail_area(self, r: float) -> Optional[float]:
        """Closed-form area outside radius r, or None if unknown."""
        return None

    # -- area --------------------------------------------------------------
    @property
    def total_area(self) -> float:
        if self._total_area is None:
            self._total_area = _total_area_quadrature(self)
        return self._total_area


def finite_difference_gauss_curvature(metric: ConformalMetric, points,
                                      h_scale: float = 1e-3) -> np.ndarray:
    """Generic curvature via a five-point stencil on log u.

    Kept separate from the closed-form family implementations so the two
    routes can be compared against each other.
    """
    pts = _as_points(points)
    r = np.hypot(pts[:, 0], pts[:, 1])
    h = h_scale * (1.0 + r)
    u0 = metric.u(pts)
    with np.errstate(divide="ignore", invalid="ignore"):
        f0 = np.log(u0)
        lap = np.zeros(len(pts))
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            shift = np.column_stack([dx * h, dy * h])
            lap += np.log(metric.u(pts + shift))
        lap = (lap - 4.0 * f0) / h**2
        out = -lap / (2.0 * u0)
    if not np.all(np.isfinite(out)):
        raise NumericalDifferentiationFailure("curvature stencil hit non-finite log u")
    return out


class RoundSphere(ConformalMetric):
    """Stereographic sphere density; ``scale`` is the sphere radius."""

    is_radial = True

    def __init__(self, scale: float = 1.0):
        super().__init__()
        if not (scale > 0 and math.isfinite(scale)):
            raise NonPositiveFactor("sphere scale must be positive")
        self.scale = float(scale)

    def u(self, points):
        pts = _as_points(points)
        R2 = self.scale**2
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        return 4.0 * R2**2 / (R2 + r2) ** 2

    def grad_log_u(self, points):
        pts = _as_points(points)
        R2 = self.scale**2
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        return -4.0 * pts / (R2 + r2)[:, None]

    def gauss_curvature(self, points):
        pts = _as_points(points)
        return np.full(len(pts), 1.0 / self.scale**2)

    def radial_log_density(self, sigma):
        sigma = np.asarray(sigma, dtype=float)
        R2 = self.scale**2
        out = np.empty_like(sigma)
        big = sigma > 300.0
        out[big] = 4.0 * R2**2 * np.exp(-2.0 * sigma[big])
        r2 = np.exp(2.0 * sigma[~big])
        out[~big] = 4.0 * R2**2 * r2 / (R2 + r2) ** 2
        return out

    def tail_area(self, r):
        R2 = self.scale**2
        return 4.0 * math.pi * R2**2 / (R2 + r * r)


class CuspProfile(ConformalMetric):
    """Density C / (|x| log|x|)^2 outside r_cap, C^1-capped inside.

    The cap is the radial quadratic a + b |x|^2 matched in value and slope
    at r_cap, which keeps u positive and the curvature bounded.  Outside
    the cap the curvature is the constant -1/C.
    """

    is_radial = True

    def __init__(self, C: float = 1.0, r_cap: float = math.e):
        super().__init__()
        if not (C > 0 and math.isfinite(C)):
            raise NonPositiveFactor("cusp coefficient must be positive")
        if not r_cap > 1.05:
            raise ValueError("r_cap must exceed 1 so log r stays positive")
        self.C = float(C)
        self.r_cap = float(r_cap)
        L = math.log(r_cap)
        u_c = C / (r_cap * L) ** 2
        du_c = -2.0 * C / r_cap**3 * (1.0 / L**2 + 1.0 / L**3)
        self._b = du_c / (2.0 * r_cap)
        self._a = u_c - du_c * r_cap / 2.0
        # slope-matched quadratic with negative b: minimum on the cap is u_c > 0
        assert self._a > 0 and self._a + self._b * r_cap**2 > 0
        self.quad_breakpoints = (self.r_cap,)
        self.envelope = cusp_envelope(C, C, max(r_cap, math.e) * (1.0 + 1e-12))

    def u(self, points):
        pts = _as_points(points)
        r = np.hypot(pts[:, 0], pts[:, 1])
        out = np.empty_like(r)
        inside = r < self.r_cap
        out[inside] = self._a + self._b * r[inside] ** 2
        ro = r[~inside]
        out[~inside] = _cusp_density(self.C, ro)
        return out

    def grad_log_u(self, points):
        pts = _as_points(points)
        r = np.hypot(pts[:, 0], pts[:, 1])
        out = np.empty_like(pts)
        inside = r < self.r_cap
        out[inside] = 2.0 * self._b * pts[inside] / (
            self._a + self._b * r[inside, None] ** 2)
        ro = r[~inside]
        with np.errstate(divide="ignore", invalid="ignore"):
            dlog = -2.0 / ro - 2.0 / (ro * np.log(ro))
            out[~inside] = pts[~inside] * (dlog / ro)[:, None]
        return out

    def gauss_curvature(self, points):
        pts = _as_points(points)
        r = np.hypot(pts[:, 0], pts[:, 1])
        out = np.full_like(r, -1.0 / self.C)
        inside = r < self.r_cap
        denom = (self._a + self._b * r[inside] ** 2) ** 3
        out[inside] = -2.0 * self._a * self._b / denom
        return out

    def radial_log_density(self, sigma):
        sigma = np.asarray(sigma, dtype=float)
        out = np.empty_like(sigma)
        s_cap = math.log(self.r_cap)
        outside = sigma >= s_cap
        out[outside] = self.C / sigma[outside] ** 2
        r2 = np.exp(2.0 * sigma[~outside])
        out[~outside] = (self._a + self._b * r2) * r2
        return out

    def tail_area(self, r):
        if r >= self.r_cap:
            return 2.0 * math.pi * self.C / math.log(r)
        cap = 2.0 * math.pi * (self._a * (self.r_cap**2 - r * r) / 2.0 +
                               self._b * (self.r_cap**4 - r**4) / 4.0)
        return cap + 2.0 * math.pi * self.C / math.log(self.r_cap)


class RadialTable(ConformalMetric):
    """Radially symmetric density interpolated from (r, u) samples.

    log u is interpolated cubically in log r; the density is constant
    inside the first knot and follows the end slope (a power law) beyond
    the last.  A tail slope >= -2 makes the total area divergent, which
    surfaces as DivergentArea.
    """

    is_radial = True

    def __init__(self, r: Sequence[float], u: Sequence[float]):
        super().__init__()
        r = np.asarray(r, dtype=float)
        uu = np.asarray(u, dtype=float)
        if r.ndim != 1 or r.shape != uu.shape or len(r) < 4:
            raise ValueError("need matching 1-d arrays with at least 4 samples")
        if not (np.all(np.isfinite(r)) and np.all(r > 0) and np.all(np.diff(r) > 0)):
            raise ValueError("radii must be finite, positive, strictly increasing")
        if not (np.all(np.isfinite(uu)) and np.all(uu > 0)):
            raise NonPositiveFactor("table density values must be positive and finite")
        self.r_knots = r
        self.u_knots = uu
        # the clamped extensions meet the spline with a slope kink
        self.quad_breakpoints = (float(r[0]), float(r[-1]))
        self._sigma = np.log(r)
        self._phi = CubicSpline(self._sigma, np.log(uu), bc_type="natural")
        self._dphi = self._phi.derivative(1)
        self._d2phi = self._phi.derivative(2)
        self._slope_hi = float(self._dphi(self._sigma[-1]))
        self._phi_lo = float(np.log(uu[0]))
        self._phi_hi = float(np.log(uu[-1]))

    def _phi_eval(self, sigma):
        sigma = np.asarray(sigma, dtype=float)
        out = np.empty_like(sigma)
        lo = sigma <= self._sigma[0]
        hi = sigma >= self._sigma[-1]
        mid = ~(lo | hi)
        out[lo] = self._phi_lo
        out[hi] = self._phi_hi + self._slope_hi * (sigma[hi] - self._sigma[-1])
        out[mid] = self._phi(sigma[mid])
        return out

    def _dphi_eval(self, sigma):
        sigma = np.asarray(sigma, dtype=float)
        out = np.empty_like(sigma)
        lo = sigma <= self._sigma[0]
        hi = sigma >= self._sigma[-1]
        mid = ~(lo | hi)
        out[lo] = 0.0
        out[hi] = self._slope_hi
        out[mid] = self._dphi(sigma[mid])
        return out

    def u(self, points):
        pts = _as_points(points)
        r = np.hypot(pts[:, 0], pts[:, 1])
        sigma = np.log(np.maximum(r, self.r_knots[0]))
        return np.exp(self._phi_eval(sigma))

    def grad_log_u(self, points):
        pts = _as_points(points)
        r = np.hypot(pts[:, 0], pts[:, 1])
        out = np.zeros_like(pts)
        live = r > self.r_knots[0]
        sig = np.log(r[live])
        out[live] = pts[live] * (self._dphi_eval(sig) / r[live] ** 2)[:, None]
        return out

    def gauss_curvature(self, points):
        pts = _as_points(points)
        r = np.hypot(pts[:, 0], pts[:, 1])
        out = np.zeros_like(r)
        live = (r > self.r_knots[0]) & (r < self.r_knots[-1])
        sig = np.log(r[live])
        d2 = self._d2phi(sig)
        out[live] = -d2 / (2.0 * r[live] ** 2 * np.exp(self._phi_eval(sig)))
        return out

    def radial_log_density(self, sigma):
        sigma = np.asarray(sigma, dtype=float)
        return np.exp(2.0 * sigma + self._phi_eval(sigma))

    def tail_area(self, r):
        beta = self._slope_hi
        if beta >= -2.0 - 1e-9:
            return None  # divergent or borderline; let the generic path decide
        if r >= self.r_knots[-1]:
            sig = math.log(r)
            phi = self._phi_hi + beta * (sig - self._sigma[-1])
            # integral of 2 pi rho^(1+beta') from r with local power law
            return 2.0 * math.pi * math.exp(phi) * r * r / (-2.0 - beta)
        # spline region up to the last knot, then the power law above;
        # slopes barely under -2 defeat octave doubling (the sums shrink
        # too slowly to pass its decay check) so this path must not
        # fall back to the generic quadrature
        sig_last = float(self._sigma[-1])
        spline_part = adaptive_panels(
            lambda s: 2.0 * math.pi * np.exp(2.0 * s + self._phi_eval(s)),
            math.log(max(r, float(self.r_knots[0]))), sig_last,
            rel_tol=1e-10, start=24)
        closed = (2.0 * math.pi * math.exp(self._phi_hi + 2.0 * sig_last)
                  / (-2.0 - beta))
        if r >= self.r_knots[0]:
            return spline_part + closed
        # constant-density disk piece inside the first knot
        inner = math.pi * (self.r_knots[0] ** 2 - r * r) * self.u_knots[0]
        return inner + spline_part + closed


class Scale(ConformalMetric):
    """Pointwise scaling c * u of a base metric."""

    def __init__(self, factor: float, base: ConformalMetric):
        super().__init__()
        if not (factor > 0 and math.isfinite(factor)):
            raise NonPositiveFactor("scale factor must be positive")
        self.factor = float(factor)
        self.base = base
        self.is_radial = base.is_radial
        self.quad_breakpoints = base.quad_breakpoints
        self.envelope = None
        if base.envelope is not None:
            e = base.envelope
            c = self.factor
            self.envelope = RadialEnvelope(
                lambda1=lambda rho, f=e.lambda1: c * f(rho),
                lambda2=lambda rho, f=e.lambda2: c * f(rho),
                r0=e.r0,
                sqrt_lambda1_antiderivative=(
                    None if e.sqrt_lambda1_antiderivative is None
                    else lambda rho, f=e.sqrt_lambda1_antiderivative: math.sqrt(c) * f(rho)),
                rho_lambda2_tail=(
                    None if e.rho_lambda2_tail is None
                    else lambda rho, f=e.rho_lambda2_tail: c * f(rho)),
                window=e.window,
            )

    def u(self, points):
        return self.factor * self.base.u(points)

    def grad_log_u(self, points):
        return self.base.grad_log_u(points)

    def gauss_curvature(self, points):
        return self.base.gauss_curvature(points) / self.factor

    def radial_log_density(self, sigma):
        return self.factor * self.base.radial_log_density(sigma)

    def tail_area(self, r):
        t = self.base.tail_area(r)
        return None if t is None else self.factor * t


class Translate(ConformalMetric):
    """Base metric recentred at ``center``."""

    def __init__(self, center, base: ConformalMetric):
        super().__init__()
        self.base = base
        self.center = np.asarray(center, dtype=float).reshape(2)

    def _shift(self, points):
        return _as_points(points) - self.center[None, :]

    def u(self, points):
        return self.base.u(self._shift(points))

    def grad_log_u(self, points):
        return self.base.grad_log_u(self._shift(points))

    def gauss_curvature(self, points):
        return self.base.gauss_curvature(self._shift(points))

    @property
    def total_area(self):
        return self.base.total_area


class Sum(ConformalMetric):
    """Pointwise sum of member densities."""

    def __init__(self, members: Sequence[ConformalMetric]):
        super().__init__()
        if len(members) < 1:
            raise ValueError("need at least one member")
        self.members = tuple(members)
        self.is_radial = all(m.is_radial for m in self.members)
        if self.is_radial:
            bps = sorted({b for m in self.members for b in m.quad_breakpoints})
            self.quad_breakpoints = tuple(bps)

    def u(self, points):
        pts = _as_points(points)
        return sum(m.u(pts) for m in self.members)

    def grad_log_u(self, points):
        pts = _as_points(points)
        total = np.zeros(len(pts))
        acc = np.zeros_like(pts)
        for m in self.members:
            um = m.u(pts)
            acc += um[:, None] * m.grad_log_u(pts)
            total += um
        return acc / total[:, None]

    def radial_log_density(self, sigma):
        if not self.is_radial:
            raise NotImplementedError
        return sum(m.radial_log_density(sigma) for m in self.members)

    def tail_area(self, r):
        if not self.is_radial:
            return None
        parts = [m.tail_area(r) for m in self.members]
        if any(p is None for p in parts):
            return None
        return float(sum(parts))


# ---------------------------------------------------------------------------
# operations

def eval_u(metric: ConformalMetric, point) -> float:
    """Density at one point; errors if the metric produced a bad value."""
    val = float(metric.u(point)[0])
    if not (val > 0 and math.isfinite(val)):
        raise NonPositiveFactor(f"density evaluated to {val!r}")
    return val


def gauss_curvature(metric: ConformalMetric, point) -> float:
    return float(metric.gauss_curvature(point)[0])


def total_area(metric: ConformalMetric) -> float:
    return metric.total_area


def _ring_integrand(metric: ConformalMetric):
    """Area integrand in s = log(1+r): 2 pi r <u>(r) e^s."""
    if metric.is_radial:
        def ring(s):
            r = np.expm1(s)
            pts = np.column_stack([r, np.zeros_like(r)])
            return 2.0 * math.pi * r * metric.u(pts) * np.exp(s)
        return ring
    theta = np.linspace(0.0, 2.0 * math.pi, _N_ANGLES, endpoint=False)
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])

    def ring(s):
        r = np.expm1(s)
        pts = (r[:, None, None] * dirs[None, :, :]).reshape(-1, 2)
        mean_u = metric.u(pts).reshape(len(r), _N_ANGLES).mean(axis=1)
        return 2.0 * math.pi * r * mean_u * np.exp(s)
    return ring


def _tail_density(metric: ConformalMetric):
    """sigma -> angular mean of r^2 u at r = exp(sigma)."""
    if metric.is_radial:
        return metric.radial_log_density
    theta = np.linspace(0.0, 2.0 * math.pi, _N_ANGLES, endpoint=False)
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])

    def h(sigma):
        sigma = np.asarray(sigma, dtype=float)
        if np.any(sigma > 690.0):
            raise DivergentTail("non-radial density not evaluable at this radius")
        r = np.exp(sigma)
        pts = (r[:, None, None] * dirs[None, :, :]).reshape(-1, 2)
        vals = metric.u(pts).reshape(len(sigma), _N_ANGLES).mean(axis=1)
        return r * r * vals
    return h


def _total_area_quadrature(metric: ConformalMetric, rel_tol: float = 1e-8) -> float:
    r_sw = _TAIL_SWITCH_RADIUS
    s_sw = math.log1p(r_sw)
    breaks = [math.log1p(b) for b in metric.quad_breakpoints if b < r_sw]
    inner = adaptive_panels(_ring_integrand(metric), 0.0, s_sw,
                            rel_tol=1e-11, start=24, breakpoints=breaks)
    tail = metric.tail_area(r_sw)
    if tail is None:
        try:
            tail = 2.0 * math.pi * log_tail_integral(
                _tail_density(metric), math.log(r_sw), rel_tol=rel_tol)
        except DivergentTail as exc:
            raise DivergentArea(str(exc)) from exc
    area = inner + tail
    if not (math.isfinite(area) and area > 0):
        raise DivergentArea(f"total area evaluated to {area!r}")
    return area


def ball_area(metric: ConformalMetric, r: float) -> float:
    """Metric area of the euclidean disk |x| < r."""
    if r <= 0:
        return 0.0
    breaks = [math.log1p(b) for b in metric.quad_breakpoints if b < r]
    return adaptive_panels(_ring_integrand(metric), 0.0, math.log1p(r),
                           rel_tol=1e-10, start=24, breakpoints=breaks)


def half_area_radius(metric: ConformalMetric) -> float:
    """Radius of the origin-centered disk holding half the total area."""
    from scipy.optimize import brentq

    half = 0.5 * metric.total_area
    hi = 1.0
    for _ in range(80):
        if ball_area(metric, hi) > half:
            break
        hi *= 2.0
    else:
        raise DivergentArea("half-area disk not found below huge radii")
    return float(brentq(lambda r: ball_area(metric, r) - half, 1e-9 * hi, hi,
                        rtol=1e-10))


def envelope_tail_integral(envelope: RadialEnvelope, r: float) -> float:
    """Tail integral of rho * lambda2(rho) over [r, inf).

    Uses the closed form when the envelope carries one, otherwise the
    log-substitution tail machinery.  Raises DivergentTail when the tail
    does not converge.
    """
    if r <= 1.0:
        raise ValueError("tail integral needs r > 1")
    if envelope.rho_lambda2_tail is not None:
        val = float(envelope.rho_lambda2_tail(r))
        if not (math.isfinite(val) and val >= 0):
            raise DivergentTail(f"closed-form tail evaluated to {val!r}")
        return val

    def h(sigma):
        rho = np.exp(np.asarray(sigma, dtype=float))
        return rho * rho * np.asarray(envelope.lambda2(rho), dtype=float)

    return log_tail_integral(h, math.log(r), rel_tol=1e-6)


# ---------------------------------------------------------------------------
# serialization

def build_metric(spec: dict) -> ConformalMetric:
    """Construct a metric from the JSON form {"family": ..., "params": {...}}."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise ValueError("metric spec must be a dict with a 'family' key")
    family = spec["family"]
    params = spec.get("params", {})
    if family in ("round_sphere", "sphere"):
        return RoundSphere(scale=params.get("scale", 1.0))
    if family == "cusp":
        return CuspProfile(C=params.get("c", params.get("C", 1.0)),
                           r_cap=params.get("r_cap", math.e))
    if family == "table":
        if "path" in params:
            r, u = read_table_csv(params["path"])
        else:
            r, u = params["r"], params["u"]
        return RadialTable(r, u)
    if family == "scale":
        return Scale(params["factor"], build_metric(params["metric"]))
    if family == "translate":
        return Translate(params["center"], build_metric(params["metric"]))
    if family == "sum":
        return Sum([build_metric(m) for m in params["metrics"]])
    raise ValueError(f"unknown metric family {family!r}")


def read_table_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column radial table with header ``r,u``."""
    with open(path, newline="") as fh:
        return _read_table(fh)


def _read_table(fh) -> tuple[np.ndarray, np.ndarray]:
    reader = csv.reader(fh)
    header = next(reader)
    if [c.strip() for c in header] != ["r", "u"]:
        raise ValueError("radial table must have header 'r,u'")
    rows = [(float(a), float(b)) for a, b in reader]
    arr = np.asarray(rows, dtype=float)
    return arr[:, 0], arr[:, 1]


def write_table_csv(path, r, u) -> None:
    buf = io.StringIO()
    buf.write("r,u\n")
    for ri, ui in zip(r, u):
        buf.write(f"{ri:.17g},{ui:.17g}\n")
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def flat_table(value: float = 1.0, plateau: float = 50.0) -> RadialTable:
    """Finite-area stand-in for a constant density.

    Exactly ``value`` out to ``plateau`` (the table clamps below its first
    knot, so no interpolation happens there), then a power-law falloff
    keeping the total area finite.  Useful wherever flat-space behaviour
    is wanted near the origin.  The log-log spline through power-law
    samples is exactly linear, so the falloff is a clean r^-6 too.
    """
    r = np.geomspace(plateau, plateau * 1e4, 24)
    u = value * (plateau / r) ** 6
    return RadialTable(r, u)
