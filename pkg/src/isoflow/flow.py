"""Curve shortening flow for polygons in a conformal metric.

Vertices move by dt * k_g along the inner normal measured in the metric,
where the geodesic curvature of a conformal density u is

    k_g = (k_e + d/dnu (log u)/2) / sqrt(u),

k_e the Euclidean three-point (circumscribed circle) curvature and nu
the outward Euclidean normal.  Steps are explicit Euler under a
parabolic bound dt <= dt_safety * (min spacing)^2 * min(1, min u); a
step producing a self-intersecting polygon is rejected and retried with
half the step, and the status turns Stalled after 40 rejections.
Resampling to uniform arc length happens only when edge lengths have
drifted apart by more than a fixed factor; resampling every step would
bleed length at a rate comparable to the k^2 contraction it is supposed
to reveal.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .curves import (ClosedCurve, CurveMetrics, integrate_over_interior,
                     isoperimetric_ratio)
from .errors import (DegenerateCurve, DomainError, SelfIntersection,
                     TriangulationFailure)
from .metric import ConformalMetric

log = logging.getLogger(__name__)

_MAX_REJECTIONS = 40
_MAX_MONOTONE_HALVINGS = 10
_RESAMPLE_SPREAD = 1.8
_COLLAPSE_FRACTION = 1e-3
_RATIO_SLACK = 1e-9


class FlowStatus(enum.Enum):
    RUNNING = "Running"
    CRITERION_MET = "CriterionMet"
    COLLAPSED = "Collapsed"
    STALLED = "Stalled"


@dataclass(frozen=True)
class FlowOptions:
    """Knobs for stepping and stopping.

    curvature_energy_cap is the threshold on int k^2 ds used by
    ``energy_cap_reduce``; el_tolerance is the stationarity target used
    by the minimizer.  resample_target, when set, is the desired edge
    length after resampling; when None the vertex count is preserved.
    """
    curvature_energy_cap: float = 10.0
    dt_safety: float = 0.4
    max_steps: int = 2000
    resample_target: Optional[float] = None
    el_tolerance: float = 1e-2

    def __post_init__(self):
        if not (0.0 < self.dt_safety <= 1.0):
            raise DomainError("dt_safety must lie in (0, 1]")
        if self.curvature_energy_cap <= 0 or self.el_tolerance <= 0:
            raise DomainError("caps and tolerances must be positive")
        if self.max_steps < 1:
            raise DomainError("max_steps must be at least 1")
        if self.resample_target is not None and self.resample_target <= 0:
            raise DomainError("resample_target must be positive")


@dataclass(frozen=True)
class FlowState:
    curve: ClosedCurve
    tau: float
    metrics: CurveMetrics
    status: FlowStatus
    step_count: int


def initial_state(curve: ClosedCurve, metric: ConformalMetric) -> FlowState:
    return FlowState(curve=curve, tau=0.0,
                     metrics=isoperimetric_ratio(curve, metric),
                     status=FlowStatus.RUNNING, step_count=0)


# ---------------------------------------------------------------------------
# curvature

def _edge_frames(curve: ClosedCurve):
    p = curve.vertices
    e_prev = p - np.roll(p, 1, axis=0)
    e_next = np.roll(p, -1, axis=0) - p
    chord = e_prev + e_next
    return p, e_prev, e_next, chord


def geodesic_curvature(curve: ClosedCurve, metric: ConformalMetric) -> np.ndarray:
    """Per-vertex geodesic curvature, positive where the curve bends
    toward the bounded component."""
    p, e_prev, e_next, chord = _edge_frames(curve)
    a = np.hypot(e_prev[:, 0], e_prev[:, 1])
    b = np.hypot(e_next[:, 0], e_next[:, 1])
    c = np.hypot(chord[:, 0], chord[:, 1])
    cross = e_prev[:, 0] * e_next[:, 1] - e_prev[:, 1] * e_next[:, 0]
    flat = np.abs(cross) <= 1e-14 * a * b
    if np.any(flat):
        log.debug("collinear vertex triples: %d (curvature set to 0)",
                  int(np.count_nonzero(flat)))
    k_e = np.where(flat, 0.0, 2.0 * cross / (a * b * c))
    n_out = np.column_stack([chord[:, 1], -chord[:, 0]]) / c[:, None]
    normal_term = 0.5 * np.einsum("ij,ij->i", metric.grad_log_u(p), n_out)
    return (k_e + normal_term) / np.sqrt(metric.u(p))


def metric_arc_weights(curve: ClosedCurve, metric: ConformalMetric) -> np.ndarray:
    """Per-vertex metric arc elements ds (half of each adjacent edge)."""
    _, e_prev, e_next, _ = _edge_frames(curve)
    a = np.hypot(e_prev[:, 0], e_prev[:, 1])
    b = np.hypot(e_next[:, 0], e_next[:, 1])
    return np.sqrt(metric.u(curve.vertices)) * 0.5 * (a + b)


def curvature_integrals(curve: ClosedCurve, metric: ConformalMetric):
    """(int k ds, int k^2 ds) with metric arc length."""
    k = geodesic_curvature(curve, metric)
    ds = metric_arc_weights(curve, metric)
    return float(np.sum(k * ds)), float(np.sum(k * k * ds))


def gauss_bonnet_residual(curve: ClosedCurve, metric: ConformalMetric) -> float:
    """|int k ds + int_interior K dV - 2 pi|; a discretization diagnostic."""
    k_int, _ = curvature_integrals(curve, metric)
    curv_area = integrate_over_interior(
        curve, metric, lambda pts: metric.gauss_curvature(pts) * metric.u(pts))
    return abs(k_int + curv_area - 2.0 * math.pi)


def log_ratio_derivative(state: FlowState, metric: ConformalMetric) -> float:
    """d/dtau log I along the flow, from the length/area evolution rates.

    dL/dtau = -int k^2 ds and dA_in/dtau = -int k ds (the outside gains
    what the inside loses); the metric is fixed so the total-area term
    vanishes.
    """
    if state.status is not FlowStatus.RUNNING:
        raise DomainError("log_ratio_derivative expects a Running state")
    m = state.metrics
    return (-m.curvature_energy / m.length_g
            + m.total_curvature * (1.0 / m.area_in - 1.0 / m.area_out))


# ---------------------------------------------------------------------------
# resampling

def resample_uniform(curve: ClosedCurve, n: Optional[int] = None) -> ClosedCurve:
    """Redistribute vertices to uniform arc length along a periodic cubic
    spline through the current vertices."""
    n = curve.n if n is None else max(int(n), 8)
    pts = np.vstack([curve.vertices, curve.vertices[:1]])
    seg = np.hypot(*np.diff(pts, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    spline = CubicSpline(s, pts, bc_type="periodic", axis=0)
    dense_t = np.linspace(0.0, s[-1], 16 * n + 1)
    dense = spline(dense_t)
    darc = np.hypot(*np.diff(dense, axis=0).T)
    arc = np.concatenate([[0.0], np.cumsum(darc)])
    targets = arc[-1] * np.arange(n) / n
    params = np.interp(targets, arc, dense_t)
    return ClosedCurve(spline(params))


def _spacing_spread(curve: ClosedCurve) -> float:
    lengths = curve.edge_lengths()
    return float(lengths.max() / lengths.min())


def _wants_resample(curve: ClosedCurve, opts: FlowOptions) -> bool:
    lengths = curve.edge_lengths()
    if opts.resample_target is not None:
        return (lengths.max() > _RESAMPLE_SPREAD * opts.resample_target
                or lengths.min() < opts.resample_target / _RESAMPLE_SPREAD)
    return float(lengths.max() / lengths.min()) > _RESAMPLE_SPREAD


def _resample_count(curve: ClosedCurve, opts: FlowOptions) -> Optional[int]:
    if opts.resample_target is None:
        return curve.n
    return max(int(round(curve.euclidean_length / opts.resample_target)), 8)


# ---------------------------------------------------------------------------
# stepping

def flow_step(state: FlowState, metric: ConformalMetric, opts: FlowOptions,
              *, monotone_ratio: bool = False) -> FlowState:
    """One accepted explicit step (or a terminal status).

    With monotone_ratio the step is additionally rejected when it raises
    the isoperimetric ratio by more than a relative 1e-9, enforcing the
    descent property directly.
    """
    if state.status is not FlowStatus.RUNNING:
        raise DomainError("flow_step expects a Running state")
    curve = state.curve
    p = curve.vertices
    u_vals = metric.u(p)
    k = geodesic_curvature(curve, metric)
    _, _, _, chord = _edge_frames(curve)
    c = np.hypot(chord[:, 0], chord[:, 1])
    n_in = np.column_stack([-chord[:, 1], chord[:, 0]]) / c[:, None]
    velocity = (k / np.sqrt(u_vals))[:, None] * n_in

    min_edge = float(curve.edge_lengths().min())
    dt = opts.dt_safety * min_edge**2 * min(1.0, float(u_vals.min()))
    dt_floor = dt * 2.0**-14

    total_area = metric.total_area
    monotone_halvings = 0
    for _ in range(_MAX_REJECTIONS + 1):
        if dt < dt_floor:
            return replace(state, status=FlowStatus.STALLED)
        try:
            stepped = ClosedCurve(p + dt * velocity)
            metrics = isoperimetric_ratio(stepped, metric)
        except SelfIntersection:
            dt *= 0.5
            continue
        except (DegenerateCurve, TriangulationFailure, DomainError):
            # the polygon (or one of its areas) has pinched out
            return replace(state, status=FlowStatus.COLLAPSED)
        if monotone_ratio and metrics.ratio > state.metrics.ratio * (1.0 + _RATIO_SLACK):
            # once halving for monotonicity alone has shrunk the step a
            # thousandfold the direction is uphill (or the curve is already
            # stationary to quadrature noise); accepting ever smaller
            # increments would let such a start burn its whole step budget
            # creeping instead of reporting Stalled
            monotone_halvings += 1
            if monotone_halvings > _MAX_MONOTONE_HALVINGS:
                return replace(state, status=FlowStatus.STALLED)
            dt *= 0.5
            continue
        break
    else:
        return replace(state, status=FlowStatus.STALLED)

    status = FlowStatus.RUNNING
    if (metrics.area_in < _COLLAPSE_FRACTION * total_area
            or metrics.area_out < _COLLAPSE_FRACTION * total_area):
        status = FlowStatus.COLLAPSED

    if status is FlowStatus.RUNNING and _wants_resample(stepped, opts):
        try:
            res = resample_uniform(stepped, _resample_count(stepped, opts))
            res_metrics = isoperimetric_ratio(res, metric)
        except (SelfIntersection, DegenerateCurve):
            res = None
        if res is not None and (not monotone_ratio or
                                res_metrics.ratio <= metrics.ratio * (1.0 + 1e-12)):
            stepped, metrics = res, res_metrics

    return FlowState(curve=stepped, tau=state.tau + dt, metrics=metrics,
                     status=status, step_count=state.step_count + 1)


def energy_cap_reduce(curve: ClosedCurve, metric: ConformalMetric,
                      opts: FlowOptions) -> FlowState:
    """Flow until the curvature energy int k^2 ds drops to the cap.

    The ratio I is non-increasing along the run by per-step rejection.
    Returns immediately (tau = 0) when the input already satisfies the
    cap.  Ends Stalled when max_steps is exhausted with the energy still
    above the cap, Collapsed when the curve degenerates first.
    """
    state = initial_state(curve, metric)
    if state.metrics.curvature_energy <= opts.curvature_energy_cap:
        return replace(state, status=FlowStatus.CRITERION_MET)
    while state.status is FlowStatus.RUNNING and state.step_count < opts.max_steps:
        state = flow_step(state, metric, opts, monotone_ratio=True)
        if (state.status is FlowStatus.RUNNING
                and state.metrics.curvature_energy <= opts.curvature_energy_cap):
            return replace(state, status=FlowStatus.CRITERION_MET)
    if state.status is FlowStatus.RUNNING:
        return replace(state, status=FlowStatus.STALLED)
    return state
