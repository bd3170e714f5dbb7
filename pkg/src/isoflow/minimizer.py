"""Multi-start minimization of the isoperimetric ratio.

Starts are circles: centered at the origin and at detected density
maxima, radii geometric around the half-area radius.  Each start is
first flowed until its curvature energy falls under the cap, then
descended with per-step ratio-decrease acceptance until the
Euler-Lagrange residual |k_g - L(1/A_in - 1/A_out)| drops below
tolerance or the trajectory stalls or collapses.  The start family is a
search heuristic, not a guarantee: the reported best curve is the best
stationary candidate found, certified only by its residual.

A near-self-tangent winner is split at the pinch into two loops and the
loop with the smaller ratio is kept; the selection inequality
(``select_better_loop``) shows the better loop never does worse than
the pinched union.
"""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .curves import (ClosedCurve, CurveMetrics, area_in, isoperimetric_ratio,
                     length_g)
from .errors import (AllStartsFailed, AmbiguousPinch, DomainError,
                     IsoflowError)
from .flow import (FlowOptions, FlowState, FlowStatus, curvature_integrals,
                   energy_cap_reduce, flow_step, gauss_bonnet_residual,
                   geodesic_curvature, initial_state)
from .hypotheses import HypothesisReport, admissibility_threshold
from .metric import ConformalMetric, half_area_radius

log = logging.getLogger(__name__)

_MIN_PINCH_SEPARATION = 4  # vertices between the two sides of a pinch


def el_residual(curve: ClosedCurve, metric: ConformalMetric,
                metrics: Optional[CurveMetrics] = None) -> float:
    """Stationarity defect: max over vertices of |k_g - L(1/A_in - 1/A_out)|.

    A minimizing loop has constant geodesic curvature equal to
    L(1/A_in - 1/A_out), so this vanishes exactly at critical points.
    """
    if metrics is None:
        metrics = isoperimetric_ratio(curve, metric)
    k = geodesic_curvature(curve, metric)
    target = metrics.length_g * (1.0 / metrics.area_in - 1.0 / metrics.area_out)
    return float(np.max(np.abs(k - target)))


def select_better_loop(alpha1: float, alpha2: float,
                       A1: float, A2: float, A3: float):
    """Pick the better of two loops sharing a tangency point.

    For positive lengths alpha_i and areas (A1 inside loop 1, A3 inside
    loop 2, A2 outside the union),

        (a1+a2)(1/A2 + 1/(A1+A3)) >= min(a1(1/A1 + 1/(A2+A3)),
                                         a2(1/A3 + 1/(A1+A2)))

    i.e. the combined curve's ratio is never below the better loop's.
    Returns (chosen index 1 or 2, lhs, min candidate); ties pick 1.
    """
    vals = (alpha1, alpha2, A1, A2, A3)
    if any((not math.isfinite(v)) or v <= 0.0 for v in vals):
        raise DomainError("loop selection needs positive finite inputs")
    lhs = (alpha1 + alpha2) * (1.0 / A2 + 1.0 / (A1 + A3))
    v1 = alpha1 * (1.0 / A1 + 1.0 / (A2 + A3))
    v2 = alpha2 * (1.0 / A3 + 1.0 / (A1 + A2))
    best = min(v1, v2)
    assert lhs >= best * (1.0 - 1e-12), "selection inequality violated"
    return (1 if v1 <= v2 else 2), lhs, best


@dataclass(frozen=True)
class SplitResult:
    loop1: ClosedCurve
    loop2: ClosedCurve
    chosen: int  # 1 or 2
    metrics1: CurveMetrics
    metrics2: CurveMetrics

    @property
    def chosen_loop(self) -> ClosedCurve:
        return self.loop1 if self.chosen == 1 else self.loop2


def _pinch_pair(curve: ClosedCurve, tol: float):
    """Closest non-adjacent vertex pair within tol, or None.

    Raises AmbiguousPinch when close pairs cluster at more than one
    location on the curve.
    """
    pts = curve.vertices
    n = len(pts)
    pairs = cKDTree(pts).query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        return None
    sep = np.minimum((pairs[:, 1] - pairs[:, 0]) % n,
                     (pairs[:, 0] - pairs[:, 1]) % n)
    pairs = pairs[sep >= _MIN_PINCH_SEPARATION]
    if len(pairs) == 0:
        return None
    # near a tangency the two branches converge quadratically, so several
    # nearby vertex pairs land within tol; their midpoints string out with
    # up to two edge lengths between them (the adjacency cutoff above
    # punches holes in the chain).  Single-linkage with a radius covering
    # that spacing keeps one physical pinch in one cluster while genuinely
    # separate throats stay apart.
    mids = 0.5 * (pts[pairs[:, 0]] + pts[pairs[:, 1]])
    link = max(3.0 * tol, 3.0 * float(np.median(curve.edge_lengths())))
    edges = cKDTree(mids).query_pairs(link, output_type="ndarray")
    graph = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])),
                       shape=(len(mids), len(mids)))
    n_clusters, _ = connected_components(graph, directed=False)
    if n_clusters > 1:
        raise AmbiguousPinch(f"{n_clusters} separate near-tangencies found")
    d = np.hypot(*(pts[pairs[:, 0]] - pts[pairs[:, 1]]).T)
    i, j = pairs[int(np.argmin(d))]
    return int(min(i, j)), int(max(i, j))


def split_self_tangent(curve: ClosedCurve, metric: ConformalMetric,
                       tol: Optional[float] = None) -> Optional[SplitResult]:
    """Split a near-self-tangent curve at its pinch into two loops.

    Loop areas use the complement identities: the outside of one loop is
    the outside of the union plus the inside of the other loop.  Returns
    None when no pinch exists or a side is too short to stand alone.
    """
    if tol is None:
        tol = 1e-3 * curve.scale
    pair = _pinch_pair(curve, tol)
    if pair is None:
        return None
    i, j = pair
    pts = curve.vertices
    side1 = pts[i:j + 1]
    side2 = np.vstack([pts[j:], pts[:i + 1]])
    try:
        loop1 = ClosedCurve(side1)
        loop2 = ClosedCurve(side2)
    except IsoflowError:
        return None  # a spike, not a genuine double loop
    A_total = metric.total_area
    A1 = area_in(loop1, metric)
    A3 = area_in(loop2, metric)
    A2 = A_total - area_in(curve, metric)
    if min(A1, A2, A3) <= 0.0:
        return None
    alpha1 = length_g(loop1, metric)
    alpha2 = length_g(loop2, metric)
    chosen, _, _ = select_better_loop(alpha1, alpha2, A1, A2, A3)

    def loop_metrics(loop, L, a_in, a_out):
        k_int, k2_int = curvature_integrals(loop, metric)
        return CurveMetrics(length_g=L, area_in=a_in, area_out=a_out,
                            ratio=L * (1.0 / a_in + 1.0 / a_out),
                            total_curvature=k_int, curvature_energy=k2_int,
                            gb_residual=gauss_bonnet_residual(loop, metric))

    m1 = loop_metrics(loop1, alpha1, A1, A2 + A3)
    m2 = loop_metrics(loop2, alpha2, A3, A2 + A1)
    return SplitResult(loop1=loop1, loop2=loop2, chosen=chosen,
                       metrics1=m1, metrics2=m2)


# ---------------------------------------------------------------------------
# start family

@dataclass(frozen=True)
class StartSpec:
    """Circle family for the multi-start search.

    centers/radii of None mean auto: origin plus density maxima, radii
    geometric in [0.1, 10] times the half-area radius.  jitter > 0 adds
    seeded radial noise (fraction of the radius) to each start circle.
    """
    centers: Optional[Sequence] = None
    radii: Optional[Sequence[float]] = None
    n_vertices: int = 512
    phase: float = 0.0
    jitter: float = 0.0
    seed: int = 0


def density_maxima(metric: ConformalMetric, span: Optional[float] = None,
                   n_grid: int = 41, cap: int = 3) -> list[np.ndarray]:
    """Coarse-grid local maxima of the density, for start centers."""
    if metric.is_radial:
        return []
    if span is None:
        span = max(4.0 * half_area_radius(metric), 8.0)
    ax = np.linspace(-span, span, n_grid)
    X, Y = np.meshgrid(ax, ax)
    U = metric.u(np.column_stack([X.ravel(), Y.ravel()])).reshape(X.shape)
    interior = U[1:-1, 1:-1]
    is_max = np.ones_like(interior, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            is_max &= interior >= U[1 + di:n_grid - 1 + di, 1 + dj:n_grid - 1 + dj]
    is_max &= interior >= 0.05 * U.max()
    ii, jj = np.nonzero(is_max)
    order = np.argsort(interior[ii, jj])[::-1]
    found: list[np.ndarray] = []
    for k in order:
        p = np.array([X[1 + ii[k], 1 + jj[k]], Y[1 + ii[k], 1 + jj[k]]])
        if all(np.hypot(*(p - q)) > span / 10.0 for q in found):
            found.append(p)
        if len(found) >= cap:
            break
    return found


def _start_curves(metric: ConformalMetric, spec: StartSpec):
    if spec.centers is None:
        centers = [np.zeros(2)] + density_maxima(metric)
    else:
        centers = [np.asarray(c, dtype=float).reshape(2) for c in spec.centers]
    if spec.radii is None:
        r_half = half_area_radius(metric)
        radii = np.geomspace(0.1 * r_half, 10.0 * r_half, 9)
    else:
        radii = np.asarray(spec.radii, dtype=float)
    out = []
    idx = 0
    for c in centers:
        for r in radii:
            out.append((idx, c, float(r)))
            idx += 1
    return out


def _make_start_curve(center, radius, spec: StartSpec, idx: int) -> ClosedCurve:
    base = ClosedCurve.circle(center, radius, spec.n_vertices, spec.phase)
    if spec.jitter <= 0.0:
        return base
    rng = np.random.default_rng(spec.seed + idx)
    th = np.arctan2(base.vertices[:, 1] - center[1],
                    base.vertices[:, 0] - center[0])
    wobble = np.zeros(spec.n_vertices)
    for mode in range(2, 6):
        wobble += rng.standard_normal() * np.cos(mode * th + rng.uniform(0, 2 * np.pi))
    wobble *= spec.jitter / max(1.0, np.abs(wobble).max())
    pts = center + (1.0 + wobble)[:, None] * (base.vertices - center)
    try:
        return ClosedCurve(pts)
    except IsoflowError:
        return base


# ---------------------------------------------------------------------------
# search

@dataclass(frozen=True)
class MinimizeResult:
    best_curve: ClosedCurve
    best_ratio: float
    el_residual: float
    threshold_check: dict
    starts_log: list
    split_applied: bool
    notes: tuple = field(default_factory=tuple)

    def to_dict(self):
        return {
            "best_ratio": self.best_ratio,
            "el_residual": self.el_residual,
            "threshold_check": dict(self.threshold_check),
            "split_applied": self.split_applied,
            "notes": list(self.notes),
            "starts": [dict(s) for s in self.starts_log],
        }


def _descend(state: FlowState, metric: ConformalMetric,
             opts: FlowOptions) -> FlowState:
    """Ratio-monotone flow until the EL residual meets tolerance."""
    while state.status is FlowStatus.RUNNING and state.step_count < opts.max_steps:
        if el_residual(state.curve, metric, state.metrics) < opts.el_tolerance:
            return replace(state, status=FlowStatus.CRITERION_MET)
        state = flow_step(state, metric, opts, monotone_ratio=True)
    if state.status is FlowStatus.RUNNING:
        if el_residual(state.curve, metric, state.metrics) < opts.el_tolerance:
            return replace(state, status=FlowStatus.CRITERION_MET)
        return replace(state, status=FlowStatus.STALLED)
    return state


def _run_start(args):
    idx, center, radius, spec, metric, opts = args
    entry = {"index": idx, "center": [float(center[0]), float(center[1])],
             "radius": radius, "initial_ratio": None, "final_ratio": None,
             "status": None}
    try:
        curve = _make_start_curve(center, radius, spec, idx)
        entry["initial_ratio"] = isoperimetric_ratio(curve, metric).ratio
        reduced = energy_cap_reduce(curve, metric, opts)
        if reduced.status is FlowStatus.CRITERION_MET:
            final = _descend(replace(reduced, status=FlowStatus.RUNNING),
                             metric, opts)
        else:
            final = reduced
        entry["final_ratio"] = final.metrics.ratio
        entry["status"] = final.status.value
        return entry, final
    except IsoflowError as exc:
        entry["status"] = f"Failed:{exc.name}"
        log.info("start %d failed: %s", idx, exc)
        return entry, None


def minimize(metric: ConformalMetric, starts: Optional[StartSpec] = None,
             opts: Optional[FlowOptions] = None,
             report: Optional[HypothesisReport] = None,
             threads: int = 0) -> MinimizeResult:
    """Best isoperimetric loop over the start family.

    Every start contributes its final curve (even a stalled one is a
    valid comparison curve); AllStartsFailed is raised only when no
    start produced any usable state.  The winner is the smallest final
    ratio with ties broken by start index, so results are deterministic
    under concurrency.
    """
    spec = starts if starts is not None else StartSpec()
    opts = opts if opts is not None else FlowOptions()
    jobs = [(idx, c, r, spec, metric, opts)
            for idx, c, r in _start_curves(metric, spec)]
    if not jobs:
        raise AllStartsFailed("empty start family")
    workers = threads if threads > 0 else min(len(jobs), os.cpu_count() or 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_start, jobs))
    else:
        results = [_run_start(j) for j in jobs]

    starts_log = [entry for entry, _ in results]
    candidates = [(final.metrics.ratio, entry["index"], final)
                  for entry, final in results
                  if final is not None and math.isfinite(final.metrics.ratio)]
    if not candidates:
        raise AllStartsFailed("no start produced a usable curve")
    _, best_idx, best_state = min(candidates, key=lambda t: (t[0], t[1]))

    notes = []
    best_curve = best_state.curve
    split_applied = False
    try:
        split = split_self_tangent(best_curve, metric)
    except AmbiguousPinch as exc:
        split = None
        notes.append(f"pinch not split: {exc}")
    if split is not None:
        best_curve = split.chosen_loop
        split_applied = True

    best_metrics = isoperimetric_ratio(best_curve, metric)
    residual = el_residual(best_curve, metric, best_metrics)

    threshold = {"b0": None, "below": None}
    if report is not None:
        b0 = report.b0 if report.b0 is not None else admissibility_threshold(
            report.b1, report.b2, metric.total_area)
        threshold = {"b0": b0, "below": bool(best_metrics.ratio < b0)}

    return MinimizeResult(best_curve=best_curve, best_ratio=best_metrics.ratio,
                          el_residual=residual, threshold_check=threshold,
                          starts_log=starts_log, split_applied=split_applied,
                          notes=tuple(notes))
