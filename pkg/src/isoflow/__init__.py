"""Isoperimetric ratio toolkit for finite-area conformal plane metrics.

The package measures and minimizes I(curve) = L * (1/A_in + 1/A_out)
for closed simple curves under densities u(x) dx^2 with finite total
area, checks the radial-envelope conditions that guarantee a minimizer
exists, and evolves radial densities by the logarithmic diffusion that
underlies two-dimensional Ricci flow.
"""
from .curves import (ClosedCurve, CurveMetrics, area_in, area_out,
                     circle_comparison_inequality,
                     euclidean_isoperimetric_check, integrate_over_interior,
                     isoperimetric_ratio, length_g)
from .errors import (AllStartsFailed, AmbiguousPinch, DegenerateCurve,
                     DivergentArea, DivergentTail, DomainError,
                     ExtinctPastT, IsoflowError, NonPositiveFactor,
                     NumericalDifferentiationFailure,
                     QuadratureNotConverged, ScanExhausted,
                     SelfIntersection, StepUnstable,
                     TriangulationFailure)
from .flow import (FlowOptions, FlowState, FlowStatus, energy_cap_reduce,
                   flow_step, gauss_bonnet_residual, geodesic_curvature,
                   initial_state, log_ratio_derivative, resample_uniform)
from .hypotheses import (AdmissibilityConstants, HypothesisReport,
                         admissibility_threshold, check_conditions,
                         cusp_admissibility_constants, default_grid)
from .metric import (ConformalMetric, CuspProfile, RadialEnvelope,
                     RadialTable, RoundSphere, Scale, Sum, Translate,
                     ball_area, build_metric, cusp_envelope,
                     envelope_tail_integral, flat_table, half_area_radius,
                     total_area)
from .minimizer import (MinimizeResult, StartSpec, el_residual, minimize,
                        select_better_loop, split_self_tangent)
from .ricci import (RicciSolution, cusp_seeded_sphere, slice_metric,
                    solve_radial, track_ratio)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityConstants", "AllStartsFailed", "AmbiguousPinch",
    "ClosedCurve", "ConformalMetric",
    "CurveMetrics", "CuspProfile", "DegenerateCurve", "DivergentArea",
    "DivergentTail", "DomainError", "ExtinctPastT", "FlowOptions",
    "FlowState", "FlowStatus",
    "HypothesisReport", "IsoflowError", "MinimizeResult",
    "NonPositiveFactor", "NumericalDifferentiationFailure",
    "QuadratureNotConverged", "RadialEnvelope",
    "RadialTable", "RicciSolution", "RoundSphere", "Scale",
    "ScanExhausted", "SelfIntersection", "StartSpec", "StepUnstable",
    "TriangulationFailure",
    "Sum", "Translate", "admissibility_threshold", "area_in", "area_out",
    "ball_area", "build_metric", "check_conditions",
    "circle_comparison_inequality", "cusp_admissibility_constants",
    "cusp_envelope", "cusp_seeded_sphere", "default_grid", "el_residual",
    "energy_cap_reduce", "envelope_tail_integral",
    "euclidean_isoperimetric_check", "flat_table", "flow_step",
    "gauss_bonnet_residual", "geodesic_curvature", "half_area_radius",
    "initial_state", "integrate_over_interior", "isoperimetric_ratio",
    "length_g", "log_ratio_derivative", "minimize", "resample_uniform",
    "select_better_loop", "slice_metric", "solve_radial",
    "split_self_tangent", "total_area", "track_ratio",
]
