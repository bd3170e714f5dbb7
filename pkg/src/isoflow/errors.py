"""Exception types shared across the toolkit.

Every error the library raises on bad input or failed numerics derives
from IsoflowError, so callers (and the CLI) can map failures to a stable
name without string matching.
"""


class IsoflowError(Exception):
    """Base class for toolkit errors."""

    @property
    def name(self) -> str:
        return type(self).__name__


class NonPositiveFactor(IsoflowError):
    """A conformal density evaluated to a non-positive or non-finite value."""


class DivergentArea(IsoflowError):
    """Total-area quadrature failed to converge within the extrapolation budget."""


class DivergentTail(IsoflowError):
    """An improper tail integral failed to converge or grows without bound."""


class NumericalDifferentiationFailure(IsoflowError):
    """Finite-difference curvature produced non-finite values."""


class QuadratureNotConverged(IsoflowError):
    """A panel quadrature did not settle within its refinement budget."""


class TriangulationFailure(IsoflowError):
    """Interior quadrature could not decompose a degenerate polygon."""


class DegenerateCurve(IsoflowError):
    """Polygon has too few vertices, repeated points, or vanishing area."""


class SelfIntersection(IsoflowError):
    """Polygon edges cross; the curve is not simple."""


class DomainError(IsoflowError):
    """Arguments lie outside an operation's stated domain."""


class ScanExhausted(IsoflowError):
    """Admissibility radius scan passed its upper bound without success."""


class AmbiguousPinch(IsoflowError):
    """More than one near-tangency cluster; the split point is not unique."""


class AllStartsFailed(IsoflowError):
    """Every minimizer start collapsed or errored before producing a curve."""


class StepUnstable(IsoflowError):
    """Diffusion step kept violating positivity after repeated dt halving."""


class ExtinctPastT(IsoflowError):
    """Requested time slice lies at or beyond the extinction estimate."""
