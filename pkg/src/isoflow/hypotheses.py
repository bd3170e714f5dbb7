"""Admissibility checks for radial envelope pairs.

A density u is admissible for the minimization theory when decreasing
radial envelopes lambda1 <= u <= lambda2 exist beyond some base radius
r0 and satisfy four integral inequalities (numbered 2-5 here, matching
the report keys):

  cond2:  int_r^{c0 r} sqrt(lambda1)      >= pi r sqrt(lambda2(r))
  cond3:  r sqrt(lambda1(c0 r))           >= b1 int_r^inf rho lambda2
  cond4:  int_r^{r^2} sqrt(lambda1)       >= b2
  cond5:  lambda1(c0 r)                   >= delta lambda2(r)

For the cusp envelope pair lambda_i = C_i/(rho log rho)^2 all four hold
with explicit constants computed by ``cusp_admissibility_constants``;
``check_conditions`` verifies any envelope pair on a radius grid and
reports the worst margin per condition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import DivergentTail, DomainError, ScanExhausted
from .metric import RadialEnvelope, envelope_tail_integral
from .quadrature import adaptive_panels

SCAN_BASE = 2.0
SCAN_RATIO = 1.05
_COND_KEYS = ("cond2", "cond3", "cond4", "cond5")


class AdmissibilityConstants(NamedTuple):
    c0: float
    delta: float
    b1: float
    b2: float
    r0: float


def cusp_admissibility_constants(C1: float, C2: float) -> AdmissibilityConstants:
    """Closed-form constants making the cusp envelope pair admissible.

    For lambda_i = C_i/(rho log rho)^2 the four conditions hold with

        c0 = 2 exp(pi sqrt(C2/C1)),   delta = C1/(2 c0^2 C2),
        b1 = sqrt(C1)/(sqrt(2) c0 C2),   b2 = sqrt(C1) log 2,

    and any base radius r0 at which both scan inequalities

        log r / log(c0 r) >= 1/sqrt(2)
        (log r) log(log(c0 r)/log r) > pi sqrt(C2/C1)

    are satisfied.  The scan walks r = 2, 2*1.05, ... and returns the
    first radius passing both, so r0 is minimal on that grid.
    """
    if not (C1 > 0 and C2 >= C1 and math.isfinite(C2)):
        raise DomainError("need 0 < C1 <= C2")
    ratio = math.sqrt(C2 / C1)
    c0 = 2.0 * math.exp(math.pi * ratio)
    delta = C1 / (2.0 * c0**2 * C2)
    b1 = math.sqrt(C1) / (math.sqrt(2.0) * c0 * C2)
    b2 = math.sqrt(C1) * math.log(2.0)
    target = math.pi * ratio
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    log_c0 = math.log(c0)
    r = SCAN_BASE
    while r < 1e300:
        lr = math.log(r)
        lcr = lr + log_c0
        if lr / lcr >= inv_sqrt2 and lr * math.log(lcr / lr) > target:
            return AdmissibilityConstants(c0, delta, b1, b2, r)
        r *= SCAN_RATIO
    raise ScanExhausted("no base radius satisfies both scan conditions below 1e300")


def admissibility_threshold(b1: float, b2: float, total_area: float) -> float:
    """The ratio threshold b0 = min(b1, 4 b2 / A) below which a minimizer
    is guaranteed to exist."""
    if min(b1, b2, total_area) <= 0.0:
        raise DomainError("b1, b2 and the total area must be positive")
    return min(b1, 4.0 * b2 / total_area)


@dataclass(frozen=True)
class ConditionResult:
    passed: bool
    worst_radius: float
    worst_margin: float
    reason: Optional[str] = None

    def to_dict(self):
        out = {"pass": self.passed, "worst_radius": self.worst_radius,
               "worst_margin": self.worst_margin}
        if self.reason is not None:
            out["reason"] = self.reason
        return out


@dataclass(frozen=True)
class HypothesisReport:
    c0: float
    delta: float
    b1: float
    b2: float
    r0: float
    b0: Optional[float]
    per_condition: dict
    grid: list = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.per_condition.values())

    def to_dict(self):
        return {
            "c0": self.c0, "delta": self.delta, "b1": self.b1, "b2": self.b2,
            "r0": self.r0, "b0": self.b0, "all_pass": self.all_pass,
            "per_condition": {k: v.to_dict() for k, v in self.per_condition.items()},
            "grid": list(self.grid),
            "scan": {"base": SCAN_BASE, "ratio": SCAN_RATIO},
        }


def default_grid(r0: float, span: float = 1e6, n: int = 49) -> np.ndarray:
    """Geometric radius grid from r0 to span*r0."""
    return np.geomspace(r0, span * r0, n)


def _sqrt_lambda1_integral(env: RadialEnvelope, a: float, b: float) -> float:
    """int_a^b sqrt(lambda1(rho)) drho via closed form or log-substitution."""
    F = env.sqrt_lambda1_antiderivative
    if F is not None:
        return F(b) - F(a)

    def g(sigma):
        rho = np.exp(np.asarray(sigma, dtype=float))
        return np.sqrt(np.asarray(env.lambda1(rho), dtype=float)) * rho

    return adaptive_panels(g, math.log(a), math.log(b), rel_tol=1e-10)


def check_conditions(env: RadialEnvelope, c0: float, b1: float, b2: float,
                     delta: float, grid, total_area: Optional[float] = None,
                     rel_slack: float = 1e-12) -> HypothesisReport:
    """Evaluate the four admissibility margins on a radius grid.

    Margins that are negative by less than ``rel_slack`` times the scale
    of the two compared terms are snapped to zero; this keeps conditions
    whose analytic margin is exactly zero (the cusp pair's cond4) from
    flickering on roundoff.  Raises DomainError for grids below the
    envelope base radius.  A DivergentTail from the lambda2 tail integral
    fails cond3 with the reason recorded instead of propagating.
    """
    grid = np.sort(np.asarray(grid, dtype=float))
    if grid.ndim != 1 or len(grid) == 0:
        raise DomainError("need a non-empty radius grid")
    if grid[0] < env.r0 * (1.0 - 1e-12):
        raise DomainError(f"grid starts below the envelope base radius {env.r0}")
    if not c0 > 1.0:
        raise DomainError("c0 must exceed 1")
    if min(b1, b2, delta) <= 0.0:
        raise DomainError("b1, b2, delta must be positive")

    def snapped(m, ref):
        return 0.0 if -rel_slack * ref <= m < 0.0 else m

    margins = {k: np.empty(len(grid)) for k in _COND_KEYS}
    tail_reason = None
    for i, r in enumerate(grid):
        lam2_r = float(env.lambda2(np.asarray([r]))[0])
        lam1_c0r = float(env.lambda1(np.asarray([c0 * r]))[0])

        ring = _sqrt_lambda1_integral(env, r, c0 * r)
        rhs2 = math.pi * r * math.sqrt(lam2_r)
        margins["cond2"][i] = snapped(ring - rhs2, abs(ring) + abs(rhs2))

        if tail_reason is None:
            try:
                tail = envelope_tail_integral(env, r)
                lhs3 = r * math.sqrt(lam1_c0r)
                margins["cond3"][i] = snapped(lhs3 - b1 * tail,
                                              abs(lhs3) + abs(b1 * tail))
            except DivergentTail as exc:
                tail_reason = str(exc)
        if tail_reason is not None:
            margins["cond3"][i] = -math.inf

        stretch = _sqrt_lambda1_integral(env, r, r * r)
        margins["cond4"][i] = snapped(stretch - b2, abs(stretch) + abs(b2))

        margins["cond5"][i] = snapped(lam1_c0r - delta * lam2_r,
                                      abs(lam1_c0r) + abs(delta * lam2_r))

    per_condition = {}
    for key in _COND_KEYS:
        m = margins[key]
        worst = int(np.argmin(m))
        reason = tail_reason if key == "cond3" and tail_reason else None
        per_condition[key] = ConditionResult(
            passed=bool(np.all(m >= 0.0)) and reason is None,
            worst_radius=float(grid[worst]),
            worst_margin=float(m[worst]),
            reason=reason,
        )

    b0 = None if total_area is None else admissibility_threshold(b1, b2, total_area)
    return HypothesisReport(c0=c0, delta=delta, b1=b1, b2=b2, r0=env.r0,
                            b0=b0, per_condition=per_condition,
                            grid=[float(g) for g in grid])
