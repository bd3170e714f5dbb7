"""Gauss-Legendre panel quadrature and improper log-tail integrals.

Two building blocks used throughout the package:

* composite 16-point Gauss-Legendre panels with doubling refinement, for
  smooth integrands on finite intervals, and
* a tail integrator for integrands on [sigma0, inf) that decay at least
  algebraically in sigma.  The tail is summed over doubling octaves
  [S, 2S] (each integrated in log sigma) and the remainder beyond the
  last octave is extrapolated from the empirical geometric decay of the
  octave sums.  Slow algebraic tails such as 1/sigma^2 converge this way
  long before the integrand has to be evaluated at unrepresentable
  arguments.
"""
from __future__ import annotations

import logging
import math

import numpy as np

from .errors import DivergentTail, QuadratureNotConverged

log = logging.getLogger(__name__)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def gl_panels(f, a: float, b: float, n_panels: int) -> float:
    """Composite 16-point Gauss-Legendre quadrature of a vectorized f on [a, b]."""
    if b <= a:
        return 0.0
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return float(w @ np.asarray(f(x), dtype=float))


def adaptive_panels(f, a: float, b: float, rel_tol: float = 1e-10,
                    start: int = 16, max_refine: int = 9,
                    breakpoints=()) -> float:
    """Panel-doubling quadrature on [a, b]; refines until successive values agree.

    Interior breakpoints split the interval so piecewise-smooth integrands
    are integrated segment by segment.
    """
    pts = [a] + sorted(p for p in breakpoints if a < p < b) + [b]
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        frac = max((hi - lo) / (b - a), 1e-3)
        n = max(4, int(round(start * frac)))
        prev = gl_panels(f, lo, hi, n)
        cur = prev
        for _ in range(max_refine):
            n *= 2
            cur = gl_panels(f, lo, hi, n)
            if abs(cur - prev) <= rel_tol * max(abs(cur), 1e-300):
                break
            prev = cur
        else:
            raise QuadratureNotConverged(
                f"no convergence on [{lo:g}, {hi:g}] after {max_refine} refinements")
        total += cur
    return total


def log_tail_integral(h, sigma0: float, rel_tol: float = 1e-8,
                      max_doublings: int = 44, panels: int = 6,
                      loose_tol: float = 1e-3) -> float:
    """Integral of h(sigma) over [sigma0, inf) for non-negative decaying h.

    Raises DivergentTail when octave sums fail to decay, grow, or the
    estimates have not settled once h stops being evaluable.  If the
    integrand hits non-finite values (overflow in the caller's change of
    variables) the last extrapolated estimate is returned provided it had
    already stabilized to ``loose_tol``; otherwise DivergentTail.
    """
    S = max(float(sigma0), 1e-12)
    total = 0.0
    prev_octave = None
    prev_est = None
    flat_count = 0

    def octave(lo, hi):
        # integrate in tau = log(sigma): smooth for algebraic tails
        def g(tau):
            sig = np.exp(tau)
            return np.asarray(h(sig), dtype=float) * sig
        return gl_panels(g, math.log(lo), math.log(hi), panels)

    for _ in range(max_doublings):
        try:
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                T = octave(S, 2.0 * S)
        except (OverflowError, FloatingPointError):
            T = math.nan
        if not math.isfinite(T):
            if prev_est is not None and prev_octave is not None:
                settled = abs(prev_est - total) <= loose_tol * max(abs(prev_est), 1e-300)
                if settled:
                    log.warning("tail integral stopped at sigma=%g with loose tolerance", S)
                    return prev_est
            raise DivergentTail(
                f"integrand not evaluable past sigma={S:g} before the tail settled")
        scale = max(abs(total), abs(T), 1e-300)
        if prev_octave is not None and abs(prev_octave) > 0:
            ratio = T / prev_octave
            if ratio >= 0.98:
                flat_count += 1
                if flat_count >= 3:
                    raise DivergentTail(
                        f"octave sums do not decay (ratio {ratio:.4f} at sigma={S:g})")
            else:
                flat_count = 0
        total += T
        S *= 2.0
        if prev_octave is not None and abs(prev_octave) > 0 and 0.0 < T / prev_octave < 0.95:
            ratio = T / prev_octave
            est = total + T * ratio / (1.0 - ratio)
        else:
            est = total
        if prev_est is not None and abs(est - prev_est) <= rel_tol * max(abs(est), 1e-300):
            return est
        if abs(T) <= rel_tol * scale and prev_octave is not None and abs(prev_octave) <= rel_tol * scale:
            return est
        prev_octave = T
        prev_est = est
    raise DivergentTail(f"tail integral did not converge within {max_doublings} doublings")
