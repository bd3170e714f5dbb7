"""Curve container, lengths, areas, ratios, comparison inequalities."""

import math

import numpy as np
import pytest

import isoflow as iso
from conftest import make_square, make_star


def test_circle_factory_basics():
    c = iso.ClosedCurve.circle(radius=2.0, n=64)
    assert c.n == 64
    # exact inscribed-polygon values
    assert c.euclidean_length == pytest.approx(2 * 64 * 2.0 * math.sin(math.pi / 64), rel=1e-13)
    assert c.euclidean_area == pytest.approx(0.5 * 64 * 4.0 * math.sin(2 * math.pi / 64), rel=1e-13)
    assert np.allclose(c.centroid, 0.0, atol=1e-12)


def test_vertices_are_read_only():
    c = iso.ClosedCurve.circle(radius=1.0, n=16)
    with pytest.raises(ValueError):
        c.vertices[0, 0] = 5.0


def test_too_few_vertices_rejected():
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 1.0]])
    with pytest.raises(iso.DegenerateCurve):
        iso.ClosedCurve(tri)


def test_explicit_closure_is_stripped():
    th = np.linspace(0.0, 2.0 * np.pi, 17)  # first point repeated at the end
    pts = np.column_stack([np.cos(th), np.sin(th)])
    c = iso.ClosedCurve(pts)
    assert c.n == 16


def test_nonfinite_vertices_rejected():
    pts = np.column_stack([np.cos(np.linspace(0, 2 * np.pi, 16, endpoint=False)),
                           np.sin(np.linspace(0, 2 * np.pi, 16, endpoint=False))])
    pts[3, 0] = np.nan
    with pytest.raises(iso.DegenerateCurve):
        iso.ClosedCurve(pts)


def test_bowtie_rejected():
    t = np.linspace(0.0, 1.0, 4, endpoint=False)
    pts = np.vstack([
        np.column_stack([t, t]),                    # (0,0) -> (1,1)
        np.column_stack([1.0 - t, t]),              # (1,0) ... crossing
        np.column_stack([1.0 - t, 1.0 - t]),
        np.column_stack([t, 1.0 - t]),
    ])
    with pytest.raises(iso.SelfIntersection):
        iso.ClosedCurve(pts)


def test_clockwise_input_is_reversed():
    c_ccw = iso.ClosedCurve.circle(radius=1.0, n=32)
    c_cw = iso.ClosedCurve(c_ccw.vertices[::-1])
    assert c_cw.euclidean_area > 0
    assert c_ccw.euclidean_area == pytest.approx(c_cw.euclidean_area, rel=1e-15)


def test_square_euclidean_measures_exact():
    sq = make_square(side=1.0)
    assert sq.euclidean_area == 1.0
    assert sq.euclidean_length == 4.0


def test_csv_round_trip(tmp_path):
    c = make_star(3)
    path = tmp_path / "curve.csv"
    c.to_csv(path)
    c2 = iso.ClosedCurve.from_csv(path)
    assert np.array_equal(c.vertices, c2.vertices)


def test_contains_point():
    c = iso.ClosedCurve.circle(radius=1.0, n=128)
    assert c.contains_point((0.0, 0.0))
    assert c.contains_point((0.9, 0.0))
    assert not c.contains_point((1.1, 0.0))


def test_length_on_sphere_closed_form():
    # circle of euclidean radius rho has g-length 2 pi rho * 2/(1+rho^2)
    sph = iso.RoundSphere(1.0)
    for rho in (0.5, 1.0, 2.0):
        c = iso.ClosedCurve.circle(radius=rho, n=512)
        want = 4.0 * math.pi * rho / (1.0 + rho ** 2)
        assert iso.length_g(c, sph) == pytest.approx(want, rel=1e-4)


def test_areas_on_sphere_closed_form():
    sph = iso.RoundSphere(1.0)
    for rho in (0.5, 1.0, 3.0):
        c = iso.ClosedCurve.circle(radius=rho, n=512)
        want_in = 4.0 * math.pi * rho ** 2 / (1.0 + rho ** 2)
        a_in = iso.area_in(c, sph)
        a_out = iso.area_out(c, sph)
        assert a_in == pytest.approx(want_in, rel=1e-4)
        assert a_in + a_out == pytest.approx(sph.total_area, rel=1e-12)


def test_area_under_constant_density_scales(square):
    flat = iso.flat_table(4.0, plateau=50.0)
    sq = square(side=1.0)
    assert iso.area_in(sq, flat) == pytest.approx(4.0, rel=1e-9)
    assert iso.length_g(sq, flat) == pytest.approx(8.0, rel=1e-9)


def test_interior_quadrature_handles_table_breakpoints():
    # a curve crossing the plateau edge of a flat table: the interior
    # integral must split panels at the knot circle to converge
    flat = iso.flat_table(1.0, plateau=1.0)
    c = iso.ClosedCurve.circle(radius=1.5, n=1024)
    # oracle: area = pi * p^2 + int_p^1.5 2 pi r (p/r)^6 dr
    tail = 2.0 * math.pi * (1.0 / 4.0) * (1.0 - (1.0 / 1.5) ** 4)
    want = math.pi + tail
    assert iso.area_in(c, flat) == pytest.approx(want, rel=1e-4)


def test_ratio_circle_on_sphere_closed_form():
    sph = iso.RoundSphere(1.0)
    for rho in (0.5, 1.0, 2.0):
        c = iso.ClosedCurve.circle(radius=rho, n=512)
        m = iso.isoperimetric_ratio(c, sph)
        assert m.ratio == pytest.approx(rho + 1.0 / rho, rel=1e-4)
        assert m.length_g == pytest.approx(4.0 * math.pi * rho / (1.0 + rho ** 2), rel=1e-4)


def test_ratio_metrics_fields_consistent():
    sph = iso.RoundSphere(1.0)
    c = iso.ClosedCurve.circle(radius=1.0, n=256)
    m = iso.isoperimetric_ratio(c, sph)
    want = m.length_g * (1.0 / m.area_in + 1.0 / m.area_out)
    assert m.ratio == pytest.approx(want, rel=1e-12)
    assert m.curvature_energy >= 0.0
    assert abs(m.gb_residual) < 1e-3


def test_ratio_scaling_covariance(star):
    base = iso.RoundSphere(1.0)
    c = star(11)
    m0 = iso.isoperimetric_ratio(c, base)
    for factor in (0.5, 2.0, 9.0):
        m1 = iso.isoperimetric_ratio(c, iso.Scale(factor, base))
        assert m1.ratio == pytest.approx(m0.ratio / math.sqrt(factor), rel=1e-9)


def test_euclidean_isoperimetric_check_square(square):
    L, A, slack = iso.euclidean_isoperimetric_check(square(side=1.0))
    assert L == 4.0 and A == 1.0
    assert slack == pytest.approx(16.0 - 4.0 * math.pi, rel=1e-15)


def test_euclidean_isoperimetric_check_circle_tight():
    c = iso.ClosedCurve.circle(radius=1.0, n=4096)
    L, A, slack = iso.euclidean_isoperimetric_check(c)
    assert slack >= -1e-9  # the inequality can only fail by roundoff
    assert slack < 1e-4    # and the circle nearly saturates it


def test_circle_comparison_inequality_valid_cases():
    # moving part of the larger area to the smaller lowers 1/A_in + 1/A_out
    lhs, rhs, holds = iso.circle_comparison_inequality(12.0, 8.0, 4.0, 2.0)
    assert holds
    assert lhs <= rhs
    # oracle arithmetic
    assert lhs == pytest.approx(1.0 / 6.0 + 1.0 / 6.0, rel=1e-15)
    assert rhs == pytest.approx(1.0 / 8.0 + 1.0 / 4.0, rel=1e-15)
    # zero shift is a no-op
    lhs0, rhs0, holds0 = iso.circle_comparison_inequality(12.0, 8.0, 4.0, 0.0)
    assert holds0 and lhs0 == rhs0


def test_circle_comparison_inequality_rejects_bad_input():
    with pytest.raises(iso.DomainError):
        iso.circle_comparison_inequality(10.0, -1.0, 4.0, 1.0)
    with pytest.raises(iso.DomainError):
        iso.circle_comparison_inequality(10.0, 3.0, 4.0, 1.0)  # areas do not add up
    with pytest.raises(iso.DomainError):
        iso.circle_comparison_inequality(12.0, 8.0, 4.0, 5.0)  # shift too large


def test_integrate_over_interior_constant_is_area():
    sph = iso.RoundSphere(1.0)
    c = iso.ClosedCurve.circle(radius=0.8, n=256)
    val = iso.integrate_over_interior(c, sph, lambda pts: np.ones(len(pts)))
    assert val == pytest.approx(c.euclidean_area, rel=1e-8)


def test_degenerate_zero_area_rejected():
    # all points on a line segment back and forth
    t = np.linspace(0.0, 1.0, 8)
    pts = np.column_stack([np.concatenate([t, t[::-1]]), np.zeros(16)])
    with pytest.raises((iso.DegenerateCurve, iso.SelfIntersection)):
        iso.ClosedCurve(pts)
