import math

import numpy as np
import pytest

import isoflow as iso
from isoflow import minimizer as mz
from isoflow.curves import area_in, isoperimetric_ratio
from isoflow.hypotheses import HypothesisReport
from isoflow.metric import Scale, Sum, Translate

from conftest import make_dumbbell, make_three_lobe

SPHERE = iso.RoundSphere(1.0)
FLAT10 = iso.flat_table(1.0, plateau=10.0)


# ---------------------------------------------------------------------------
# Euler-Lagrange residual

def test_el_residual_vanishes_on_equator():
    c = iso.ClosedCurve.circle(radius=1.0, n=512)
    assert mz.el_residual(c, SPHERE) < 1e-4


def test_el_residual_circle_closed_form():
    # on the sphere a circle of radius rho has k_g = (1 - rho^2)/(2 rho)
    # while L(1/A_in - 1/A_out) = (1 - rho^2)/rho, so the defect is
    # (1 - rho^2)/(2 rho) again.
    for rho in (0.4, 0.6, 1.5):
        c = iso.ClosedCurve.circle(radius=rho, n=512)
        want = abs(1.0 - rho * rho) / (2.0 * rho)
        assert mz.el_residual(c, SPHERE) == pytest.approx(want, rel=1e-3)


def test_el_residual_accepts_precomputed_metrics():
    c = iso.ClosedCurve.circle(radius=0.7, n=256)
    m = isoperimetric_ratio(c, SPHERE)
    assert mz.el_residual(c, SPHERE, m) == mz.el_residual(c, SPHERE)


# ---------------------------------------------------------------------------
# loop selection inequality

def test_select_better_loop_symmetric_tie_picks_first():
    chosen, lhs, best = mz.select_better_loop(1.0, 1.0, 1.0, 2.0, 1.0)
    assert chosen == 1
    assert best == pytest.approx(4.0 / 3.0, rel=1e-12)
    assert lhs == pytest.approx(2.0, rel=1e-12)


def test_select_better_loop_prefers_smaller_ratio():
    # loop 1 twice as long with the same areas: loop 2 wins
    chosen, lhs, best = mz.select_better_loop(2.0, 1.0, 1.0, 1.0, 1.0)
    assert chosen == 2
    assert best == pytest.approx(1.5, rel=1e-12)
    assert lhs == pytest.approx(4.5, rel=1e-12)


def test_select_better_loop_combined_never_beats_best():
    rng = np.random.default_rng(11)
    for _ in range(200):
        a1, a2, A1, A2, A3 = rng.uniform(0.05, 10.0, 5)
        _, lhs, best = mz.select_better_loop(a1, a2, A1, A2, A3)
        assert lhs >= best * (1.0 - 1e-12)


@pytest.mark.parametrize("bad", [
    (0.0, 1.0, 1.0, 1.0, 1.0),
    (1.0, -2.0, 1.0, 1.0, 1.0),
    (1.0, 1.0, math.nan, 1.0, 1.0),
    (1.0, 1.0, 1.0, math.inf, 1.0),
])
def test_select_better_loop_rejects_bad_inputs(bad):
    with pytest.raises(iso.DomainError):
        mz.select_better_loop(*bad)


# ---------------------------------------------------------------------------
# pinch splitting

def test_split_dumbbell_into_disks():
    curve = make_dumbbell(waist=1e-4)
    split = mz.split_self_tangent(curve, FLAT10)
    assert split is not None
    m1, m2 = split.metrics1, split.metrics2
    # the chord split preserves the enclosed area
    whole = area_in(curve, FLAT10)
    assert m1.area_in + m2.area_in == pytest.approx(whole, rel=1e-6)
    # each side is close to a unit disk
    assert m1.area_in == pytest.approx(math.pi, rel=1e-2)
    assert m2.area_in == pytest.approx(math.pi, rel=1e-2)
    # the chosen flag matches the smaller ratio, ties to loop 1
    if m1.ratio <= m2.ratio:
        assert split.chosen == 1
    else:
        assert split.chosen == 2
    assert split.chosen_loop is (split.loop1 if split.chosen == 1 else split.loop2)
    # the pinched union never beats the better loop
    whole_ratio = isoperimetric_ratio(curve, FLAT10).ratio
    assert min(m1.ratio, m2.ratio) <= whole_ratio * (1.0 + 1e-9)


def test_split_requires_actual_pinch():
    c = iso.ClosedCurve.circle(radius=1.0, n=128)
    assert mz.split_self_tangent(c, FLAT10) is None


def test_split_three_lobes_is_ambiguous():
    curve = make_three_lobe(waist=1e-4)
    with pytest.raises(iso.AmbiguousPinch):
        mz.split_self_tangent(curve, FLAT10)


def test_split_respects_explicit_tolerance():
    # the default tolerance sees the 2e-4 waist; an explicit tighter one
    # must not
    curve = make_dumbbell(waist=1e-4)
    assert mz.split_self_tangent(curve, FLAT10) is not None
    assert mz.split_self_tangent(curve, FLAT10, tol=1e-5) is None


# ---------------------------------------------------------------------------
# start placement

def test_density_maxima_empty_for_radial():
    assert mz.density_maxima(SPHERE) == []


def test_density_maxima_finds_translated_bump():
    found = mz.density_maxima(Translate([3.0, 2.0], SPHERE))
    assert len(found) == 1
    assert np.hypot(*(found[0] - [3.0, 2.0])) < 0.45


def test_density_maxima_finds_two_bumps():
    two = Sum([Translate([-3.0, 0.0], SPHERE), Translate([3.0, 0.0], SPHERE)])
    found = mz.density_maxima(two)
    assert len(found) == 2
    xs = sorted(p[0] for p in found)
    assert xs[0] == pytest.approx(-3.0, abs=0.45)
    assert xs[1] == pytest.approx(3.0, abs=0.45)
    assert all(abs(p[1]) < 0.45 for p in found)


def test_density_maxima_cap():
    two = Sum([Translate([-3.0, 0.0], SPHERE), Translate([3.0, 0.0], SPHERE)])
    assert len(mz.density_maxima(two, cap=1)) == 1


# ---------------------------------------------------------------------------
# the full search

def test_minimize_sphere_finds_equator():
    res = mz.minimize(SPHERE)
    assert res.best_ratio == pytest.approx(2.0, rel=1e-2)
    assert res.el_residual < 1e-2
    assert not res.split_applied
    assert res.threshold_check == {"b0": None, "below": None}
    statuses = [e["status"] for e in res.starts_log]
    assert "CriterionMet" in statuses
    assert len(res.starts_log) == 9  # origin center, nine radii
    for entry in res.starts_log:
        assert set(entry) == {"index", "center", "radius",
                              "initial_ratio", "final_ratio", "status"}


def test_minimize_scaling_covariance():
    # u -> c u multiplies every ratio by c^(-1/2) and leaves the
    # minimizing curve alone, so the search commutes with scaling
    base = mz.minimize(SPHERE)
    scaled = mz.minimize(Scale(4.0, SPHERE))
    assert scaled.best_ratio == pytest.approx(0.5 * base.best_ratio, rel=1e-12)
    assert np.allclose(scaled.best_curve.vertices, base.best_curve.vertices)


def test_minimize_reports_threshold_comparison():
    report = HypothesisReport(c0=2.0 * math.e ** math.pi, delta=2.33e-4,
                              b1=1.5278427322977278e-2, b2=math.log(2.0),
                              r0=1e4, b0=None, per_condition={},
                              grid=np.geomspace(1e4, 1e8, 9))
    res = mz.minimize(SPHERE, report=report)
    want_b0 = iso.admissibility_threshold(report.b1, report.b2,
                                          SPHERE.total_area)
    assert res.threshold_check["b0"] == pytest.approx(want_b0, rel=1e-12)
    assert res.threshold_check["below"] is False  # 2.0 is far above b0

    res2 = mz.minimize(SPHERE, report=HypothesisReport(
        c0=1.0, delta=1.0, b1=1.0, b2=1.0, r0=10.0, b0=5.0,
        per_condition={}, grid=np.array([10.0])))
    assert res2.threshold_check == {"b0": 5.0, "below": True}


def test_minimize_empty_start_family():
    with pytest.raises(iso.AllStartsFailed):
        mz.minimize(SPHERE, starts=mz.StartSpec(radii=[]))


def test_minimize_all_starts_unusable(monkeypatch):
    def doomed(args):
        idx = args[0]
        return {"index": idx, "center": [0.0, 0.0], "radius": 1.0,
                "initial_ratio": None, "final_ratio": None,
                "status": "Failed:DegenerateCurve"}, None

    monkeypatch.setattr(mz, "_run_start", doomed)
    with pytest.raises(iso.AllStartsFailed):
        mz.minimize(SPHERE, starts=mz.StartSpec(radii=[1.0]), threads=1)


def test_minimize_threaded_matches_serial():
    spec = mz.StartSpec(radii=[0.5, 1.0, 2.0], n_vertices=256)
    serial = mz.minimize(SPHERE, starts=spec, threads=1)
    pooled = mz.minimize(SPHERE, starts=spec, threads=2)
    assert pooled.best_ratio == serial.best_ratio
    assert [e["status"] for e in pooled.starts_log] == \
           [e["status"] for e in serial.starts_log]


def test_minimize_jitter_is_seeded():
    spec = mz.StartSpec(radii=[1.0], n_vertices=256, jitter=0.1, seed=3)
    a = mz.minimize(SPHERE, starts=spec)
    b = mz.minimize(SPHERE, starts=spec)
    assert a.best_ratio == b.best_ratio
    assert a.starts_log[0]["initial_ratio"] == b.starts_log[0]["initial_ratio"]
    # the wobbled circle really is worse than the equator to start with
    assert a.starts_log[0]["initial_ratio"] > 2.0


def test_minimize_result_to_dict_roundtrip():
    res = mz.minimize(SPHERE, starts=mz.StartSpec(radii=[1.0], n_vertices=256))
    d = res.to_dict()
    assert d["best_ratio"] == res.best_ratio
    assert d["split_applied"] is False
    assert isinstance(d["starts"], list) and len(d["starts"]) == 1
