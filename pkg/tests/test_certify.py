"""Field check, distance-witness check, tangent-ball oracle, combined verdict."""
from __future__ import annotations

import numpy as np
import numpy.testing as npt
import pytest

import regulus as rg


# ---------------------------------------------------------------------------
# condition 1: scaled normal field against the unit slope threshold
# ---------------------------------------------------------------------------


def test_condition1_circle_at_curvature_radius_is_marginal(circle2000):
    b, _ = circle2000
    rep = rg.check_condition1(b)  # fixture radius equals the circle radius
    npt.assert_allclose(rep.slope_max, 1.0, rtol=1e-12)
    npt.assert_allclose(rep.lip_estimate, 1.0, rtol=1e-12)
    assert rep.verdict  # within the discretization allowance
    assert rep.margin_class == "marginal"  # but cannot clear 1 with headroom
    assert rep.normality_defect <= rep.eps_geo


def test_condition1_passes_below_curvature_radius(circle2000):
    b, _ = circle2000
    rep = rg.check_condition1(b.rescaled(0.9))
    npt.assert_allclose(rep.lip_estimate, 0.9, rtol=1e-11)
    assert rep.margin_class == "pass"
    assert rep.verdict


def test_condition1_fails_above_curvature_radius(circle2000):
    b, _ = circle2000
    rep = rg.check_condition1(b.rescaled(1.05))
    npt.assert_allclose(rep.lip_estimate, 1.05, rtol=1e-11)
    assert rep.margin_class == "fail"
    assert not rep.verdict


def test_condition1_worst_pair_on_dumbbell_is_at_the_fillet(dumbbell4000):
    b, _ = dumbbell4000
    rep = rg.check_condition1(b.rescaled(0.1))
    npt.assert_allclose(rep.slope_max, 2.0, rtol=1e-6)  # fillet curvature 1/0.5
    assert rep.margin_class == "pass"  # 0.1 * 2.0 clears 1 easily
    i, j = rep.worst_pair
    for k in (i, j):
        assert abs(np.linalg.norm(b.points[k], ord=None)) > 0  # valid indices
    assert rep.excluded_pairs > 0  # cross-neck pairs left out


# ---------------------------------------------------------------------------
# condition 2: near in space, far along the boundary
# ---------------------------------------------------------------------------


def test_condition2_clean_on_circle(circle2000):
    b, _ = circle2000
    rep = rg.check_condition2(b.rescaled(0.99))
    assert rep.verdict
    assert rep.witnesses == []


def test_condition2_witnesses_dumbbell_neck(dumbbell4000):
    b, _ = dumbbell4000
    rep = rg.check_condition2(b.rescaled(0.5))
    assert not rep.verdict
    assert rep.witnesses
    w = rep.witnesses[0]
    assert w.confirmed
    npt.assert_allclose(w.euclidean, 0.2, atol=1e-3)
    assert w.ratio > np.pi / 2.0
    # the witness pair straddles the neck
    assert b.points[w.i, 1] * b.points[w.j, 1] < 0


def test_condition2_neck_is_invisible_below_half_gap(dumbbell4000):
    b, _ = dumbbell4000
    rep = rg.check_condition2(b.rescaled(0.09))
    assert rep.verdict  # 2r = 0.18 < neck gap 0.2: no pair qualifies


# ---------------------------------------------------------------------------
# tangent-ball oracle
# ---------------------------------------------------------------------------


def test_oracle_circle_critical_radius_is_exact(circle2000):
    b, _ = circle2000
    rep = rg.ball_oracle(b)
    # adjacent pairs lose ~half the mantissa to cancellation in |x - y|^2
    npt.assert_allclose(rep.rho_min, 1.0, rtol=1e-9)
    assert rep.verdict  # tangency is not a violation
    assert rep.checked_pairs == b.n_points * (b.n_points - 1) // 2


def test_oracle_rejects_radius_above_curvature(circle2000):
    b, _ = circle2000
    rep = rg.ball_oracle(b.rescaled(1.1))
    assert not rep.verdict
    assert rep.violations
    assert rep.violations[0].depth > 0


def test_oracle_ellipse_minimum_at_the_tips(ellipse4000):
    b, _ = ellipse4000
    rep = rg.ball_oracle(b.rescaled(0.45))
    assert rep.verdict
    npt.assert_allclose(rep.rho_min, 0.5, atol=1e-4)  # b^2/a at the tips
    i, j = rep.rho_argmin
    assert abs(abs(b.points[i, 0]) - 2.0) < 0.05  # argmin hugs a tip


def test_oracle_violations_localize_at_the_tips(ellipse4000):
    b, _ = ellipse4000
    rep = rg.ball_oracle(b.rescaled(0.6))
    assert not rep.verdict
    for v in rep.violations:
        assert abs(b.points[v.i, 0]) > 1.8
        assert v.pair_radius < 0.6


# ---------------------------------------------------------------------------
# combined verdict
# ---------------------------------------------------------------------------


def test_certify_trichotomy_on_circle(circle2000):
    b, _ = circle2000
    assert rg.certify(b, 0.99).overall == "certified"
    assert rg.certify(b, 1.0).overall == "inconclusive"
    assert rg.certify(b, 1.05).overall == "refuted"


def test_certify_report_shape(circle2000):
    b, _ = circle2000
    rep = rg.certify(b, 0.99)
    assert rep.r_tested == 0.99
    assert rep.certified and not rep.refuted
    assert rep.witnesses == []
    bad = rg.certify(b, 1.05)
    assert bad.refuted and not bad.certified
    assert bad.witnesses  # refuted implies at least one recorded witness
    kinds = {w["kind"] for w in bad.witnesses}
    assert kinds <= {"field_slope", "distance_pair", "ball_violation"}


def test_certify_dumbbell_refuted_by_distance_not_field(dumbbell4000):
    b, _ = dumbbell4000
    rep = rg.certify(b, 0.5)
    assert rep.refuted
    assert rep.cond1.verdict  # the field alone is fine at 0.5 (slope 2, lip 1.0)?
    assert not rep.cond2.verdict
    assert any(w["kind"] == "distance_pair" for w in rep.witnesses)


def test_certify_dumbbell_certified_below_reach(dumbbell4000):
    b, _ = dumbbell4000
    rep = rg.certify(b, 0.09)
    assert rep.certified


def test_certified_is_monotone_downward(ellipse4000):
    b, _ = ellipse4000
    assert rg.certify(b, 0.49).certified
    for r in (0.35, 0.2, 0.08):
        assert rg.certify(b, r).certified


def test_refuted_is_monotone_upward(ellipse4000):
    b, _ = ellipse4000
    assert rg.certify(b, 0.55).refuted
    for r in (0.8, 1.3):
        assert rg.certify(b, r).refuted


# ---------------------------------------------------------------------------
# radius estimation
# ---------------------------------------------------------------------------


def test_estimate_max_r_circle(circle2000):
    b, _ = circle2000
    est = rg.estimate_max_r(b)
    # r_hi tightens onto the onset of the inconclusive band, just under the
    # true radius: 1 / (1 + eps_geo) is the largest slope that still clears 1
    assert 0.98 <= est.r_lo < est.r_hi <= 1.0
    assert est.gap <= 0.01
    assert est.hi_verdict in ("refuted", "inconclusive")
    # probes anchor at the sampling resolution and record every verdict
    npt.assert_allclose(est.probes[0][0], b.resolution_h, rtol=1e-12)
    assert est.probes[0][1] == "certified"
    assert all(v in ("certified", "refuted", "inconclusive") for _, v in est.probes)


def test_estimate_respects_initial_bound(circle2000):
    b, _ = circle2000
    est = rg.estimate_max_r(b, hi=1.5)
    assert est.r_hi <= 1.5
    assert 0.98 <= est.r_lo <= 1.0


def test_estimate_scale_equivariance():
    big, _ = rg.generate("circle", 2000, radius=3.0)
    est = rg.estimate_max_r(big)
    assert 0.98 <= est.r_lo / 3.0 <= 1.0


def test_estimate_gap_validation(circle2000):
    b, _ = circle2000
    for gap in (0.0, 1.0, -0.2, 2.0):
        with pytest.raises(ValueError):
            rg.estimate_max_r(b, gap=gap)


def test_estimate_all_refuted_on_crossing_curve(figure8):
    b, _ = figure8
    with pytest.raises(rg.AllRefutedError):
        rg.estimate_max_r(b)
