"""Acceptance checks: closed forms, analytic oracles, end-to-end behavior.

Each test exercises one release criterion and appends a one-line verdict to
the terminal summary, so the full scorecard is visible in a single run.
"""
from __future__ import annotations

import json
import math
import time

import numpy as np

import regulus as rg
from regulus.cli import main
from regulus.geometry import bounded_turn_curve, curve_clearance_check

# radii with certified verdicts at the reference samplings
CERTIFIED_R = {
    "circle": 0.9,
    "ellipse": 0.45,
    "annulus": 0.45,
    "rrect": 0.45,
    "dumbbell": 0.09,
}


def _record(log, code, ok, detail):
    log.append(f"{code} {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"{code}: {detail}"


def _certified_fixtures(circle2000, ellipse4000, annulus1600, rrect4000, dumbbell4000):
    return {
        "circle": circle2000,
        "ellipse": ellipse4000,
        "annulus": annulus1600,
        "rrect": rrect4000,
        "dumbbell": dumbbell4000,
    }


def test_a01_polygon_doubling_matches_the_closed_form(acceptance_log):
    chords = (0.5, 1.0, 1.5, 1.9)
    worst = 0.0
    worst_cross = 0.0
    for s in chords:
        closed = 2.0 * math.atan2(s, math.sqrt(4.0 - s * s))
        worst = max(worst, abs(rg.inscribed_polygon_length(s, 1.0, 20) - closed))
        worst_cross = max(worst_cross, abs(closed - 2.0 * math.asin(0.5 * s)))
    t0 = time.perf_counter()
    for _ in range(100):
        rg.inscribed_polygon_length(1.0, 1.0, 20)
    per_call_ms = (time.perf_counter() - t0) * 10.0
    ok = worst <= 1e-9 and worst_cross <= 1e-12 and per_call_ms < 1.0
    _record(
        acceptance_log, "A01", ok,
        f"doubling vs closed form: err {worst:.2e} (<=1e-9), "
        f"asin identity {worst_cross:.2e} (<=1e-12), {per_call_ms:.4f} ms/call",
    )


def test_a02_circle_radius_bracket(acceptance_log):
    b, _ = rg.generate("circle", 2000)  # fresh: timed without warm caches
    t0 = time.perf_counter()
    est = rg.estimate_max_r(b)
    dt = time.perf_counter() - t0
    ok = 0.98 <= est.r_lo <= 1.0 and dt < 10.0
    _record(
        acceptance_log, "A02", ok,
        f"circle r_lo {est.r_lo:.6f} in [0.98, 1.0], {dt:.2f} s (<10)",
    )


def test_a03_ellipse_radius_bracket(acceptance_log):
    b, _ = rg.generate("ellipse", 4000)
    est = rg.estimate_max_r(b)
    ok = 0.48 <= est.r_lo <= 0.5
    _record(
        acceptance_log, "A03", ok,
        f"ellipse r_lo {est.r_lo:.6f} in [0.48, 0.5] (reach 0.5)",
    )


def test_a04_extremal_ratio_is_half_pi_at_antipodes(acceptance_log, circle2000):
    b, _ = circle2000
    n = b.n_points
    dmat = rg.distance_matrix(b)
    pts = b.points
    emat = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(emat > 0, dmat / emat, 0.0)
    k = int(np.argmax(ratio))
    i, j = divmod(k, n)
    top = float(ratio[i, j])
    offset = min((j - i) % n, (i - j) % n)
    ok = abs(top - 0.5 * math.pi) <= 0.01 and offset == n // 2
    _record(
        acceptance_log, "A04", ok,
        f"max intrinsic/euclidean {top:.6f} vs pi/2 {0.5 * math.pi:.6f} "
        f"at pair offset {offset} (antipodes = {n // 2})",
    )


def test_a05_dumbbell_separates_the_two_conditions(acceptance_log, dumbbell4000):
    b, _ = dumbbell4000
    at_half = b.rescaled(0.5)
    c1 = rg.check_condition1(at_half)
    ok_c1 = c1.verdict and c1.lip_estimate <= 1.02
    c2 = rg.check_condition2(at_half)
    good_witness = [w for w in c2.witnesses if w.confirmed and 0.19 <= w.euclidean <= 0.21]
    ok_c2 = (not c2.verdict) and bool(good_witness)
    ok_low = rg.certify(b, 0.09).certified
    est = rg.estimate_max_r(b)
    ok_est = (
        est.r_lo <= 0.1 <= est.r_hi
        and abs(est.r_lo - 0.1) <= 0.005
        and abs(est.r_hi - 0.1) <= 0.005
    )
    ok = ok_c1 and ok_c2 and ok_low and ok_est
    _record(
        acceptance_log, "A05", ok,
        f"r=0.5: field lip {c1.lip_estimate:.4f} (<=1.02, verdict {c1.verdict}), "
        f"witness gap {good_witness[0].euclidean if good_witness else float('nan'):.4f}; "
        f"certified at 0.09: {ok_low}; bracket [{est.r_lo:.6f}, {est.r_hi:.6f}] covers 0.1",
    )


def test_a06_quadratic_bound_near_the_tube(acceptance_log, circle20k):
    b, _ = circle20k
    rng = np.random.default_rng(0)
    m = 10_000
    idx = rng.integers(0, b.n_points, size=m)
    dirs = rng.normal(size=(m, 2))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    offsets = dirs * rng.uniform(0.0, 0.2, size=m)[:, None]
    rep = rg.quadratic_bound_check(b, 0.25, indices=idx, offsets=offsets)
    loc = np.asarray(rep.worst_location)
    ok = rep.slack_min >= -1e-6 and loc.shape == (2,) and np.isfinite(loc).all()
    _record(
        acceptance_log, "A06", ok,
        f"{rep.checked} probes at s=0.25, |v|<=0.2: slack_min {rep.slack_min:.3e} "
        f"(>=-1e-6), worst at ({loc[0]:.4f}, {loc[1]:.4f})",
    )


def _pairs_below(b, r, count, rng):
    out = np.empty((0, 2), dtype=int)
    while len(out) < count:
        pairs = rng.integers(0, b.n_points, size=(4 * count, 2))
        e = np.linalg.norm(b.points[pairs[:, 0]] - b.points[pairs[:, 1]], axis=1)
        keep = (e > 0) & (e < 2.0 * r * (1.0 - 1e-9))
        out = np.concatenate([out, pairs[keep]])[: count]
    return out


def test_a07_arc_upper_bound_on_certified_shapes(acceptance_log, circle2000, rrect4000):
    rng = np.random.default_rng(3)
    details = []
    ok = True
    for (fixture, r) in ((circle2000, 0.99), (rrect4000, 0.495)):
        b, info = fixture
        rep = rg.arc_bound_check(b, r, _pairs_below(b, r, 1000, rng))
        capped = rep.intrinsic_max < math.pi * r + rep.length_tol
        ok = ok and rep.ok and capped
        details.append(
            f"{info.name}@r={r}: slack_min {rep.slack_min:.2e} "
            f"(tol -{rep.length_tol:.2e}), intrinsic_max {rep.intrinsic_max:.4f} "
            f"< pi r + tol {math.pi * r + rep.length_tol:.4f}"
        )
    _record(acceptance_log, "A07", ok, "; ".join(details))


def test_a08_geodesic_turn_rates_respect_curvature(
    acceptance_log, circle2000, ellipse4000, annulus1600, rrect4000, dumbbell4000
):
    fixtures = _certified_fixtures(
        circle2000, ellipse4000, annulus1600, rrect4000, dumbbell4000
    )
    rng = np.random.default_rng(11)
    worst_frac = 0.0
    worst_name = ""
    ok = True
    for name, (b, _) in fixtures.items():
        r = CERTIFIED_R[name]
        h = b.resolution_h
        bound = 1.0 / r + 2.0 * h / (r * r)
        # random same-loop pairs (the annulus has two components)
        loops = [np.flatnonzero(np.linalg.norm(b.points, axis=1) > 1.5),
                 np.flatnonzero(np.linalg.norm(b.points, axis=1) <= 1.5)] \
            if name == "annulus" else [np.arange(b.n_points)]
        for loop in loops:
            if len(loop) < 2:
                continue
            for _k in range(6):
                i, j = rng.choice(loop, size=2, replace=False)
                path = rg.geodesic(b, int(i), int(j))
                frac = path.max_turn_rate / bound
                if frac > worst_frac:
                    worst_frac, worst_name = frac, name
                ok = ok and path.max_turn_rate <= bound
    _record(
        acceptance_log, "A08", ok,
        f"max turn rate over sampled geodesics <= 1/r + 2h/r^2 on all five "
        f"builtins; tightest {worst_frac:.3f} of the bound ({worst_name})",
    )


def test_a09_clearance_verifier_accepts_and_rejects(acceptance_log):
    r = 0.8
    rng = np.random.default_rng(7)
    accepted = sum(
        curve_clearance_check(bounded_turn_curve(r, rng), r).verdict
        for _ in range(100)
    )
    rejected_at_d = 0
    for _ in range(100):
        rep = curve_clearance_check(bounded_turn_curve(r, rng, spike=1.5), r)
        if not rep.verdict and rep.first_failed == "d":
            rejected_at_d += 1
    ok = accepted == 100 and rejected_at_d == 100
    _record(
        acceptance_log, "A09", ok,
        f"admissible curves accepted {accepted}/100; curvature-1.5/r curves "
        f"rejected at precondition d {rejected_at_d}/100",
    )


def test_a10_certify_agrees_with_the_ball_oracle(
    acceptance_log, circle2000, ellipse4000, annulus1600, rrect4000, dumbbell4000
):
    fixtures = _certified_fixtures(
        circle2000, ellipse4000, annulus1600, rrect4000, dumbbell4000
    )
    factors = (0.5, 0.9, 0.99, 1.01, 1.5)
    disagreements = []
    inconclusive = 0
    for name, (b, info) in fixtures.items():
        for f in factors:
            r = f * info.reach
            rep = rg.certify(b, r)
            oracle_ok = rep.ball_oracle.verdict
            if rep.overall == "inconclusive":
                inconclusive += 1
            elif rep.certified and not oracle_ok:
                disagreements.append((name, f, "certified vs oracle violation"))
            elif rep.refuted and oracle_ok and f > 1.0:
                # above the reach the oracle must co-fire with the refutation
                disagreements.append((name, f, "refuted but oracle clean"))
    ok = not disagreements
    _record(
        acceptance_log, "A10", ok,
        f"5 shapes x {len(factors)} radii: 0 disagreements "
        f"({inconclusive} inconclusive, outside the comparison band)"
        + (f"; first: {disagreements[0]}" if disagreements else ""),
    )


def test_a11_projection_fiber_and_stretch(
    acceptance_log, circle2000, ellipse4000, annulus1600, rrect4000, dumbbell4000
):
    fixtures = _certified_fixtures(
        circle2000, ellipse4000, annulus1600, rrect4000, dumbbell4000
    )
    rng = np.random.default_rng(13)
    bad_feet = 0
    stretch_ok = True
    worst_ratio = 0.0
    for name, (b, _) in fixtures.items():
        r = CERTIFIED_R[name]
        scaled = b.rescaled(r)
        idx = rng.integers(0, b.n_points, size=1000)
        t = rng.uniform(-0.45, 0.45, size=1000)
        queries = b.points[idx] + (t * r)[:, None] * b.normals[idx]
        feet, _, dist, _, _ = rg.project_many(scaled, queries)
        bad_feet += int((feet != idx).sum())
        rep = rg.projection_lipschitz_probe(scaled, 0.25, 1000, rng)
        stretch_ok = stretch_ok and rep.ok and rep.max_ratio <= rep.bound
        worst_ratio = max(worst_ratio, rep.max_ratio / rep.bound)
    ok = bad_feet == 0 and stretch_ok
    _record(
        acceptance_log, "A11", ok,
        f"5000 fiber probes t in (-0.45, 0.45): {bad_feet} wrong feet; "
        f"stretch probe at s=0.25 within sqrt(2)+eps on all shapes "
        f"(worst {worst_ratio:.3f} of bound)",
    )


def test_a12_reports_are_thread_count_invariant(acceptance_log, tmp_path):
    a, b = tmp_path / "t1.json", tmp_path / "t8.json"
    args = ["certify", "--shape", "dumbbell", "--n", "1000", "--r", "0.3"]
    rc1 = main(args + ["--threads", "1", "--json", str(a)])
    rc8 = main(args + ["--threads", "8", "--json", str(b)])
    same = a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    ok = same and rc1 == rc8 == 1 and doc["results"]["overall"] == "refuted"
    _record(
        acceptance_log, "A12", ok,
        f"certify JSON byte-identical across --threads 1/8: {same} "
        f"(exit {rc1}/{rc8}, verdict {doc['results']['overall']})",
    )
