"""Closed-form chord/arc maps and discrete certificates for tangent-ball geometry.

The scalar maps below are elementary circle geometry: the sagitta of a chord,
the chord subtending half its arc, the arc length recovered from a chord, and
the length of the inscribed polygon obtained by repeatedly halving arcs.  They
are exact and carry tight (few-ulp) accuracy guarantees; everything sampled or
discrete lives in the check functions further down, which report defects
instead of raising.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "chord_sagitta",
    "half_arc_chord",
    "arc_length_from_chord",
    "inscribed_polygon_length",
    "projection_stretch",
    "SixBallConfig",
    "HypothesisCheck",
    "SixBallReport",
    "six_ball_check",
    "SampledCurve",
    "CurveClearanceReport",
    "curve_clearance_check",
    "bounded_turn_curve",
]


def _check_chord(s: float, r: float) -> None:
    if not (math.isfinite(r) and r > 0.0):
        raise ValueError(f"radius must be positive and finite, got {r}")
    if not math.isfinite(s) or s < 0.0 or s > 2.0 * r * (1.0 + 1e-12):
        raise ValueError(f"chord length {s} outside [0, 2r] for r = {r}")


def chord_sagitta(s: float, r: float) -> float:
    """Sagitta of a chord of length ``s`` on a circle of radius ``r``.

    Equals ``r - sqrt(r^2 - s^2/4)``, evaluated in the product form
    ``(s^2/4) / (r + sqrt(r^2 - s^2/4))`` which is free of cancellation for
    small chords.  Strictly below ``s/2`` on (0, 2r), with equality at the
    endpoints.
    """
    _check_chord(s, r)
    rad = max(r * r - 0.25 * s * s, 0.0)
    return (0.25 * s * s) / (r + math.sqrt(rad))


def half_arc_chord(s: float, r: float) -> float:
    """Chord subtending half the arc cut by a chord of length ``s``.

    The right triangle over half the chord and the sagitta gives
    ``sqrt(s^2/4 + sagitta^2)``.
    """
    _check_chord(s, r)
    return math.hypot(0.5 * s, chord_sagitta(s, r))


def arc_length_from_chord(s: float, r: float) -> float:
    """Arc length subtended by a chord of length ``s`` on a circle of radius ``r``.

    Evaluated as ``2 r atan2(s, sqrt(4 r^2 - s^2))``; for ``s = 2r`` this is
    ``pi * r``.  Agrees with ``2 r asin(s / 2r)`` to rounding.
    """
    _check_chord(s, r)
    return 2.0 * r * math.atan2(s, math.sqrt(max(4.0 * r * r - s * s, 0.0)))


def inscribed_polygon_length(s: float, r: float, n: int) -> float:
    """Length of the inscribed ``2^n``-gon over the arc of chord ``s``.

    Applies :func:`half_arc_chord` ``n`` times and scales by ``2^n``.  The
    sequence increases to :func:`arc_length_from_chord` with an O(4^-n) gap.
    """
    _check_chord(s, r)
    if n < 0 or n != int(n):
        raise ValueError(f"doubling count must be a nonnegative integer, got {n}")
    val = float(s)
    for _ in range(int(n)):
        val = half_arc_chord(val, r)
    return math.ldexp(val, int(n))


def projection_stretch(s: float) -> float:
    """Worst-case stretch ``1/sqrt(1 - 2 s)`` of nearest-point projection.

    ``s`` is the tube half-width as a fraction of the ball radius and must lie
    in [0, 1/2).
    """
    if not math.isfinite(s) or s < 0.0 or s >= 0.5:
        raise ValueError(f"depth fraction {s} outside [0, 0.5)")
    return 1.0 / math.sqrt(1.0 - 2.0 * s)


# ---------------------------------------------------------------------------
# Six-ball configuration check
# ---------------------------------------------------------------------------


@dataclass
class HypothesisCheck:
    ok: bool
    defect: float
    note: str = ""


@dataclass(frozen=True)
class SixBallConfig:
    """Three boundary points with a tangent-ball pair attached at the third.

    ``x1, x2, x3`` are points in R^n; ``eta3`` is the scaled normal at ``x3``
    (its norm must equal ``r``), so the two balls of radius ``r`` centered at
    ``x3 +/- eta3`` touch at ``x3``.  The tangent pairs at ``x1`` and ``x2``
    are assumed; only what the data determines is checked.
    """

    x1: np.ndarray
    x2: np.ndarray
    x3: np.ndarray
    eta3: np.ndarray
    r: float

    def __post_init__(self):
        for name in ("x1", "x2", "x3", "eta3"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 1:
                raise ValueError(f"{name} must be a 1-d point, got shape {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
            object.__setattr__(self, name, arr)
        dims = {self.x1.size, self.x2.size, self.x3.size, self.eta3.size}
        if len(dims) != 1:
            raise ValueError(f"mixed dimensions in configuration: {sorted(dims)}")
        if not (math.isfinite(self.r) and self.r > 0):
            raise ValueError(f"radius must be positive, got {self.r}")
        if np.array_equal(self.x1, self.x2):
            raise ValueError("x1 and x2 coincide")


@dataclass
class SixBallReport:
    hypotheses: dict[str, HypothesisCheck]
    hypotheses_ok: bool
    bound_satisfied: bool
    lhs: float
    rhs: float


def six_ball_check(cfg: SixBallConfig, tol: Tolerances = DEFAULT_TOL) -> SixBallReport:
    """Evaluate the tangent-ball midpoint bound for a three-point configuration.

    Checks, with defect magnitudes:

    - (a) tangency: ``|eta3|`` equals ``r`` so the pair at ``x3`` touches there;
    - (b) disjointness: neither ``x1`` nor ``x2`` lies strictly inside either
      ball at ``x3`` (a point of one family inside a ball of the other family
      makes the two ball unions intersect, whatever the unseen normals are);
    - (c) chord bound: ``0 < |x1 - x2| < 2 r``;
    - (d) isoceles: ``|x3 - x1| = |x3 - x2|`` and ``x3`` within half a chord of
      the chord midpoint;
    - (e) coplanarity: ``eta3`` lies in the plane spanned by the three points.

    The conclusion compares ``|x3 - midpoint|`` against the sagitta of the
    chord; on exact tangent-circle data the two agree to rounding.
    """
    r = cfg.r
    x1, x2, x3, eta3 = cfg.x1, cfg.x2, cfg.x3, cfg.eta3
    mid = 0.5 * (x1 + x2)
    chord = float(np.linalg.norm(x2 - x1))
    h_tol = max(tol.rel, 1e-12)

    checks: dict[str, HypothesisCheck] = {}

    norm_eta = float(np.linalg.norm(eta3))
    d_a = abs(norm_eta - r) / r
    checks["a"] = HypothesisCheck(d_a <= h_tol, d_a, "tangency of the pair at x3")

    centers = (x3 + eta3, x3 - eta3)
    worst = 0.0
    for p in (x1, x2):
        for c in centers:
            worst = max(worst, (r - float(np.linalg.norm(p - c))) / r)
    d_b = max(worst, 0.0)
    checks["b"] = HypothesisCheck(
        d_b <= h_tol, d_b, "x1/x2 against the balls at x3 (membership probe)"
    )

    d_c = 0.0 if 0.0 < chord < 2.0 * r else max(chord - 2.0 * r, -chord, 0.0) / r
    low = chord <= 0.0
    checks["c"] = HypothesisCheck(
        (not low) and chord < 2.0 * r * (1.0 + h_tol),
        d_c if not low else 1.0,
        "chord strictly between 0 and 2r",
    )

    l1 = float(np.linalg.norm(x3 - x1))
    l2 = float(np.linalg.norm(x3 - x2))
    lhs = float(np.linalg.norm(x3 - mid))
    d_iso = abs(l1 - l2) / max(chord, r * 1e-300)
    d_half = max(lhs - 0.5 * chord, 0.0) / max(chord, r * 1e-300)
    d_d = max(d_iso, d_half)
    checks["d"] = HypothesisCheck(d_d <= h_tol, d_d, "isoceles and half-chord box")

    if lhs > h_tol * r:
        basis = np.stack([x2 - x1, x3 - mid])
        q, _ = np.linalg.qr(basis.T)
        resid = eta3 - q @ (q.T @ eta3)
        d_e = float(np.linalg.norm(resid)) / r
    else:
        # flat case: the plane degenerates, any eta3 through x3 is coplanar
        d_e = 0.0
    checks["e"] = HypothesisCheck(d_e <= h_tol, d_e, "eta3 in the x1-x2-x3 plane")

    rhs = chord_sagitta(min(chord, 2.0 * r), r)
    hyp_ok = all(c.ok for c in checks.values())
    bound = lhs <= rhs + h_tol * r
    return SixBallReport(checks, hyp_ok, bound, lhs, rhs)


# ---------------------------------------------------------------------------
# Discrete curve clearance certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampledCurve:
    """A curve sampled at strictly increasing parameter values."""

    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        p = np.asarray(self.points, dtype=float)
        if t.ndim != 1 or p.ndim != 2 or p.shape[0] != t.size:
            raise ValueError(
                f"need times (K,) matching points (K, d); got {t.shape}, {p.shape}"
            )
        if t.size < 3:
            raise ValueError("need at least three samples")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(p))):
            raise ValueError("non-finite curve data")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "points", p)

    @property
    def step(self) -> float:
        return float(np.max(np.diff(self.times)))


@dataclass
class CurveClearanceReport:
    """Outcome of :func:`curve_clearance_check` with per-precondition defects."""

    preconditions: dict[str, HypothesisCheck]
    first_failed: str | None
    min_norm: float | None
    argmin_time: float | None
    verdict: bool


def curve_clearance_check(
    curve: SampledCurve, r: float, tol: Tolerances = DEFAULT_TOL
) -> CurveClearanceReport:
    """Verify that an admissible curve stays outside the ball of radius ``r``.

    Preconditions, checked in order with defects:

    - (a) the curve starts on the sphere of radius ``r``;
    - (b) it starts tangentially (first derivative orthogonal to the start);
    - (c) it is unit speed;
    - (d) its discrete turn rate never exceeds ``1/r``.

    If any precondition fails the conclusion is not evaluated and
    ``first_failed`` names the earliest offender.  Otherwise the report
    carries the minimum norm over parameter values up to ``pi * r``, and the
    verdict states whether that minimum stays at or above ``r`` (up to
    rounding).  Raises ``ValueError`` when the curve does not reach ``pi * r``.
    """
    if not (math.isfinite(r) and r > 0):
        raise ValueError(f"radius must be positive, got {r}")
    t, p = curve.times, curve.points
    horizon = math.pi * r
    if t[-1] < horizon * (1.0 - 1e-9):
        raise ValueError(
            f"curve ends at {t[-1]:.6g}, before the horizon pi*r = {horizon:.6g}"
        )
    h = curve.step
    eps = tol.eps_geo(h, r)

    dt = np.diff(t)
    dp = np.diff(p, axis=0)
    seg_len = np.linalg.norm(dp, axis=1)
    deriv = dp / dt[:, None]

    checks: dict[str, HypothesisCheck] = {}

    d_a = abs(float(np.linalg.norm(p[0])) - r) / r
    checks["a"] = HypothesisCheck(d_a <= eps, d_a, "starts on the sphere")

    d_b = abs(float(p[0] @ deriv[0])) / (r * max(float(np.linalg.norm(deriv[0])), 1e-300))
    checks["b"] = HypothesisCheck(d_b <= eps, d_b, "tangential launch")

    speed_defect = float(np.max(np.abs(seg_len / dt - 1.0)))
    checks["c"] = HypothesisCheck(speed_defect <= eps, speed_defect, "unit speed")

    mid_dt = 0.5 * (t[2:] - t[:-2])
    turn = np.linalg.norm(np.diff(deriv, axis=0), axis=1) / mid_dt
    lip = float(np.max(turn)) if turn.size else 0.0
    d_d = max(lip * r - 1.0, 0.0)
    checks["d"] = HypothesisCheck(lip <= (1.0 + eps) / r, d_d, "turn rate at most 1/r")

    first_failed = next((k for k in "abcd" if not checks[k].ok), None)
    if first_failed is not None:
        return CurveClearanceReport(checks, first_failed, None, None, False)

    window = t <= horizon * (1.0 + 1e-12)
    norms = np.linalg.norm(p[window], axis=1)
    k = int(np.argmin(norms))
    min_norm = float(norms[k])
    verdict = min_norm >= r * (1.0 - tol.rel)
    return CurveClearanceReport(checks, None, min_norm, float(t[window][k]), verdict)


def bounded_turn_curve(
    r: float,
    rng: np.random.Generator,
    total: float | None = None,
    step: float | None = None,
    spike: float | None = None,
) -> SampledCurve:
    """Random unit-speed planar curve launched tangentially from the ``r``-sphere.

    The curve is a chain of circular arcs with signed curvature drawn from
    ``[-1/r, 1/r]``, joined with continuous direction, sampled exactly at a
    uniform parameter step.  With ``spike`` set, one interior arc is forced to
    curvature ``spike / r``, which makes the curve inadmissible for
    :func:`curve_clearance_check` whenever ``spike > 1``.
    """
    if total is None:
        total = 1.15 * math.pi * r
    if step is None:
        step = total / 2500.0
    lengths = []
    acc = 0.0
    while acc < total:
        ell = float(rng.uniform(0.3, 0.9)) * r
        lengths.append(ell)
        acc += ell
    curvs = [float(rng.uniform(-1.0, 1.0)) / r for _ in lengths]
    if spike is not None and len(curvs) >= 3:
        k = int(rng.integers(1, max(2, len(curvs) - 1)))
        curvs[k] = spike / r * (1.0 if rng.uniform() < 0.5 else -1.0)

    times = np.arange(0.0, acc, step)
    ends = np.cumsum(lengths)
    cuts = np.searchsorted(times, ends, side="left")
    pts = np.empty((times.size, 2))
    pos = np.array([r, 0.0])
    ang = 0.5 * math.pi  # direction (0, 1): tangential launch by construction
    start = 0.0
    idx = 0
    for ell, kappa, cut in zip(lengths, curvs, cuts):
        end = start + ell
        sel = times[idx:cut]
        s = sel - start
        if abs(kappa) < 1e-14:
            d = np.array([math.cos(ang), math.sin(ang)])
            seg = pos[None, :] + s[:, None] * d[None, :]
            pos = pos + ell * d
        else:
            # arc around the center one curvature radius to the left of travel
            n = np.array([-math.sin(ang), math.cos(ang)])
            d = np.array([math.cos(ang), math.sin(ang)])
            seg = (
                pos[None, :]
                + np.sin(kappa * s)[:, None] * d[None, :] / kappa
                + (1.0 - np.cos(kappa * s))[:, None] * n[None, :] / kappa
            )
            pos = (
                pos
                + math.sin(kappa * ell) * d / kappa
                + (1.0 - math.cos(kappa * ell)) * n / kappa
            )
            ang += kappa * ell
        pts[idx : idx + seg.shape[0]] = seg
        idx += seg.shape[0]
        start = end
    return SampledCurve(times[:idx], pts[:idx])
