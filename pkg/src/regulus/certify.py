"""Certify or refute boundary regularity at a candidate radius.

Three independent checks feed the verdict:

- the field check measures the Lipschitz slope and tangency defect of the
  scaled normal field;
- the distance check looks for sample pairs that are close in space but far
  along the boundary (witnesses against the radius);
- the tangent-ball oracle tests every sample pair against the empty-ball
  property that an admissible radius implies.

Measured slopes and graph distances are both biased in the safe direction
(slopes never exceed, graph distances never exceed the true in-boundary
distance), so refutations are trustworthy as measured, while certification
demands that the measurement clear the threshold even after discretization
headroom is added.  Between the two lies an explicit inconclusive band.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._scan import block_ranges, map_blocks
from .boundary import Boundary
from .errors import AllRefutedError
from .geodesics import default_step_cap, distance_matrix, distances_from
from .normal_field import (
    DefectScale,
    FieldSlopeReport,
    estimate_lipschitz,
    normality_defect,
)
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "ConditionOneReport",
    "check_condition1",
    "WitnessPair",
    "ConditionTwoReport",
    "check_condition2",
    "OracleViolation",
    "OracleReport",
    "ball_oracle",
    "RegularityReport",
    "certify",
    "RadiusEstimate",
    "estimate_max_r",
]

_MAX_WITNESSES = 64
_ORACLE_MARGIN_COEFF = 0.25  # strictness eps_tan = coeff * h^2 / r


# ---------------------------------------------------------------------------
# Condition 1: the scaled normal field
# ---------------------------------------------------------------------------


@dataclass
class ConditionOneReport:
    """Field-side check at the boundary's scaling radius.

    ``verdict`` applies the plain threshold ``lip <= 1 + eps_geo``;
    ``margin_class`` grades the same measurement for the combined verdict:
    ``pass`` needs the estimate to clear 1 even after inflation by the
    discretization allowance, ``fail`` needs it to exceed 1 by more than the
    allowance could explain, and ``marginal`` is everything between.
    """

    norm_ok: bool
    lip_estimate: float
    slope_max: float
    worst_pair: tuple[int, int]
    normality_defect: float
    defect_scales: list[DefectScale]
    eps_geo: float
    verdict: bool
    margin_class: str
    checked_pairs: int
    excluded_pairs: int


def check_condition1(
    boundary: Boundary, tol: Tolerances = DEFAULT_TOL, threads: int = 1
) -> ConditionOneReport:
    """Measure the scaled field against the unit Lipschitz threshold."""
    r = boundary.r
    eps = tol.eps_geo(boundary.resolution_h, r)
    slope: FieldSlopeReport = estimate_lipschitz(boundary, threads=threads)
    defect = normality_defect(boundary)
    lip = slope.lip_estimate
    norm_ok = True  # construction normalizes; nonuniform data never gets here
    defect_ok = defect.finest.max_defect <= eps * (1.0 + tol.rel)
    verdict = bool(norm_ok and lip <= 1.0 + eps and defect_ok)
    if norm_ok and defect_ok and lip * (1.0 + eps) <= 1.0 + tol.lip_slack:
        margin_class = "pass"
    elif lip > (1.0 + tol.lip_slack) * (1.0 + eps):
        margin_class = "fail"
    else:
        margin_class = "marginal"
    return ConditionOneReport(
        norm_ok=norm_ok,
        lip_estimate=lip,
        slope_max=slope.slope_max,
        worst_pair=slope.worst_pair,
        normality_defect=defect.finest.max_defect,
        defect_scales=defect.scales,
        eps_geo=eps,
        verdict=verdict,
        margin_class=margin_class,
        checked_pairs=slope.checked_pairs,
        excluded_pairs=slope.excluded_pairs,
    )


# ---------------------------------------------------------------------------
# Condition 2: near in space, far along the boundary
# ---------------------------------------------------------------------------


@dataclass
class WitnessPair:
    i: int
    j: int
    euclidean: float
    intrinsic: float
    ratio: float
    confirmed: bool


@dataclass
class ConditionTwoReport:
    checked_pairs: int
    witnesses: list[WitnessPair]
    verdict: bool


def _jurisdiction(boundary: Boundary, threads: int = 1) -> dict:
    """Pairs whose in-boundary distance reaches (pi/2) times their gap.

    Radius-independent, so cached: a pair in this set becomes a witness as
    soon as ``2 r`` exceeds its Euclidean gap.  Graph distances are lower
    bounds, so membership here is conservative and every witness is sound.
    """
    key = ("jurisdiction",)
    cached = boundary._cache.get(key)
    if cached is not None:
        return cached
    n = boundary.n_points
    pts = boundary.points
    dmat = distance_matrix(boundary)

    def scan(lo: int, hi: int):
        diff = pts[lo:hi, None, :] - pts[None, :, :]
        e = np.linalg.norm(diff, axis=2)
        cols = np.arange(n)[None, :]
        mask = (cols > np.arange(lo, hi)[:, None]) & (e > 0)
        mask &= dmat[lo:hi] >= 0.5 * math.pi * e
        ii, jj = np.nonzero(mask)
        return ii + lo, jj, e[mask]

    out_i, out_j, out_e = [], [], []
    for ii, jj, ee in map_blocks(scan, block_ranges(n, 256), threads):
        out_i.append(ii)
        out_j.append(jj)
        out_e.append(ee)
    pairs = np.stack(
        [np.concatenate(out_i), np.concatenate(out_j)], axis=1
    ).astype(np.int32)
    e = np.concatenate(out_e)
    d = dmat[pairs[:, 0], pairs[:, 1]]
    result = {"pairs": pairs, "e": e, "d": d}
    boundary._cache[key] = result
    return result


def check_condition2(
    boundary: Boundary,
    tol: Tolerances = DEFAULT_TOL,
    threads: int = 1,
    max_witnesses: int = _MAX_WITNESSES,
) -> ConditionTwoReport:
    """Search for pairs within ``2 r`` whose in-boundary distance is extreme.

    A pair with Euclidean gap strictly below ``2 r`` and in-boundary distance
    at least ``(pi/2)`` times the gap is incompatible with regularity at
    scale ``r``.  Each witness is re-confirmed on a graph with doubled step
    cap, which guards against distances inflated by poor connectivity (the
    denser graph can only shorten paths).
    """
    r = boundary.r
    jur = _jurisdiction(boundary, threads)
    e = jur["e"]
    cut = 2.0 * r * (1.0 - tol.rel)
    hits = np.flatnonzero(e < cut)
    checked = int(e.size)
    witnesses: list[WitnessPair] = []
    if hits.size:
        d = jur["d"][hits]
        ratio = np.where(np.isfinite(d), d / e[hits], np.inf)
        order = np.lexsort((jur["pairs"][hits, 1], jur["pairs"][hits, 0], -ratio))
        take = order[: int(max_witnesses)]
        confirm = distance_matrix(boundary, 2.0 * default_step_cap(boundary))
        for k in take:
            i, j = (int(v) for v in jur["pairs"][hits[k]])
            e_k = float(e[hits[k]])
            d2 = float(confirm[i, j])
            confirmed = d2 >= 0.5 * math.pi * e_k
            witnesses.append(
                WitnessPair(i, j, e_k, float(jur["d"][hits[k]]),
                            float(ratio[k]), confirmed)
            )
    verdict = not any(w.confirmed for w in witnesses)
    return ConditionTwoReport(checked, witnesses, verdict)


# ---------------------------------------------------------------------------
# Tangent-ball oracle
# ---------------------------------------------------------------------------


@dataclass
class OracleViolation:
    i: int
    j: int
    depth: float
    pair_radius: float


@dataclass
class OracleReport:
    verdict: bool
    violations: list[OracleViolation]
    checked_pairs: int
    rho_min: float
    rho_argmin: tuple[int, int]
    margin: float


def _oracle_table(boundary: Boundary, threads: int = 1) -> dict:
    """Per-pair critical radius, cached: flat upper-triangle layout.

    For samples ``x, y`` with unit normals, the ball of radius ``rho`` tangent
    at one of them starts swallowing the other exactly at
    ``rho = |x - y|^2 / (2 |<x - y, n>|)`` (the larger normal component of
    the two sides binds first).  Any admissible radius must stay at or below
    every pair's critical radius.
    """
    key = ("oracle",)
    cached = boundary._cache.get(key)
    if cached is not None:
        return cached
    n = boundary.n_points
    pts = boundary.points
    nrm = boundary.normals
    row_counts = np.arange(n - 1, -1, -1, dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(row_counts)])

    a2 = np.empty(int(offsets[-1]), dtype=np.float64)
    rho = np.empty_like(a2)

    def scan(lo: int, hi: int):
        for i in range(lo, hi):
            u = pts[i + 1 :] - pts[i]
            aa = np.einsum("ij,ij->i", u, u)
            bx = np.abs(u @ nrm[i])
            by = np.abs(np.einsum("ij,ij->i", u, nrm[i + 1 :]))
            b = np.maximum(bx, by)
            with np.errstate(divide="ignore"):
                rr = np.where(b > 0, aa / (2.0 * b), np.inf)
            a2[offsets[i] : offsets[i + 1]] = aa
            rho[offsets[i] : offsets[i + 1]] = rr
        return None

    map_blocks(scan, block_ranges(n - 1, 128), threads)
    k = int(np.argmin(rho))
    i = int(np.searchsorted(offsets, k, side="right") - 1)
    j = int(i + 1 + (k - offsets[i]))
    table = {
        "a2": a2,
        "rho": rho,
        "offsets": offsets,
        "rho_min": float(rho[k]),
        "rho_argmin": (i, j),
    }
    boundary._cache[key] = table
    return table


def _unpack_flat(offsets: np.ndarray, flat: np.ndarray):
    i = np.searchsorted(offsets, flat, side="right") - 1
    j = i + 1 + (flat - offsets[i])
    return i.astype(int), j.astype(int)


def ball_oracle(
    boundary: Boundary, tol: Tolerances = DEFAULT_TOL, threads: int = 1
) -> OracleReport:
    """Empty tangent-ball test over all sample pairs at the scaling radius.

    A sample strictly inside another sample's tangent ball of radius ``r``
    (deeper than the strictness margin) contradicts regularity at ``r``.  On
    exactly sampled regular data no pair ever violates, whatever the
    sampling; the margin only absorbs rounding, so it is kept small:
    ``eps_tan = h^2 / (4 r)``.
    """
    r = boundary.r
    h = boundary.resolution_h
    table = _oracle_table(boundary, threads)
    eps_tan = _ORACLE_MARGIN_COEFF * h * h / r
    threshold = 2.0 * r * eps_tan - eps_tan * eps_tan
    a2, rho = table["a2"], table["rho"]
    with np.errstate(invalid="ignore"):
        depth_term = a2 * (r / rho - 1.0)
    viol = np.flatnonzero((rho < r) & (depth_term > threshold))
    violations: list[OracleViolation] = []
    if viol.size:
        depths = r - np.sqrt(np.maximum(r * r - depth_term[viol], 0.0))
        order = np.argsort(-depths, kind="stable")[:_MAX_WITNESSES]
        ii, jj = _unpack_flat(table["offsets"], viol[order])
        for i, j, d, k in zip(ii, jj, depths[order], viol[order]):
            violations.append(
                OracleViolation(int(i), int(j), float(d), float(rho[k]))
            )
    return OracleReport(
        verdict=not violations,
        violations=violations,
        checked_pairs=int(a2.size),
        rho_min=table["rho_min"],
        rho_argmin=table["rho_argmin"],
        margin=eps_tan,
    )


# ---------------------------------------------------------------------------
# Combined verdict
# ---------------------------------------------------------------------------


@dataclass
class RegularityReport:
    r_tested: float
    cond1: ConditionOneReport
    cond2: ConditionTwoReport
    ball_oracle: OracleReport
    overall: str  # "certified" | "refuted" | "inconclusive"
    witnesses: list[dict] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.overall == "certified"

    @property
    def refuted(self) -> bool:
        return self.overall == "refuted"


def certify(
    boundary: Boundary,
    r: float | None = None,
    tol: Tolerances = DEFAULT_TOL,
    threads: int = 1,
) -> RegularityReport:
    """Run all three checks at radius ``r`` and combine them.

    Refuted as soon as any check produces a confirmed witness: a field slope
    beyond threshold plus allowance, a confirmed distance witness, or a
    tangent-ball violation.  Certified only when every check passes with its
    discretization headroom.  Anything else is inconclusive: the data at this
    sampling cannot distinguish the radius from the boundary's true reach.
    """
    b = boundary if r is None or r == boundary.r else boundary.rescaled(r)
    c1 = check_condition1(b, tol, threads)
    c2 = check_condition2(b, tol, threads)
    orc = ball_oracle(b, tol, threads)

    refuted = (c1.margin_class == "fail") or (not c2.verdict) or (not orc.verdict)
    certified = (not refuted) and c1.margin_class == "pass" and c2.verdict and orc.verdict
    overall = "refuted" if refuted else ("certified" if certified else "inconclusive")

    witnesses: list[dict] = []
    if c1.margin_class == "fail":
        witnesses.append(
            {
                "kind": "field_slope",
                "pair": list(c1.worst_pair),
                "lip_estimate": c1.lip_estimate,
            }
        )
    for w in c2.witnesses:
        if w.confirmed:
            witnesses.append({"kind": "distance_pair", **asdict(w)})
    for v in orc.violations:
        witnesses.append({"kind": "ball_violation", **asdict(v)})
    return RegularityReport(b.r, c1, c2, orc, overall, witnesses)


@dataclass
class RadiusEstimate:
    """Bracket from bisection: ``r_lo`` certified, ``r_hi`` not certified.

    ``hi_verdict`` records whether the upper end was refuted outright or
    merely inconclusive; the bracket width is driven below ``gap`` times
    ``r_hi`` either way.
    """

    r_lo: float
    r_hi: float
    hi_verdict: str
    gap: float
    probes: list[tuple[float, str]]


def estimate_max_r(
    boundary: Boundary,
    hi: float | None = None,
    gap: float = 0.01,
    tol: Tolerances = DEFAULT_TOL,
    threads: int = 1,
    max_iter: int = 60,
) -> RadiusEstimate:
    """Bisect for the largest certifiable radius.

    Anchors the bracket at the sampling resolution below (raising
    :class:`AllRefutedError` when even that radius fails) and at a refuted
    radius above (doubling the initial guess as needed), then bisects until
    the relative width is at most ``gap``.
    """
    if not 0.0 < gap < 1.0:
        raise ValueError(f"gap must lie in (0, 1), got {gap}")
    probes: list[tuple[float, str]] = []

    def run(r: float) -> str:
        v = certify(boundary, r, tol, threads).overall
        probes.append((r, v))
        return v

    floor = boundary.resolution_h
    v_floor = run(floor)
    if v_floor != "certified":
        raise AllRefutedError(
            f"radius {floor:.6g} (the sampling resolution) is already "
            f"{v_floor}; no certifiable radius at this sampling"
        )
    lo = floor

    if hi is None:
        span = boundary.points.max(axis=0) - boundary.points.min(axis=0)
        hi = float(np.linalg.norm(span))
    hi = max(float(hi), 2.0 * floor)
    hi_verdict = run(hi)
    doublings = 0
    while hi_verdict == "certified":
        if doublings >= 8:
            raise ValueError(
                f"no refutable radius up to {hi:.6g}; raise the initial bound"
            )
        lo = hi
        hi *= 2.0
        doublings += 1
        hi_verdict = run(hi)

    iters = 0
    while (hi - lo) / hi > gap and iters < max_iter:
        mid = 0.5 * (lo + hi)
        v = run(mid)
        if v == "certified":
            lo = mid
        else:
            hi = mid
            hi_verdict = v
        iters += 1
    return RadiusEstimate(lo, hi, hi_verdict, (hi - lo) / hi, probes)
