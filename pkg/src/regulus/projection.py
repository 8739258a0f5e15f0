"""Nearest-sample projection onto a sampled boundary and tube diagnostics.

The projection target is the sample set, so feet are quantized to half a
sampling gap.  Ambiguity is decided against competitors outside a local
exclusion patch around the foot: samples on the foot's own surface patch sit
within a hair of the nearest distance without signalling a genuinely
two-sided projection, so they never count as competitors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import Boundary
from .errors import AmbiguousProjectionError
from .geometry import projection_stretch
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "tube_membership",
    "ProjectionResult",
    "project",
    "project_many",
    "height",
    "signed_height_field",
    "DifferentialReport",
    "differential_check",
    "QuadraticBoundReport",
    "quadratic_bound_check",
    "TangentBallReport",
    "local_tangent_ball_test",
    "StretchProbeReport",
    "projection_lipschitz_probe",
]

_KNN = 64


def tube_membership(boundary: Boundary, points, s: float):
    """Mask of points within ``s * r`` of the sampled boundary, with distances.

    Distances are to the nearest sample, an overestimate of the distance to
    the true boundary by at most half a sampling gap.
    """
    if not 0.0 < s < 0.5:
        raise ValueError(f"tube half-width fraction must lie in (0, 0.5), got {s}")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d, _ = boundary.kdtree().query(pts, k=1)
    return d < s * boundary.r, d


@dataclass
class ProjectionResult:
    index: int
    foot: np.ndarray
    distance: float
    second_gap: float
    ambiguous: bool


def _exclusion_radius(d1: np.ndarray, h: float) -> np.ndarray:
    # the foot's own patch extends ~sqrt(depth * gap) before the boundary
    # pulls away from the fiber; everything inside competes only numerically
    return 4.0 * np.sqrt(np.maximum(d1, h) * h)


def project_many(boundary: Boundary, points, tol: Tolerances = DEFAULT_TOL):
    """Nearest-sample projection of each point; vectorized.

    Returns ``(indices, feet, distances, second_gaps, ambiguous)``.  The
    second-best distance is measured against samples outside the exclusion
    patch of the foot, and a gap at or below twice the sampling resolution
    marks the projection ambiguous (two surface sheets compete).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != boundary.dim:
        raise ValueError(f"points are {pts.shape[1]}-d, boundary is {boundary.dim}-d")
    n = boundary.n_points
    h = boundary.resolution_h
    kd = boundary.kdtree()
    k = min(_KNN, n)
    dist, idx = kd.query(pts, k=k)
    dist = np.atleast_2d(dist)
    idx = np.atleast_2d(idx)
    d1 = dist[:, 0]
    feet = boundary.points[idx[:, 0]]
    rho_ex = _exclusion_radius(d1, h)

    foot_gap = np.linalg.norm(boundary.points[idx] - feet[:, None, :], axis=2)
    outside = foot_gap > rho_ex[:, None]
    second = np.where(outside, dist, np.inf).min(axis=1)

    # rows whose k nearest all fall inside the patch may still have a
    # competitor just beyond: re-query by range when the knn window is blind
    blind = ~np.isfinite(second) & (dist[:, -1] <= d1 + 2.0 * h + 1e-12)
    if k < n:
        for row in np.flatnonzero(blind):
            cand = kd.query_ball_point(pts[row], float(d1[row] + 2.0 * h) * (1 + 1e-12))
            cand = np.asarray(sorted(cand), dtype=int)
            gaps = np.linalg.norm(boundary.points[cand] - feet[row], axis=1)
            far = cand[gaps > rho_ex[row]]
            if far.size:
                second[row] = float(
                    np.min(np.linalg.norm(boundary.points[far] - pts[row], axis=1))
                )
    second_gap = second - d1
    ambiguous = second_gap <= 2.0 * h
    return idx[:, 0].copy(), feet.copy(), d1.copy(), second_gap, ambiguous


def project(boundary: Boundary, point, tol: Tolerances = DEFAULT_TOL) -> ProjectionResult:
    """Nearest-sample projection of one point."""
    idx, feet, d1, gap, amb = project_many(boundary, np.asarray(point, dtype=float)[None, :], tol)
    return ProjectionResult(int(idx[0]), feet[0], float(d1[0]), float(gap[0]), bool(amb[0]))


def height(boundary: Boundary, point, strict: bool = False) -> float:
    """Signed offset ``<x - foot, eta(foot)>`` of a point over its foot.

    On the fiber ``foot + t * eta(foot)`` this evaluates to ``t * r^2``.
    With ``strict``, an ambiguous projection raises instead of answering.
    """
    res = project(boundary, point)
    if strict and res.ambiguous:
        raise AmbiguousProjectionError(
            f"point {np.asarray(point).tolist()} projects ambiguously "
            f"(second-best gap {res.second_gap:.3g})"
        )
    x = np.asarray(point, dtype=float)
    return float((x - res.foot) @ boundary.scaled_normals[res.index])


def signed_height_field(boundary: Boundary, points) -> np.ndarray:
    """Vectorized :func:`height` over many points (no ambiguity check)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    idx, feet, _, _, _ = project_many(boundary, pts)
    return np.einsum("ij,ij->i", pts - feet, boundary.scaled_normals[idx])


@dataclass
class DifferentialReport:
    derivative: float
    reference: float
    residual: float


def differential_check(
    boundary: Boundary, point, direction, h_fd: float = 1e-4
) -> DifferentialReport:
    """Central difference of the height field against ``<v, eta(foot)>``.

    The height field is differentiable across the tube with derivative
    ``<v, eta(foot(x)))>``; the residual is normalized by ``|v|`` and decays
    linearly with both the difference step and the sampling gap.
    """
    x = np.asarray(point, dtype=float)
    v = np.asarray(direction, dtype=float)
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        raise ValueError("direction must be nonzero")
    f_plus = signed_height_field(boundary, (x + h_fd * v)[None, :])[0]
    f_minus = signed_height_field(boundary, (x - h_fd * v)[None, :])[0]
    deriv = float((f_plus - f_minus) / (2.0 * h_fd))
    res = project(boundary, x)
    ref = float(v @ boundary.scaled_normals[res.index])
    return DifferentialReport(deriv, ref, abs(deriv - ref) / nv)


@dataclass
class QuadraticBoundReport:
    slack_min: float
    worst_index: int
    worst_offset: np.ndarray
    worst_location: np.ndarray
    stretch: float
    checked: int


def quadratic_bound_check(
    boundary: Boundary,
    s: float,
    indices=None,
    offsets=None,
    trials: int = 1000,
    rng: np.random.Generator | None = None,
) -> QuadraticBoundReport:
    """Quadratic growth of the height field around each sample.

    For a sample ``x`` with scaled normal ``eta`` and an offset ``v`` staying
    inside the ``s * r`` tube, the height at ``x + v`` differs from the
    linear term ``<v, eta>`` by at most ``(stretch / 2) |v|^2`` with
    ``stretch = 1 / sqrt(1 - 2 s)``.  Slack is that allowance minus the
    observed deviation; the report keeps the minimum and where it happened.

    Probes may be passed explicitly as ``indices`` and ``offsets``; by
    default ``trials`` random samples with offsets of norm below ``s * r``
    are drawn (seeded, so repeated calls agree).
    """
    c_s = projection_stretch(s)
    if (indices is None) != (offsets is None):
        raise ValueError("pass indices and offsets together, or neither")
    if indices is None:
        if rng is None:
            rng = np.random.default_rng(0)
        indices = rng.integers(0, boundary.n_points, size=trials)
        dirs = rng.normal(size=(trials, boundary.dim))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        mags = rng.uniform(0.0, s * boundary.r, size=trials)
        offsets = dirs * mags[:, None]
    idx = np.asarray(indices, dtype=int)
    vs = np.asarray(offsets, dtype=float)
    if vs.ndim != 2 or vs.shape[0] != idx.size:
        raise ValueError(f"offsets {vs.shape} do not match {idx.size} indices")
    base = boundary.points[idx]
    ys = base + vs
    f_vals = signed_height_field(boundary, ys)
    linear = np.einsum("ij,ij->i", vs, boundary.scaled_normals[idx])
    v2 = np.einsum("ij,ij->i", vs, vs)
    slack = 0.5 * c_s * v2 - np.abs(f_vals - linear)
    k = int(np.argmin(slack))
    return QuadraticBoundReport(
        float(slack[k]), int(idx[k]), vs[k].copy(), ys[k].copy(), c_s, int(idx.size)
    )


@dataclass
class TangentBallReport:
    index: int
    radius: float
    inner_ok: bool
    outer_ok: bool
    effective_radius: float
    worst_depth: float
    violating_sample: int | None = None


def local_tangent_ball_test(
    boundary: Boundary,
    index: int,
    radius: float | None = None,
    window: float | None = None,
    steps: int = 20,
) -> TangentBallReport:
    """Largest locally empty tangent-ball radius at one sample.

    Tests whether the two balls of a given radius tangent at the sample (one
    on each side of the normal) contain any nearby sample strictly inside,
    with strictness margin ``h^2 / radius``.  When the requested radius
    fails, bisects ``steps`` times for the largest passing radius.
    """
    r = boundary.r if radius is None else float(radius)
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    h = boundary.resolution_h
    if window is None:
        window = min(4.0 * math.sqrt(r * h) + 2.0 * h, 2.0 * r)
    x = boundary.points[index]
    n_hat = boundary.normals[index]
    cand = boundary.kdtree().query_ball_point(x, window)
    cand = np.asarray(sorted(c for c in cand if c != index), dtype=int)
    if cand.size == 0:
        return TangentBallReport(int(index), r, True, True, r, 0.0)
    q = boundary.points[cand]

    def side_depth(rho: float, sign: float) -> tuple[float, int]:
        center = x + sign * rho * n_hat
        d = np.linalg.norm(q - center, axis=1)
        k = int(np.argmax(rho - d))
        return float(rho - d[k]), int(cand[k])

    def passes(rho: float) -> tuple[bool, bool, float, int]:
        eps_tan = h * h / rho
        din, kin = side_depth(rho, -1.0)
        dout, kout = side_depth(rho, +1.0)
        worst, who = (din, kin) if din >= dout else (dout, kout)
        return din <= eps_tan, dout <= eps_tan, worst, who

    inner_ok, outer_ok, worst, who = passes(r)
    if inner_ok and outer_ok:
        return TangentBallReport(int(index), r, True, True, r, worst, None)
    lo, hi = 0.0, r
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        okin, okout, _, _ = passes(mid) if mid > 0 else (True, True, 0.0, -1)
        if okin and okout:
            lo = mid
        else:
            hi = mid
    return TangentBallReport(int(index), r, inner_ok, outer_ok, lo, worst, who)


@dataclass
class StretchProbeReport:
    max_ratio: float
    bound: float
    ok: bool
    worst: tuple[int, int]
    checked: int


def projection_lipschitz_probe(
    boundary: Boundary,
    s: float,
    n_pairs: int = 1000,
    rng: np.random.Generator | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> StretchProbeReport:
    """Observed projection stretch between random points of the ``s * r`` tube.

    Draws pairs of fiber points ``p + t * eta(p)`` with ``|t| < s`` and
    compares the distance of their feet against the distance of the points;
    the ratio stays below ``1 / sqrt(1 - 2 s)`` plus a discretization
    allowance on a boundary regular at scale ``r``.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    n = boundary.n_points
    a = rng.integers(0, n, size=n_pairs)
    b = rng.integers(0, n, size=n_pairs)
    ta = rng.uniform(-s, s, size=n_pairs)
    tb = rng.uniform(-s, s, size=n_pairs)
    eta = boundary.scaled_normals
    xs = boundary.points[a] + ta[:, None] * eta[a]
    ys = boundary.points[b] + tb[:, None] * eta[b]
    sep = np.linalg.norm(xs - ys, axis=1)
    live = sep > 1e-12 * boundary.r
    idx_x, feet_x, _, _, _ = project_many(boundary, xs[live])
    idx_y, feet_y, _, _, _ = project_many(boundary, ys[live])
    ratios = np.linalg.norm(feet_x - feet_y, axis=1) / sep[live]
    k = int(np.argmax(ratios))
    bound = projection_stretch(s) + tol.eps_geo(boundary.resolution_h, boundary.r)
    return StretchProbeReport(
        float(ratios[k]),
        bound,
        bool(ratios[k] <= bound),
        (int(np.flatnonzero(live)[k]), int(idx_x[k])),
        int(np.count_nonzero(live)),
    )
