"""Measurements on an equal-norm normal field attached to boundary samples.

Everything here is scale-aware: slopes are measured on unit normals and
multiplied by the candidate radius afterwards, so the expensive pair scans
can be cached on the boundary and reused across radii.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._scan import block_ranges, map_blocks
from .boundary import Boundary
from .errors import InconsistentShapeError, OffSurfaceError, SingularGradientError
from .geodesics import distance_matrix, distances_from
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "normals_from_implicit",
    "FieldSlopeReport",
    "estimate_lipschitz",
    "DefectScale",
    "DefectReport",
    "normality_defect",
    "SeparationCheck",
    "EqualNormReport",
    "equal_norm_field_checks",
]

_BLOCK = 256
_EXACT_PAIRS_MAX = 6000
_FAR_PAIR_BUDGET = 1_000_000


def _block_for(n: int) -> int:
    # keep each (block, n, d) scratch array around 100 MB or less
    return max(8, min(_BLOCK, 4_000_000 // max(n, 1)))


def normals_from_implicit(points, f, grad, surface_tol: float | None = None):
    """Unit outward normals at on-surface points of an implicit region ``f < 0``.

    ``f`` and ``grad`` must accept an (N, d) array and return (N,) values and
    (N, d) gradients.  Points where ``|f|`` exceeds ``surface_tol`` (default:
    1e-8 of the bounding-box diagonal) raise :class:`OffSurfaceError`;
    vanishing gradients raise :class:`SingularGradientError`.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError(f"need an (N, d) point array, got shape {pts.shape}")
    span = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    scale = max(span, 1.0)
    if surface_tol is None:
        surface_tol = 1e-8 * scale
    vals = np.asarray(f(pts), dtype=float).reshape(-1)
    k = int(np.argmax(np.abs(vals)))
    if abs(vals[k]) > surface_tol:
        raise OffSurfaceError(
            f"sample {k} at {pts[k].tolist()} has |f| = {abs(vals[k]):.3g} "
            f"> tolerance {surface_tol:.3g}"
        )
    g = np.asarray(grad(pts), dtype=float)
    if g.shape != pts.shape:
        raise ValueError(f"gradient shape {g.shape} does not match points {pts.shape}")
    norms = np.linalg.norm(g, axis=1)
    k = int(np.argmin(norms))
    if norms[k] <= 1e-12 * scale:
        raise SingularGradientError(
            f"gradient vanishes at sample {k} ({pts[k].tolist()}): |grad| = {norms[k]:.3g}"
        )
    return g / norms[:, None]


# ---------------------------------------------------------------------------
# Lipschitz slope of the unit normal field
# ---------------------------------------------------------------------------


@dataclass
class FieldSlopeReport:
    """Largest measured slope of the scaled field between admissible pairs.

    ``lip_estimate = r * slope_max`` where the slope compares unit normals
    against Euclidean gaps.  Measured slopes never exceed the true Lipschitz
    constant on exact data, so an estimate above one refutes, while
    certification must leave discretization headroom.
    """

    lip_estimate: float
    slope_max: float
    worst_pair: tuple[int, int]
    adjacent_slope_max: float
    checked_pairs: int
    excluded_pairs: int


def _slope_scan(boundary: Boundary, exclude_far: bool, threads: int) -> dict:
    key = ("slope_scan", bool(exclude_far))
    cached = boundary._cache.get(key)
    if cached is not None:
        return cached
    pts = boundary.points
    nrm = boundary.normals
    n = boundary.n_points
    h = boundary.resolution_h
    delta_min = 0.5 * h

    edges = boundary.edges
    gaps = np.linalg.norm(pts[edges[:, 0]] - pts[edges[:, 1]], axis=1)
    dn = np.linalg.norm(nrm[edges[:, 0]] - nrm[edges[:, 1]], axis=1)
    live = gaps > 0
    if not np.any(live):
        raise InconsistentShapeError("all adjacency edges have zero length")
    adj_slopes = dn[live] / gaps[live]
    k = int(np.argmax(adj_slopes))
    adj_max = float(adj_slopes[k])
    best = (adj_max, (int(edges[live][k, 0]), int(edges[live][k, 1])))
    checked = int(np.count_nonzero(live))
    excluded = 0

    if n <= _EXACT_PAIRS_MAX:
        dmat = distance_matrix(boundary) if exclude_far else None

        def scan(lo: int, hi: int):
            diff = pts[lo:hi, None, :] - pts[None, :, :]
            e = np.linalg.norm(diff, axis=2)
            dnb = np.linalg.norm(nrm[lo:hi, None, :] - nrm[None, :, :], axis=2)
            cols = np.arange(n)[None, :]
            mask = (cols > np.arange(lo, hi)[:, None]) & (e >= delta_min)
            cnt = int(np.count_nonzero(mask))
            exc = 0
            if exclude_far:
                far = dmat[lo:hi] >= 0.5 * math.pi * e
                exc = int(np.count_nonzero(mask & far))
                mask &= ~far
            slopes = np.where(mask, dnb / np.where(e > 0, e, 1.0), -1.0)
            k = int(np.argmax(slopes))
            i, j = lo + k // n, k % n
            return float(slopes.flat[k]), (i, j), cnt, exc

        results = map_blocks(scan, block_ranges(n, _block_for(n)), threads)
        for s, pair, cnt, exc in results:
            checked += cnt - exc
            excluded += exc
            if s > best[0]:
                best = (s, pair)
    else:
        # large inputs: exact scan near each sample, seeded subsample far away
        near = boundary.kdtree().query_pairs(4.0 * boundary.r, output_type="ndarray")
        rng = np.random.default_rng(0)
        far = rng.integers(0, n, size=(_FAR_PAIR_BUDGET, 2))
        far = far[far[:, 0] < far[:, 1]]
        pairs = np.vstack([near, far])
        e = np.linalg.norm(pts[pairs[:, 0]] - pts[pairs[:, 1]], axis=1)
        keep = e >= delta_min
        pairs, e = pairs[keep], e[keep]
        slopes = np.linalg.norm(nrm[pairs[:, 0]] - nrm[pairs[:, 1]], axis=1) / e
        checked += int(pairs.shape[0])
        if exclude_far:
            # only pairs that could beat the adjacent maximum need distances
            sus = np.flatnonzero(slopes > best[0] * (1.0 - 1e-12))
            if sus.size:
                order = np.argsort(pairs[sus, 0], kind="stable")
                sus = sus[order]
                rows = distances_from(boundary, np.unique(pairs[sus, 0]))
                lookup = {int(s): t for t, s in enumerate(np.unique(pairs[sus, 0]))}
                for idx in sus:
                    a, b = int(pairs[idx, 0]), int(pairs[idx, 1])
                    if rows[lookup[a], b] >= 0.5 * math.pi * e[idx]:
                        slopes[idx] = -1.0
                        excluded += 1
                        checked -= 1
        k = int(np.argmax(slopes))
        if slopes[k] > best[0]:
            best = (float(slopes[k]), (int(pairs[k, 0]), int(pairs[k, 1])))

    if checked == 0:
        raise InconsistentShapeError(
            f"no admissible pairs at least {delta_min:.3g} apart; sampling degenerate"
        )
    out = {
        "slope_max": best[0],
        "worst_pair": best[1],
        "adjacent_slope_max": adj_max,
        "checked_pairs": checked,
        "excluded_pairs": excluded,
    }
    boundary._cache[key] = out
    return out


def estimate_lipschitz(
    boundary: Boundary,
    exclude_far_pairs: bool = True,
    threads: int = 1,
) -> FieldSlopeReport:
    """Measured Lipschitz constant of the scaled normal field.

    Adjacent pairs (declared edges, exact gaps) are always scanned; global
    pairs closer than half a sampling gap are skipped as noise-dominated.
    With ``exclude_far_pairs`` (default), pairs whose in-boundary distance
    already reaches ``(pi/2)`` times their Euclidean gap are left out: those
    pairs face each other across a gap rather than along the surface, and the
    distance condition is the check responsible for them.
    """
    scan = _slope_scan(boundary, exclude_far_pairs, threads)
    return FieldSlopeReport(
        lip_estimate=boundary.r * scan["slope_max"],
        slope_max=scan["slope_max"],
        worst_pair=scan["worst_pair"],
        adjacent_slope_max=scan["adjacent_slope_max"],
        checked_pairs=scan["checked_pairs"],
        excluded_pairs=scan["excluded_pairs"],
    )


# ---------------------------------------------------------------------------
# Normality defect
# ---------------------------------------------------------------------------


@dataclass
class DefectScale:
    scale: float
    max_defect: float
    worst_pair: tuple[int, int]
    pairs: int


@dataclass
class DefectReport:
    scales: list[DefectScale]

    @property
    def finest(self) -> DefectScale:
        return self.scales[-1]


def normality_defect(boundary: Boundary, scale: float | None = None) -> DefectReport:
    """Tangency defect of the field at up to three dyadic scales.

    The defect at ``x`` over scale ``s`` is the largest
    ``|<eta(x), y - x>| / (r |y - x|)`` across samples ``y`` within ``s``;
    on a smooth boundary it decays linearly with the scale.  Scales run
    ``s, s/2, s/4`` (default ``s = 4 h``), keeping those that still admit
    sample pairs.
    """
    h = boundary.resolution_h
    if scale is None:
        scale = 4.0 * h
    if scale < h:
        raise ValueError(f"scale {scale:.3g} below the sampling resolution {h:.3g}")
    cache_key = ("defect", float(scale))
    cached = boundary._cache.get(cache_key)
    if cached is None:
        pts = boundary.points
        nrm = boundary.normals
        out = []
        for s_k in (scale, 0.5 * scale, 0.25 * scale):
            pairs = boundary.kdtree().query_pairs(
                s_k * (1.0 + 1e-9), output_type="ndarray"
            )
            if pairs.size == 0:
                continue
            u = pts[pairs[:, 1]] - pts[pairs[:, 0]]
            gap = np.linalg.norm(u, axis=1)
            live = gap > 0
            pairs, u, gap = pairs[live], u[live], gap[live]
            if pairs.size == 0:
                continue
            d_i = np.abs(np.einsum("ij,ij->i", nrm[pairs[:, 0]], u)) / gap
            d_j = np.abs(np.einsum("ij,ij->i", nrm[pairs[:, 1]], u)) / gap
            defect = np.maximum(d_i, d_j)
            k = int(np.argmax(defect))
            out.append(
                DefectScale(
                    float(s_k),
                    float(defect[k]),
                    (int(pairs[k, 0]), int(pairs[k, 1])),
                    int(pairs.shape[0]),
                )
            )
        if not out:
            raise InconsistentShapeError(
                f"no sample pairs within scale {scale:.3g}; sampling degenerate"
            )
        boundary._cache[cache_key] = out
    return DefectReport(boundary._cache[cache_key])


# ---------------------------------------------------------------------------
# Equal-norm field identities
# ---------------------------------------------------------------------------


@dataclass
class SeparationCheck:
    t: float
    min_ratio: float
    bound: float
    ok: bool
    worst_pair: tuple[int, int]


@dataclass
class EqualNormReport:
    half_square_max: float
    half_square_ok: bool
    worst_pair: tuple[int, int]
    separation: list[SeparationCheck]

    @property
    def all_ok(self) -> bool:
        return self.half_square_ok and all(c.ok for c in self.separation)


def equal_norm_field_checks(
    boundary: Boundary,
    ts: tuple[float, ...] = (0.1, 0.25, 0.4),
    tol: Tolerances = DEFAULT_TOL,
    threads: int = 1,
) -> EqualNormReport:
    """Pairwise identities satisfied by an admissible equal-norm field.

    Checks that ``|<eta(x) - eta(y), x - y>|`` stays within one squared gap
    (the polarization form of a unit Lipschitz bound), and that offsetting
    every sample by ``t * eta`` for ``t`` in ``+/- ts`` contracts no pair
    below ``sqrt(1 - 2 |t|)`` of its gap.  Both fail on data that is not
    regular at scale ``r``; neither raises.
    """
    for t in ts:
        if not 0.0 < t < 0.5:
            raise ValueError(f"offset fractions must lie in (0, 0.5), got {t}")
    pts = boundary.points
    eta = boundary.scaled_normals
    n = boundary.n_points
    r = boundary.r
    h = boundary.resolution_h
    signed = [s * t for t in ts for s in (1.0, -1.0)]
    eps = tol.eps_geo(h, r)

    def scan(lo: int, hi: int):
        diff = pts[lo:hi, None, :] - pts[None, :, :]
        e2 = np.einsum("ijk,ijk->ij", diff, diff)
        cols = np.arange(n)[None, :]
        mask = (cols > np.arange(lo, hi)[:, None]) & (e2 > 0)
        de = eta[lo:hi, None, :] - eta[None, :, :]
        inner = np.einsum("ijk,ijk->ij", de, diff)
        half = np.where(mask, np.abs(inner) / np.where(e2 > 0, e2, 1.0), -1.0)
        k = int(np.argmax(half))
        out_half = (float(half.flat[k]), (lo + k // n, k % n))
        e = np.sqrt(e2)
        out_sep = []
        for t in signed:
            off = diff + t * de
            ratio = np.sqrt(np.einsum("ijk,ijk->ij", off, off)) / np.where(e > 0, e, 1.0)
            ratio = np.where(mask, ratio, np.inf)
            k = int(np.argmin(ratio))
            out_sep.append((float(ratio.flat[k]), (lo + k // n, k % n)))
        return out_half, out_sep

    results = map_blocks(scan, block_ranges(n, _block_for(n)), threads)
    half_max, half_pair = max((res[0] for res in results), key=lambda x: x[0])
    separation = []
    for col, t in enumerate(signed):
        ratio, pair = min((res[1][col] for res in results), key=lambda x: x[0])
        bound = math.sqrt(1.0 - 2.0 * abs(t))
        separation.append(
            SeparationCheck(t, ratio, bound, ratio >= bound * (1.0 - tol.rel), pair)
        )
    return EqualNormReport(
        half_square_max=half_max,
        half_square_ok=half_max <= 1.0 + eps,
        worst_pair=half_pair,
        separation=separation,
    )
