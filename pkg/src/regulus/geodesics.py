"""In-boundary metric: sample graph, shortest paths, geodesics, chord doubling.

The boundary's intrinsic metric is approximated by shortest paths on the
proximity graph over the samples (all pairs closer than a step cap, plus the
declared adjacency edges).  Chord lengths never exceed arc lengths, so every
graph distance is a lower bound for the true in-boundary distance; the
relative deficit is quadratic in the step cap over the local curvature
radius.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import dijkstra

from .boundary import Boundary
from .errors import MidpointSearchError
from .geometry import arc_length_from_chord, chord_sagitta, half_arc_chord
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "build_graph",
    "distance_matrix",
    "distances_from",
    "PairDistance",
    "intrinsic_distance",
    "GeodesicPath",
    "geodesic",
    "TurnRateCertificate",
    "turn_rate_certificate",
    "chord_double",
    "ArcBoundReport",
    "arc_bound_check",
]

_FULL_MATRIX_MAX = 6000


def default_step_cap(boundary: Boundary) -> float:
    """Connection radius for the sample graph: three sampling gaps."""
    return 3.0 * boundary.resolution_h


def build_graph(boundary: Boundary, step_cap: float | None = None) -> csr_matrix:
    """Symmetric weighted graph over samples within ``step_cap``.

    Declared adjacency edges are always present, whatever their length, so a
    closed polyline stays connected even where sampling is locally sparse.
    """
    if step_cap is None:
        step_cap = default_step_cap(boundary)
    key = ("graph", float(step_cap))
    cached = boundary._cache.get(key)
    if cached is not None:
        return cached
    n = boundary.n_points
    pts = boundary.points
    pairs = boundary.kdtree().query_pairs(step_cap, output_type="ndarray")
    if boundary.edges.size:
        pairs = np.unique(np.vstack([pairs, boundary.edges]), axis=0)
    if pairs.size == 0:
        raise ValueError("sample graph has no edges; step cap too small")
    w = np.linalg.norm(pts[pairs[:, 0]] - pts[pairs[:, 1]], axis=1)
    graph = coo_matrix(
        (np.concatenate([w, w]),
         (np.concatenate([pairs[:, 0], pairs[:, 1]]),
          np.concatenate([pairs[:, 1], pairs[:, 0]]))),
        shape=(n, n),
    ).tocsr()
    boundary._cache[key] = graph
    return graph


def distance_matrix(boundary: Boundary, step_cap: float | None = None) -> np.ndarray:
    """All-pairs graph distances, cached on the boundary.

    Only available up to a few thousand samples; beyond that use
    :func:`distances_from` for the rows you need.
    """
    if step_cap is None:
        step_cap = default_step_cap(boundary)
    key = ("dmat", float(step_cap))
    cached = boundary._cache.get(key)
    if cached is not None:
        return cached
    if boundary.n_points > _FULL_MATRIX_MAX:
        raise ValueError(
            f"all-pairs matrix limited to {_FULL_MATRIX_MAX} samples, "
            f"got {boundary.n_points}; use distances_from"
        )
    dmat = dijkstra(build_graph(boundary, step_cap), directed=False)
    boundary._cache[key] = dmat
    return dmat


def distances_from(
    boundary: Boundary, sources: np.ndarray, step_cap: float | None = None
) -> np.ndarray:
    """Graph distances from the given source samples to all samples."""
    if step_cap is None:
        step_cap = default_step_cap(boundary)
    sources = np.asarray(sources, dtype=int)
    full = boundary._cache.get(("dmat", float(step_cap)))
    if full is not None:
        return full[sources]
    if boundary.n_points <= _FULL_MATRIX_MAX:
        return distance_matrix(boundary, step_cap)[sources]
    key = ("drow", float(step_cap))
    rows = boundary._cache.setdefault(key, {})
    missing = [int(s) for s in sources if int(s) not in rows]
    if missing:
        got = dijkstra(build_graph(boundary, step_cap), directed=False, indices=missing)
        for s, row in zip(missing, np.atleast_2d(got)):
            rows[s] = row
    return np.stack([rows[int(s)] for s in sources])


@dataclass
class PairDistance:
    """Euclidean vs in-boundary distance for one sample pair.

    ``intrinsic`` is a lower-bound estimate: graph paths are chains of chords,
    each at most its arc.  ``error_budget`` is a conservative allowance for
    the deficit, linear in the step cap relative to the scaling radius.
    """

    i: int
    j: int
    euclidean: float
    intrinsic: float
    ratio: float
    error_budget: float


def intrinsic_distance(
    boundary: Boundary, i: int, j: int, step_cap: float | None = None
) -> PairDistance:
    """In-boundary distance between samples ``i`` and ``j``.

    Unreachable pairs (separate components) report an infinite distance.
    """
    if step_cap is None:
        step_cap = default_step_cap(boundary)
    n = boundary.n_points
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"sample indices ({i}, {j}) outside [0, {n})")
    euc = float(np.linalg.norm(boundary.points[i] - boundary.points[j]))
    intr = float(distances_from(boundary, np.array([i]), step_cap)[0, j])
    ratio = intr / euc if euc > 0 else (math.inf if intr > 0 else 1.0)
    budget = step_cap * intr / boundary.r if math.isfinite(intr) else math.inf
    return PairDistance(int(i), int(j), euc, intr, ratio, budget)


# ---------------------------------------------------------------------------
# Geodesic extraction
# ---------------------------------------------------------------------------


@dataclass
class GeodesicPath:
    """Polygonal in-boundary path, resampled to constant speed.

    ``length`` is the polygon length before resampling (the lower-bound
    estimate); ``vertices`` are the constant-speed samples, which lie on
    boundary samples or on interpolated edge points.
    """

    vertices: np.ndarray
    length: float
    max_turn_rate: float
    speed_profile: np.ndarray
    converged: bool
    sweeps: int


def _shortest_vertex_path(graph: csr_matrix, i: int, j: int) -> list[int]:
    _, pred = dijkstra(
        graph, directed=False, indices=[i], return_predecessors=True
    )
    pred = pred[0]
    if pred[j] < 0 and i != j:
        raise ValueError(f"samples {i} and {j} are not connected in the graph")
    path = [int(j)]
    while path[-1] != i:
        path.append(int(pred[path[-1]]))
    return path[::-1]


def _incident_edges(boundary: Boundary) -> list[np.ndarray]:
    cached = boundary._cache.get(("incident",))
    if cached is not None:
        return cached
    buckets: list[list[int]] = [[] for _ in range(boundary.n_points)]
    for e, (a, b) in enumerate(boundary.edges):
        buckets[a].append(e)
        buckets[b].append(e)
    out = [np.array(b, dtype=int) for b in buckets]
    boundary._cache[("incident",)] = out
    return out


def _slide_on_segment(a, b, p, q, iters: int = 60):
    """Minimize |a - x| + |b - x| over x on segment [p, q]; convex in t."""
    e = q - p
    lo, hi = 0.0, 1.0

    def val(t):
        x = p + t * e
        return float(np.linalg.norm(a - x) + np.linalg.norm(b - x))

    for _ in range(iters):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if val(m1) <= val(m2):
            hi = m2
        else:
            lo = m1
    t = 0.5 * (lo + hi)
    return t, val(t)


def _polygon_length(verts: np.ndarray) -> float:
    return float(np.sum(np.linalg.norm(np.diff(verts, axis=0), axis=1)))


def _kink_turn_rate(verts: np.ndarray) -> float:
    """Largest tangent-turn per unit length over the polygon's corners.

    The turn at a vertex is the exterior angle between its two segments,
    charged to the mean of their lengths — the discrete Lipschitz constant
    of the unit tangent.
    """
    d = np.diff(verts, axis=0)
    lens = np.linalg.norm(d, axis=1)
    if lens.size == 0:
        return 0.0
    # degenerate slivers carry no direction information
    keep = lens > 1e-9 * float(np.max(lens))
    d, lens = d[keep], lens[keep]
    if lens.size < 2:
        return 0.0
    a, b = d[:-1], d[1:]
    dots = np.einsum("ij,ij->i", a, b)
    if verts.shape[1] == 2:
        cross = np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
    else:
        cross = np.linalg.norm(np.cross(a, b), axis=-1)
    angles = np.arctan2(cross, dots)
    return float(np.max(angles / (0.5 * (lens[:-1] + lens[1:]))))


def _collapse_close(verts: np.ndarray, eps: float) -> np.ndarray:
    """Merge runs of consecutive vertices closer than ``eps``.

    Sliding can park two path vertices on a shared sample; the coincident
    copies would otherwise corrupt the corner angles.  Endpoints stay exact.
    """
    if verts.shape[0] <= 2:
        return verts
    kept = [verts[0]]
    for v in verts[1:]:
        if float(np.linalg.norm(v - kept[-1])) > eps:
            kept.append(v)
    if len(kept) == 1:
        kept.append(verts[-1])
    else:
        kept[-1] = verts[-1]
    return np.array(kept)


def _resample_uniform(verts: np.ndarray):
    seg = np.linalg.norm(np.diff(verts, axis=0), axis=1)
    total = float(np.sum(seg))
    if total <= 0.0 or verts.shape[0] < 3:
        return verts.copy(), np.ones(max(verts.shape[0] - 1, 1))
    # constant-speed output at the polygon's coarsest original spacing
    u = float(np.max(seg))
    m = max(int(round(total / u)) + 1, 3)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, total, m)
    out = np.stack([np.interp(targets, cum, verts[:, k]) for k in range(verts.shape[1])], axis=1)
    step = targets[1] - targets[0]
    dp = np.diff(out, axis=0)
    speed = np.linalg.norm(dp, axis=1) / step
    return out, speed


def geodesic(
    boundary: Boundary,
    i: int,
    j: int,
    step_cap: float | None = None,
    max_sweeps: int = 200,
    shrink_tol: float = 1e-10,
) -> GeodesicPath:
    """Shortest in-boundary path between samples ``i`` and ``j``.

    Starts from the graph shortest path, then repeatedly slides each interior
    vertex along the boundary edges incident to its originating sample, to
    the point minimizing the sum of the two adjacent segment lengths
    (alternating parities for determinism).  Confining each vertex to its own
    patch keeps the polygon against the boundary; free vertices would drift
    toward the straight chord, which is shorter but leaves the surface.
    Stops when a sweep shrinks the length by less than ``shrink_tol`` of
    itself, or after ``max_sweeps`` sweeps.
    """
    if step_cap is None:
        step_cap = default_step_cap(boundary)
    n = boundary.n_points
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"sample indices ({i}, {j}) outside [0, {n})")
    idx_path = _shortest_vertex_path(build_graph(boundary, step_cap), i, j)
    pts = boundary.points
    verts = pts[idx_path].astype(float)
    if len(idx_path) <= 2:
        out, speed = _resample_uniform(verts)
        return GeodesicPath(out, _polygon_length(verts), 0.0, speed, True, 0)

    incident = _incident_edges(boundary)
    edges = boundary.edges
    allowed = [incident[v] for v in idx_path]  # fixed patch per path vertex
    length = _polygon_length(verts)
    converged = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for parity in (1, 0):
            for k in range(1 + parity, len(verts) - 1, 2):
                a, b = verts[k - 1], verts[k + 1]
                best = (float(np.linalg.norm(a - verts[k]) + np.linalg.norm(b - verts[k])),
                        None, None)
                for e in allowed[k]:
                    p_i, q_i = edges[e]
                    t, v = _slide_on_segment(a, b, pts[p_i], pts[q_i])
                    if v < best[0] - 1e-15:
                        best = (v, e, t)
                if best[1] is not None:
                    p_i, q_i = edges[best[1]]
                    verts[k] = pts[p_i] + best[2] * (pts[q_i] - pts[p_i])
        new_length = _polygon_length(verts)
        if length - new_length < shrink_tol * max(length, 1e-300):
            converged = True
            length = new_length
            break
        length = new_length
    verts = _collapse_close(verts, 1e-9 * step_cap)
    length = _polygon_length(verts)
    rate = _kink_turn_rate(verts)
    out, speed = _resample_uniform(verts)
    return GeodesicPath(out, length, rate, speed, converged, sweeps)


@dataclass
class TurnRateCertificate:
    max_turn_rate: float
    bound: float
    within_bound: bool


def turn_rate_certificate(
    path: GeodesicPath,
    r: float,
    resolution_h: float,
    tol: Tolerances = DEFAULT_TOL,
) -> TurnRateCertificate:
    """Check the path's turn rate against ``(1 + eps_geo) / r``."""
    bound = (1.0 + tol.eps_geo(resolution_h, r)) / r
    return TurnRateCertificate(path.max_turn_rate, bound, path.max_turn_rate <= bound)


# ---------------------------------------------------------------------------
# Chord doubling
# ---------------------------------------------------------------------------


def chord_double(
    boundary: Boundary,
    i: int,
    j: int,
    depth: int,
    r: float | None = None,
    step_cap: float | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> GeodesicPath:
    """Recursive midpoint path between two samples, with per-split certificates.

    Each segment is split at a sample near the perpendicular bisector of its
    chord; the split is accepted only when the midpoint sits within the
    sagitta box and the two half-chords stay within the half-arc-chord bound,
    each with one step cap of slack.  Segments shorter than four step caps
    are at sampling resolution and are kept as leaves.  When a segment has
    mid-ball candidates but none is admissible, the segment has no
    in-boundary midpoint compatible with radius ``r`` and
    :class:`MidpointSearchError` reports it.
    """
    if r is None:
        r = boundary.r
    if step_cap is None:
        step_cap = default_step_cap(boundary)
    if depth < 0:
        raise ValueError(f"depth must be nonnegative, got {depth}")
    n = boundary.n_points
    if not (0 <= i < n and 0 <= j < n) or i == j:
        raise IndexError(f"need two distinct sample indices in [0, {n}), got ({i}, {j})")
    pts = boundary.points
    kd = boundary.kdtree()

    def split(a: int, b: int, d: int) -> list[int]:
        xa, xb = pts[a], pts[b]
        s = float(np.linalg.norm(xb - xa))
        if s >= 2.0 * r * (1.0 - tol.rel):
            raise ValueError(
                f"segment ({a}, {b}) has chord {s:.6g}, not strictly below "
                f"2r = {2 * r:.6g}; the construction only applies below that"
            )
        if d == 0 or s < 4.0 * step_cap:
            return [a, b]
        mid = 0.5 * (xa + xb)
        u = (xb - xa) / s
        cand = kd.query_ball_point(mid, 0.5 * s * (1.0 + 1e-12))
        cand = sorted(int(c) for c in cand if c != a and c != b)
        if not cand:
            # a boundary this far from sampling resolution must put samples
            # inside the mid-ball; an empty ball is a witness against r
            raise MidpointSearchError(
                f"segment ({a}, {b}), chord {s:.6g}: the ball of radius "
                f"{0.5 * s:.6g} at the chord midpoint contains no samples; "
                f"no in-boundary midpoint exists at radius {r:.6g}"
            )
        cpts = pts[cand]
        off = cpts - mid
        along = np.abs(off @ u)
        dist_mid = np.linalg.norm(off, axis=1)
        half1 = np.linalg.norm(cpts - xa, axis=1)
        half2 = np.linalg.norm(cpts - xb, axis=1)
        slack = step_cap * (1.0 + tol.rel)
        phi = chord_sagitta(min(s, 2.0 * r), r)
        psi = half_arc_chord(min(s, 2.0 * r), r)
        ok = (
            (along <= 0.5 * step_cap + tol.rel * s)
            & (dist_mid <= phi + slack)
            & (half1 <= psi + slack)
            & (half2 <= psi + slack)
        )
        if not np.any(ok):
            k = int(np.argmin(dist_mid))
            raise MidpointSearchError(
                f"segment ({a}, {b}), chord {s:.6g}: no admissible midpoint at "
                f"radius {r:.6g}; nearest candidate off by {dist_mid[k]:.6g} "
                f"(sagitta bound {phi:.6g} + {slack:.3g})"
            )
        sel = np.flatnonzero(ok)
        z = int(cand[sel[int(np.argmin(dist_mid[sel]))]])
        left = split(a, z, d - 1)
        return left[:-1] + split(z, b, d - 1)

    chain = split(int(i), int(j), int(depth))
    verts = pts[chain].astype(float)
    rate = _kink_turn_rate(verts)
    out, speed = _resample_uniform(verts)
    return GeodesicPath(out, _polygon_length(verts), rate, speed, True, 0)


# ---------------------------------------------------------------------------
# Circular-arc upper bound on intrinsic distances
# ---------------------------------------------------------------------------


@dataclass
class ArcBoundReport:
    """Slack of graph distances under the circular-arc chord bound."""

    slack_min: float
    worst_pair: tuple[int, int]
    intrinsic_max: float
    length_tol: float
    ok: bool
    checked_pairs: int


def arc_bound_check(
    boundary: Boundary,
    r: float,
    pairs: np.ndarray,
    step_cap: float | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> ArcBoundReport:
    """Compare in-boundary distances against the arc subtending each chord.

    For every given pair with Euclidean gap below ``2 r``, the in-boundary
    distance of a boundary regular at scale ``r`` is at most the arc length a
    circle of radius ``r`` spends on the same chord, and never more than
    ``pi * r``.  Slack is that arc minus the graph distance; the report
    carries the minimum slack and the largest graph distance seen, with one
    ``eps_geo * r`` of length tolerance.
    """
    if step_cap is None:
        step_cap = default_step_cap(boundary)
    pairs = np.asarray(pairs, dtype=int)
    if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] == 0:
        raise ValueError(f"need a nonempty (M, 2) pair array, got {pairs.shape}")
    euc = np.linalg.norm(boundary.points[pairs[:, 0]] - boundary.points[pairs[:, 1]], axis=1)
    if np.any(euc >= 2.0 * r):
        k = int(np.argmax(euc))
        raise ValueError(
            f"pair {tuple(pairs[k])} has euclidean gap {euc[k]:.6g} >= 2r = {2 * r:.6g}"
        )
    sources = np.unique(pairs[:, 0])
    rows = distances_from(boundary, sources, step_cap)
    lookup = {int(s): k for k, s in enumerate(sources)}
    intr = np.array([rows[lookup[int(a)], int(b)] for a, b in pairs])
    arcs = np.array([arc_length_from_chord(float(e), r) for e in euc])
    slack = arcs - intr
    k = int(np.argmin(slack))
    length_tol = tol.eps_geo(boundary.resolution_h, r) * r
    ok = bool(
        slack[k] >= -length_tol and float(np.max(intr)) < math.pi * r + length_tol
    )
    return ArcBoundReport(
        float(slack[k]),
        (int(pairs[k, 0]), int(pairs[k, 1])),
        float(np.max(intr)),
        length_tol,
        ok,
        int(pairs.shape[0]),
    )
