"""Builtin sampled boundaries with known ground truth.

Every generator returns a :class:`~regulus.boundary.Boundary` plus a
:class:`ShapeInfo` carrying the exact largest admissible radius (``reach``)
implied by the construction.  Shapes are assembled from exact circular-arc
and straight-segment pieces and sampled uniformly by arclength, so sample
points and normals carry no discretization error beyond rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import Boundary
from .errors import InconsistentShapeError, NoContourError
from .normal_field import normals_from_implicit

__all__ = [
    "ShapeInfo",
    "ShapeSpec",
    "circle",
    "ellipse",
    "annulus",
    "rounded_rectangle",
    "dumbbell",
    "figure_eight",
    "dumbbell_field",
    "extract_level_set",
    "generate",
    "available_shapes",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ShapeInfo:
    """Ground truth attached to a generated boundary."""

    name: str
    params: dict
    reach: float | None
    perimeter: float | None


# ---------------------------------------------------------------------------
# Exact pieces
# ---------------------------------------------------------------------------


class _Arc:
    """Circular arc from angle ``phi0`` to ``phi1`` (either direction).

    ``normal_sign=+1`` points the normal away from the center (convex side
    outward), ``-1`` toward it (concave piece of the boundary).
    """

    def __init__(self, center, radius, phi0, phi1, normal_sign=1.0):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.phi0 = float(phi0)
        self.phi1 = float(phi1)
        self.sign = float(normal_sign)
        self.length = self.radius * abs(self.phi1 - self.phi0)

    def _phi(self, u):
        direction = 1.0 if self.phi1 >= self.phi0 else -1.0
        return self.phi0 + direction * np.asarray(u) / self.radius

    def sample(self, u):
        phi = self._phi(u)
        ray = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        return self.center + self.radius * ray, self.sign * ray

    def distance(self, pts):
        v = pts - self.center
        rr = np.linalg.norm(v, axis=1)
        ang = np.arctan2(v[:, 1], v[:, 0])
        lo, hi = min(self.phi0, self.phi1), max(self.phi0, self.phi1)
        span = hi - lo
        rel = np.mod(ang - lo, _TWO_PI)
        on_arc = rel <= span
        # off-arc points clamp to whichever endpoint is angularly nearer
        near_hi = (rel - span) <= (_TWO_PI - rel)
        phi_c = np.where(on_arc, ang, np.where(near_hi, hi, lo))
        ray = np.stack([np.cos(phi_c), np.sin(phi_c)], axis=-1)
        foot = self.center + self.radius * ray
        d = np.linalg.norm(pts - foot, axis=1)
        return d, self.sign * ray


class _Seg:
    """Straight segment with a fixed outward normal."""

    def __init__(self, p0, p1, normal):
        self.p0 = np.asarray(p0, dtype=float)
        self.p1 = np.asarray(p1, dtype=float)
        self.normal = np.asarray(normal, dtype=float)
        self.length = float(np.linalg.norm(self.p1 - self.p0))
        self.direction = (self.p1 - self.p0) / self.length

    def sample(self, u):
        u = np.asarray(u)
        pts = self.p0 + u[..., None] * self.direction
        nrm = np.broadcast_to(self.normal, pts.shape).copy()
        return pts, nrm

    def distance(self, pts):
        t = np.clip((pts - self.p0) @ self.direction, 0.0, self.length)
        foot = self.p0 + t[:, None] * self.direction
        d = np.linalg.norm(pts - foot, axis=1)
        nrm = np.broadcast_to(self.normal, pts.shape).copy()
        return d, nrm


def _sample_pieces(pieces, n):
    lengths = np.array([p.length for p in pieces])
    total = float(lengths.sum())
    s = np.arange(n) * (total / n)
    ends = np.cumsum(lengths)
    idx = np.minimum(np.searchsorted(ends, s, side="right"), len(pieces) - 1)
    starts = ends - lengths
    pts = np.empty((n, 2))
    nrm = np.empty((n, 2))
    for k, piece in enumerate(pieces):
        sel = idx == k
        if sel.any():
            pts[sel], nrm[sel] = piece.sample(s[sel] - starts[k])
    return pts, nrm, total


def _loop_edges(counts):
    rows = []
    offset = 0
    for c in counts:
        i = np.arange(c)
        rows.append(np.stack([i + offset, (i + 1) % c + offset], axis=1))
        offset += c
    return np.concatenate(rows, axis=0)


def _build(pieces_per_loop, n, reach, name, params):
    lengths = [sum(p.length for p in pieces) for pieces in pieces_per_loop]
    total = sum(lengths)
    counts = []
    for k, pieces in enumerate(pieces_per_loop):
        if k < len(pieces_per_loop) - 1:
            counts.append(max(8, round(n * lengths[k] / total)))
        else:
            counts.append(max(8, n - sum(counts)))
    pts, nrm = [], []
    for pieces, c in zip(pieces_per_loop, counts):
        p, m, _ = _sample_pieces(pieces, c)
        pts.append(p)
        nrm.append(m)
    boundary = Boundary(
        np.concatenate(pts), np.concatenate(nrm), _loop_edges(counts), reach
    )
    return boundary, ShapeInfo(name, params, reach, total)


# ---------------------------------------------------------------------------
# Builtins
# ---------------------------------------------------------------------------


def circle(n: int = 2000, radius: float = 1.0):
    """Circle of the given radius; the largest admissible radius equals it."""
    if radius <= 0:
        raise InconsistentShapeError(f"radius must be positive, got {radius}")
    pieces = [_Arc((0.0, 0.0), radius, 0.0, _TWO_PI)]
    return _build([pieces], n, radius, "circle", {"radius": radius})


def ellipse(n: int = 4000, a: float = 2.0, b: float = 1.0):
    """Axis-aligned ellipse, sampled uniformly by arclength.

    The largest admissible radius is the minimum radius of curvature,
    attained at the ends of the major axis.
    """
    if a <= 0 or b <= 0:
        raise InconsistentShapeError(f"semi-axes must be positive, got {a}, {b}")
    m = max(200 * n, 100_000)
    t = np.linspace(0.0, _TWO_PI, m + 1)
    speed = np.hypot(a * np.sin(t), b * np.cos(t))
    steps = 0.5 * (speed[1:] + speed[:-1]) * (t[1] - t[0])
    cum = np.concatenate([[0.0], np.cumsum(steps)])
    total = float(cum[-1])
    ts = np.interp(np.arange(n) * (total / n), cum, t)
    pts = np.stack([a * np.cos(ts), b * np.sin(ts)], axis=1)
    nrm = np.stack([b * np.cos(ts), a * np.sin(ts)], axis=1)
    nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
    reach = min(b * b / a, a * a / b)
    boundary = Boundary(pts, nrm, _loop_edges([n]), reach)
    return boundary, ShapeInfo("ellipse", {"a": a, "b": b}, reach, total)


def annulus(n: int = 1600, outer: float = 2.0, inner: float = 1.0):
    """Ring between two concentric circles; two boundary loops."""
    if not 0 < inner < outer:
        raise InconsistentShapeError(
            f"need 0 < inner < outer, got inner={inner}, outer={outer}"
        )
    loops = [
        [_Arc((0.0, 0.0), outer, 0.0, _TWO_PI, +1.0)],
        [_Arc((0.0, 0.0), inner, 0.0, _TWO_PI, -1.0)],
    ]
    reach = min(inner, 0.5 * (outer - inner))
    return _build(loops, n, reach, "annulus", {"outer": outer, "inner": inner})


def rounded_rectangle(
    n: int = 4000,
    width: float = 2.0,
    height: float = 1.0,
    corner_radius: float = 0.5,
):
    """Rectangle grown outward by the corner radius (straight sides keep the
    full width and height; corners are exact quarter circles)."""
    if min(width, height, corner_radius) <= 0:
        raise InconsistentShapeError(
            f"width, height, corner_radius must be positive, got "
            f"{width}, {height}, {corner_radius}"
        )
    w2, h2, rho = 0.5 * width, 0.5 * height, corner_radius
    pieces = [
        _Seg((w2 + rho, -h2), (w2 + rho, h2), (1.0, 0.0)),
        _Arc((w2, h2), rho, 0.0, 0.5 * math.pi),
        _Seg((w2, h2 + rho), (-w2, h2 + rho), (0.0, 1.0)),
        _Arc((-w2, h2), rho, 0.5 * math.pi, math.pi),
        _Seg((-w2 - rho, h2), (-w2 - rho, -h2), (-1.0, 0.0)),
        _Arc((-w2, -h2), rho, math.pi, 1.5 * math.pi),
        _Seg((-w2, -h2 - rho), (w2, -h2 - rho), (0.0, -1.0)),
        _Arc((w2, -h2), rho, 1.5 * math.pi, _TWO_PI),
    ]
    reach = min(rho, 0.5 * min(width, height) + rho)
    return _build(
        [pieces],
        n,
        reach,
        "rrect",
        {"width": width, "height": height, "corner_radius": corner_radius},
    )


def _dumbbell_geometry(disk_r, center_gap, neck_gap, fillet):
    if min(disk_r, center_gap, neck_gap, fillet) <= 0:
        raise InconsistentShapeError("all dumbbell parameters must be positive")
    c = 0.5 * center_gap
    g2 = 0.5 * neck_gap
    rho = fillet
    if g2 + rho >= disk_r + rho:
        raise InconsistentShapeError(
            f"neck gap {neck_gap} too wide for disks of radius {disk_r}"
        )
    reach_sq = (disk_r + rho) ** 2 - (g2 + rho) ** 2
    x_f = c - math.sqrt(reach_sq)
    if x_f <= 0:
        raise InconsistentShapeError(
            f"disks too close: fillets of radius {fillet} leave no neck "
            f"(center gap {center_gap})"
        )
    alpha = math.asin((g2 + rho) / (disk_r + rho))
    return c, g2, rho, x_f, alpha


def _dumbbell_pieces(disk_r, c, g2, rho, x_f, alpha):
    theta = math.pi - alpha
    h_pi = 0.5 * math.pi
    return [
        _Arc((c, 0.0), disk_r, -theta, theta),
        _Arc((x_f, g2 + rho), rho, -alpha, -h_pi, -1.0),
        _Seg((x_f, g2), (-x_f, g2), (0.0, 1.0)),
        _Arc((-x_f, g2 + rho), rho, -h_pi, alpha - math.pi, -1.0),
        _Arc((-c, 0.0), disk_r, alpha, _TWO_PI - alpha),
        _Arc((-x_f, -(g2 + rho)), rho, math.pi - alpha, h_pi, -1.0),
        _Seg((-x_f, -g2), (x_f, -g2), (0.0, -1.0)),
        _Arc((x_f, -(g2 + rho)), rho, h_pi, alpha, -1.0),
    ]


def dumbbell(
    n: int = 4000,
    disk_r: float = 2.0,
    center_gap: float = 10.0,
    neck_gap: float = 0.2,
    fillet: float = 0.5,
):
    """Two disks joined by a thin rectangular neck with filleted junctions.

    The largest admissible radius is pinched by the neck half-thickness
    (inner ball), the fillet radius (outer ball at the concave junctions),
    or the disk radius, whichever is smallest.
    """
    c, g2, rho, x_f, alpha = _dumbbell_geometry(disk_r, center_gap, neck_gap, fillet)
    pieces = _dumbbell_pieces(disk_r, c, g2, rho, x_f, alpha)
    reach = min(g2, rho, disk_r)
    params = {
        "disk_r": disk_r,
        "center_gap": center_gap,
        "neck_gap": neck_gap,
        "fillet": fillet,
    }
    return _build([pieces], n, reach, "dumbbell", params)


def figure_eight(n: int = 1000, scale: float = 2.0, r: float = 0.1):
    """Self-crossing lemniscate curve: no radius is admissible.

    Useful as a degenerate input; radius estimation on it fails outright.
    """
    if scale <= 0:
        raise InconsistentShapeError(f"scale must be positive, got {scale}")
    t = np.arange(n) * (_TWO_PI / n)
    s, co = np.sin(t), np.cos(t)
    den = 1.0 + s * s
    pts = np.stack([scale * co / den, scale * s * co / den], axis=1)
    dx = -scale * s * (3.0 - s * s) / den**2
    dy = scale * ((co * co - s * s) * den - 2.0 * s * s * co * co) / den**2
    nrm = np.stack([dy, -dx], axis=1)
    nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
    boundary = Boundary(pts, nrm, _loop_edges([n]), r)
    return boundary, ShapeInfo("figure-eight", {"scale": scale}, None, None)


# ---------------------------------------------------------------------------
# Implicit twin of the dumbbell
# ---------------------------------------------------------------------------


def dumbbell_field(
    disk_r: float = 2.0,
    center_gap: float = 10.0,
    neck_gap: float = 0.2,
    fillet: float = 0.5,
):
    """Exact signed-distance field of the dumbbell, negative inside.

    Returns ``(f, grad)`` callables over ``(m, 2)`` arrays, suitable for
    level-set extraction and for cross-validating the sampled generator.
    Distances are measured to the same arc and segment pieces the sampler
    uses, folded into the first quadrant by symmetry.
    """
    c, g2, rho, x_f, alpha = _dumbbell_geometry(disk_r, center_gap, neck_gap, fillet)
    theta = math.pi - alpha
    fc = np.array([x_f, g2 + rho])
    quadrant = [
        _Arc((c, 0.0), disk_r, 0.0, theta),
        _Arc(fc, rho, -alpha, -0.5 * math.pi, -1.0),
        _Seg((x_f, g2), (0.0, g2), (0.0, 1.0)),
    ]
    # pocket cone at the fillet center, between the two tangency directions
    u1 = np.array([0.0, -1.0])
    u2 = np.array([math.cos(-alpha), math.sin(-alpha)])

    def _fold(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.abs(pts)

    def _inside(q):
        in_disk = (q[:, 0] - c) ** 2 + q[:, 1] ** 2 <= disk_r**2
        in_slab = (q[:, 0] <= c) & (q[:, 1] <= g2)
        v = q - fc
        cone = (u1[0] * v[:, 1] - u1[1] * v[:, 0] >= 0) & (
            v[:, 0] * u2[1] - v[:, 1] * u2[0] >= 0
        )
        in_pocket = cone & (np.einsum("ij,ij->i", v, v) >= rho * rho)
        return in_disk | in_slab | in_pocket

    def _nearest(q):
        dists = []
        normals = []
        for piece in quadrant:
            d, m = piece.distance(q)
            dists.append(d)
            normals.append(m)
        dists = np.stack(dists, axis=0)
        best = np.argmin(dists, axis=0)
        rows = np.arange(q.shape[0])
        nrm = np.stack(normals, axis=0)[best, rows]
        return dists[best, rows], nrm

    def f(pts):
        q = _fold(pts)
        d, _ = _nearest(q)
        return np.where(_inside(q), -d, d)

    def grad(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        q = np.abs(pts)
        _, nrm = _nearest(q)
        return nrm * np.where(pts >= 0, 1.0, -1.0)

    return f, grad


# ---------------------------------------------------------------------------
# Level-set extraction (2D)
# ---------------------------------------------------------------------------

_SEGMENTS = {
    1: [("W", "S")],
    2: [("S", "E")],
    3: [("W", "E")],
    4: [("E", "N")],
    6: [("S", "N")],
    7: [("W", "N")],
    8: [("N", "W")],
    9: [("S", "N")],
    11: [("E", "N")],
    12: [("E", "W")],
    13: [("S", "E")],
    14: [("W", "S")],
}


def extract_level_set(
    f,
    grad,
    bbox,
    cells: int = 400,
    r: float = 1.0,
) -> Boundary:
    """Trace the zero level set of ``f`` over a rectangular grid.

    Crossings on grid edges are refined by bisection to ten decimal digits
    of a cell, linked into closed loops cell by cell, and oriented normals
    are taken from ``grad``.  ``bbox`` is ``(xmin, xmax, ymin, ymax)`` and
    must contain the contour strictly inside.
    """
    xmin, xmax, ymin, ymax = (float(v) for v in bbox)
    if not (xmax > xmin and ymax > ymin):
        raise ValueError(f"degenerate bounding box {bbox}")
    nx = int(cells)
    ny = max(4, round(nx * (ymax - ymin) / (xmax - xmin)))
    xs = np.linspace(xmin, xmax, nx + 1)
    ys = np.linspace(ymin, ymax, ny + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.stack([gx.ravel(), gy.ravel()], axis=1)
    vals = np.asarray(f(nodes), dtype=float).reshape(nx + 1, ny + 1)
    if not (vals < 0).any() or not (vals > 0).any():
        raise NoContourError("the field does not change sign on the grid")
    inside = vals < 0
    if inside[0, :].any() or inside[-1, :].any() or inside[:, 0].any() or inside[:, -1].any():
        raise NoContourError("the contour touches the grid boundary; enlarge the box")

    def _bisect(p0, p1, v0):
        lo, hi = p0.copy(), p1.copy()
        sign_lo = v0 < 0
        for _ in range(52):
            mid = 0.5 * (lo + hi)
            neg = np.asarray(f(mid)) < 0
            swap = neg == sign_lo
            lo[swap] = mid[swap]
            hi[~swap] = mid[~swap]
        return 0.5 * (lo + hi)

    crossings: dict[tuple, int] = {}

    # batch all crossed edges first (same inside test the cell table uses)
    cross_x = np.nonzero(inside[:-1, :] != inside[1:, :])
    cross_y = np.nonzero(inside[:, :-1] != inside[:, 1:])
    p0s, p1s, v0s, keys = [], [], [], []
    for i, j in zip(*cross_x):
        p0s.append([xs[i], ys[j]])
        p1s.append([xs[i + 1], ys[j]])
        v0s.append(vals[i, j])
        keys.append(("x", int(i), int(j)))
    for i, j in zip(*cross_y):
        p0s.append([xs[i], ys[j]])
        p1s.append([xs[i], ys[j + 1]])
        v0s.append(vals[i, j])
        keys.append(("y", int(i), int(j)))
    if not keys:
        raise NoContourError("no level crossings found on the grid")
    pts = _bisect(np.array(p0s), np.array(p1s), np.array(v0s))
    for k, key in enumerate(keys):
        crossings[key] = k
    pts_list = pts

    def _cell_edge(name, ix, iy):
        if name == "S":
            return ("x", ix, iy)
        if name == "N":
            return ("x", ix, iy + 1)
        if name == "W":
            return ("y", ix, iy)
        return ("y", ix + 1, iy)

    adjacency: dict[int, list[int]] = {}
    b = inside.astype(int)
    cell_cases = (
        b[:-1, :-1] | (b[1:, :-1] << 1) | (b[1:, 1:] << 2) | (b[:-1, 1:] << 3)
    )
    saddle = (cell_cases == 5) | (cell_cases == 10)
    if saddle.any():
        si, sj = np.nonzero(saddle)
        centers = np.stack(
            [0.5 * (xs[si] + xs[si + 1]), 0.5 * (ys[sj] + ys[sj + 1])], axis=1
        )
        center_inside = np.asarray(f(centers)) < 0
        saddle_map = {
            (int(i), int(j)): bool(v) for i, j, v in zip(si, sj, center_inside)
        }
    for ix, iy in zip(*np.nonzero((cell_cases > 0) & (cell_cases < 15))):
        case = int(cell_cases[ix, iy])
        if case == 5:
            segs = [("W", "N"), ("E", "S")] if saddle_map[(ix, iy)] else [
                ("W", "S"),
                ("E", "N"),
            ]
        elif case == 10:
            segs = [("W", "S"), ("E", "N")] if saddle_map[(ix, iy)] else [
                ("W", "N"),
                ("E", "S"),
            ]
        else:
            segs = _SEGMENTS[case]
        for a, bname in segs:
            ka = crossings[_cell_edge(a, int(ix), int(iy))]
            kb = crossings[_cell_edge(bname, int(ix), int(iy))]
            adjacency.setdefault(ka, []).append(kb)
            adjacency.setdefault(kb, []).append(ka)

    visited = set()
    loops = []
    for start in adjacency:
        if start in visited:
            continue
        loop = [start]
        visited.add(start)
        prev, cur = None, start
        while True:
            nxt = [v for v in adjacency[cur] if v != prev]
            if not nxt:
                raise NoContourError("open contour chain; the grid clips the shape")
            prev, cur = cur, nxt[0]
            if cur == start:
                break
            loop.append(cur)
            visited.add(cur)
        if len(loop) >= 8:
            loops.append(loop)
    if not loops:
        raise NoContourError("no closed loop could be assembled from the contour")

    order = np.concatenate([np.array(lp) for lp in loops])
    points = pts_list[order]
    counts = [len(lp) for lp in loops]
    diag = math.hypot(xmax - xmin, ymax - ymin)
    normals = normals_from_implicit(points, f, grad, surface_tol=1e-6 * diag)
    return Boundary(points, normals, _loop_edges(counts), r)


# ---------------------------------------------------------------------------
# Registry and config parsing
# ---------------------------------------------------------------------------

_BUILTINS = {
    "circle": (circle, 2000),
    "ellipse": (ellipse, 4000),
    "annulus": (annulus, 1600),
    "rrect": (rounded_rectangle, 4000),
    "dumbbell": (dumbbell, 4000),
    "figure-eight": (figure_eight, 1000),
}


def available_shapes() -> list[str]:
    return sorted(_BUILTINS)


def generate(shape: str, n: int | None = None, **params):
    """Build a named shape; returns ``(boundary, info)``."""
    try:
        builder, default_n = _BUILTINS[shape]
    except KeyError:
        raise ValueError(
            f"unknown shape {shape!r}; available: {', '.join(available_shapes())}"
        ) from None
    count = default_n if n is None else int(n)
    if count < 8:
        raise InconsistentShapeError(f"need at least 8 samples, got {count}")
    try:
        return builder(count, **params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {shape!r}: {exc}") from None


@dataclass
class ShapeSpec:
    """A shape request parsed from ``key = value`` lines.

    ``shape`` (name) is required; ``n`` and any numeric shape parameters are
    optional and passed to the generator.
    """

    shape: str
    n: int | None = None
    params: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path) -> "ShapeSpec":
        shape = None
        n = None
        params: dict = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(
                        f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}"
                    )
                key, _, value = (s.strip() for s in line.partition("="))
                if key == "shape":
                    shape = value
                elif key == "n":
                    n = int(value)
                else:
                    try:
                        params[key] = float(value)
                    except ValueError:
                        raise ValueError(
                            f"{path}:{lineno}: parameter {key!r} needs a number, "
                            f"got {value!r}"
                        ) from None
        if shape is None:
            raise ValueError(f"{path}: missing required key 'shape'")
        return cls(shape=shape, n=n, params=params)

    def build(self):
        return generate(self.shape, self.n, **self.params)
