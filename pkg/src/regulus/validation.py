"""Input validation helpers shared by the data structures and estimators."""
from __future__ import annotations

import numpy as np

from .errors import InconsistentShapeError

__all__ = [
    "as_float_array",
    "check_points_normals",
    "check_edges",
    "resolution_from_edges",
    "split_features",
    "assemble_features",
]

#: largest tolerated deviation of a normal from unit length before rejection
UNIT_NORM_TOL = 1e-6


def as_float_array(a, name: str, ndim: int | None = None) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise InconsistentShapeError(
            f"{name} must be {ndim}-dimensional, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise InconsistentShapeError(f"{name} contains non-finite entries")
    return arr


def check_points_normals(points, normals) -> tuple[np.ndarray, np.ndarray]:
    """Validate matching point/normal arrays; return them with normals unitized.

    Normals may deviate from unit length by at most ``UNIT_NORM_TOL``
    (relative); they are renormalized exactly on the way out.
    """
    p = as_float_array(points, "points", 2)
    n = as_float_array(normals, "normals", 2)
    if p.shape != n.shape:
        raise InconsistentShapeError(
            f"points {p.shape} and normals {n.shape} must have the same shape"
        )
    if p.shape[0] < 3:
        raise InconsistentShapeError(f"need at least 3 samples, got {p.shape[0]}")
    if p.shape[1] < 2:
        raise InconsistentShapeError(f"ambient dimension must be >= 2, got {p.shape[1]}")
    lens = np.linalg.norm(n, axis=1)
    if np.any(lens <= 0):
        raise InconsistentShapeError("zero-length normal encountered")
    dev = float(np.max(np.abs(lens - 1.0)))
    if dev > UNIT_NORM_TOL:
        raise InconsistentShapeError(
            f"normals deviate from unit length by {dev:.3g} (> {UNIT_NORM_TOL:g}); "
            "scale them down or use Boundary.from_scaled_normals"
        )
    return p, n / lens[:, None]


def check_edges(edges, n_points: int) -> np.ndarray:
    """Canonicalize an adjacency list: int array (M, 2), sorted rows, unique."""
    e = np.asarray(edges)
    if e.ndim != 2 or e.shape[1] != 2:
        raise InconsistentShapeError(f"edges must have shape (M, 2), got {e.shape}")
    if e.shape[0] == 0:
        raise InconsistentShapeError("edge list is empty")
    if not np.issubdtype(e.dtype, np.integer):
        f = np.asarray(e, dtype=float)
        e = f.astype(np.int64)
        if np.any(e != f):
            raise InconsistentShapeError("edges must be integer indices")
    e = e.astype(np.int64)
    if np.any(e < 0) or np.any(e >= n_points):
        raise InconsistentShapeError(
            f"edge index outside [0, {n_points}): min {e.min()}, max {e.max()}"
        )
    if np.any(e[:, 0] == e[:, 1]):
        raise InconsistentShapeError("self-loop in edge list")
    e = np.sort(e, axis=1)
    return np.unique(e, axis=0)


def resolution_from_edges(points: np.ndarray, edges: np.ndarray) -> float:
    """Sampling resolution: the largest gap between declared neighbors."""
    gaps = np.linalg.norm(points[edges[:, 0]] - points[edges[:, 1]], axis=1)
    h = float(np.max(gaps))
    if h <= 0:
        raise InconsistentShapeError("duplicate points on a declared edge")
    return h


def split_features(X) -> tuple[np.ndarray, np.ndarray]:
    """Split a feature matrix ``[points | normals]`` of width ``2 d``."""
    arr = as_float_array(X, "X", 2)
    if arr.shape[1] % 2 != 0 or arr.shape[1] < 4:
        raise InconsistentShapeError(
            f"feature width must be 2*d with d >= 2, got {arr.shape[1]}"
        )
    d = arr.shape[1] // 2
    return arr[:, :d].copy(), arr[:, d:].copy()


def assemble_features(points: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """Inverse of :func:`split_features`."""
    return np.hstack([points, normals])
