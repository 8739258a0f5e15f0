"""Sampled boundary data: points, unit normals, adjacency, and the test radius.

A :class:`Boundary` is immutable.  Derived quantities that do not depend on
the radius (spatial index, neighbor graph, intrinsic distance matrix, normal
field statistics) are memoized in a cache that is *shared* between a boundary
and its :meth:`Boundary.rescaled` copies, so sweeping over radii never redoes
the expensive geometry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import InconsistentShapeError
from .validation import check_edges, check_points_normals, resolution_from_edges

__all__ = ["Boundary"]


@dataclass(frozen=True)
class Boundary:
    """Boundary samples with outward unit normals and an adjacency list.

    Parameters
    ----------
    points : (N, d) array
    normals : (N, d) array of outward unit vectors
    edges : (M, 2) int array of neighbor pairs along the boundary
    r : candidate ball radius the data is being tested against
    resolution_h : sampling resolution; defaults to the largest edge length
    """

    points: np.ndarray
    normals: np.ndarray
    edges: np.ndarray
    r: float
    resolution_h: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        p, n = check_points_normals(self.points, self.normals)
        e = check_edges(self.edges, p.shape[0])
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "normals", n)
        object.__setattr__(self, "edges", e)
        if not (math.isfinite(self.r) and self.r > 0):
            raise InconsistentShapeError(f"radius must be positive, got {self.r}")
        h = self.resolution_h
        if h is None or h <= 0.0:
            h = resolution_from_edges(p, e)
        if not math.isfinite(h) or h <= 0:
            raise InconsistentShapeError(f"bad resolution {h}")
        object.__setattr__(self, "resolution_h", float(h))

    # -- basic views --------------------------------------------------------

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def scaled_normals(self) -> np.ndarray:
        """Normals scaled to length ``r`` (ball centers are point +/- these)."""
        return self.r * self.normals

    # -- radius sweeps ------------------------------------------------------

    def rescaled(self, r: float) -> "Boundary":
        """Same data tested against a different radius; caches are shared."""
        if not (math.isfinite(r) and r > 0):
            raise InconsistentShapeError(f"radius must be positive, got {r}")
        return Boundary(
            self.points, self.normals, self.edges, float(r), self.resolution_h, self._cache
        )

    # -- memoized geometry --------------------------------------------------

    def kdtree(self) -> cKDTree:
        tree = self._cache.get("kdtree")
        if tree is None:
            tree = cKDTree(self.points)
            self._cache["kdtree"] = tree
        return tree

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_scaled_normals(
        cls, points, eta, edges, resolution_h: float = 0.0
    ) -> "Boundary":
        """Build from normals of length ``r`` (the radius is read off them)."""
        eta = np.asarray(eta, dtype=float)
        if eta.ndim != 2:
            raise InconsistentShapeError(f"eta must be 2-d, got shape {eta.shape}")
        lens = np.linalg.norm(eta, axis=1)
        if np.any(lens <= 0) or not np.all(np.isfinite(lens)):
            raise InconsistentShapeError("degenerate scaled normal")
        r = float(np.median(lens))
        spread = float(np.max(np.abs(lens - r))) / r
        if spread > 1e-6:
            raise InconsistentShapeError(
                f"scaled normals have inconsistent lengths (spread {spread:.3g})"
            )
        return cls(points, eta / lens[:, None], edges, r, resolution_h)
