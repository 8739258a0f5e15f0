"""Estimator-style wrappers around certification and radius search.

``X`` rows are ``[x, y, nx, ny]`` (or the 3-d analogue): sample coordinates
followed by the outward unit normal, in boundary order — consecutive rows
are treated as one closed loop.  These wrappers exist for pipeline
compatibility; the functional interface in :mod:`regulus.certify` is the
primary API.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .boundary import Boundary
from .certify import RadiusEstimate, RegularityReport, certify, estimate_max_r
from .tolerances import Tolerances
from .validation import split_features

__all__ = ["RegularityCertifier", "ReachEstimator"]


def _boundary_from_rows(X, r: float) -> Boundary:
    points, normals = split_features(np.asarray(X, dtype=float))
    n = points.shape[0]
    i = np.arange(n)
    edges = np.stack([i, (i + 1) % n], axis=1)
    return Boundary(points, normals, edges, r)


class RegularityCertifier(BaseEstimator):
    """Certify rows of boundary samples against a fixed radius.

    After ``fit``, ``report_`` holds the full verdict and ``certified_`` the
    boolean outcome; ``predict`` labels every row with it.
    """

    def __init__(self, r: float = 1.0, tol_rel: float = 1e-9,
                 tol_geo: float | None = None, threads: int = 1):
        self.r = r
        self.tol_rel = tol_rel
        self.tol_geo = tol_geo
        self.threads = threads

    def _tol(self) -> Tolerances:
        return Tolerances(rel=self.tol_rel, geo_abs=self.tol_geo)

    def fit(self, X, y=None):
        boundary = _boundary_from_rows(X, self.r)
        self.report_: RegularityReport = certify(
            boundary, tol=self._tol(), threads=self.threads
        )
        self.certified_ = self.report_.certified
        return self

    def predict(self, X):
        if not hasattr(self, "report_"):
            raise RuntimeError("call fit before predict")
        return np.full(np.asarray(X).shape[0], self.certified_, dtype=bool)


class ReachEstimator(BaseEstimator):
    """Bracket the largest certifiable radius for rows of boundary samples."""

    def __init__(self, gap: float = 0.01, hi: float | None = None,
                 tol_rel: float = 1e-9, tol_geo: float | None = None,
                 threads: int = 1):
        self.gap = gap
        self.hi = hi
        self.tol_rel = tol_rel
        self.tol_geo = tol_geo
        self.threads = threads

    def fit(self, X, y=None):
        # the starting radius only seeds the search; pick something harmless
        points, _ = split_features(np.asarray(X, dtype=float))
        span = float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))
        boundary = _boundary_from_rows(X, span)
        tol = Tolerances(rel=self.tol_rel, geo_abs=self.tol_geo)
        self.estimate_: RadiusEstimate = estimate_max_r(
            boundary, hi=self.hi, gap=self.gap, tol=tol, threads=self.threads
        )
        self.r_lo_ = self.estimate_.r_lo
        self.r_hi_ = self.estimate_.r_hi
        return self

    def predict(self, X=None):
        if not hasattr(self, "estimate_"):
            raise RuntimeError("call fit before predict")
        return self.r_lo_
