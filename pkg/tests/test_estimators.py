"""Estimator wrappers: params plumbing and fit/predict behavior."""
from __future__ import annotations

import numpy as np
import pytest
from sklearn.base import clone

import regulus as rg
from regulus.estimators import ReachEstimator, RegularityCertifier


def _rows(boundary):
    return np.hstack([boundary.points, boundary.normals])


def test_get_set_params_round_trip():
    est = RegularityCertifier(r=0.7, threads=2)
    params = est.get_params()
    assert params["r"] == 0.7
    assert params["threads"] == 2
    est.set_params(r=0.3)
    assert est.r == 0.3
    dup = clone(est)
    assert dup.get_params() == est.get_params()
    assert not hasattr(dup, "report_")


def test_certifier_fit_predict(circle2000):
    b, _ = circle2000
    X = _rows(b)
    est = RegularityCertifier(r=0.9).fit(X)
    assert est.certified_
    assert est.report_.overall == "certified"
    labels = est.predict(X)
    assert labels.shape == (b.n_points,)
    assert labels.all()

    bad = RegularityCertifier(r=1.4).fit(X)
    assert not bad.certified_
    assert not bad.predict(X).any()


def test_certifier_requires_fit(circle2000):
    b, _ = circle2000
    with pytest.raises(RuntimeError, match="fit"):
        RegularityCertifier().predict(_rows(b))


def test_reach_estimator_brackets_the_circle():
    b, _ = rg.generate("circle", 600)
    est = ReachEstimator(gap=0.05).fit(_rows(b))
    assert 0.9 <= est.r_lo_ <= 1.0
    assert est.predict() == est.r_lo_
    assert est.estimate_.gap <= 0.05


def test_reach_estimator_requires_fit():
    with pytest.raises(RuntimeError, match="fit"):
        ReachEstimator().predict()


def test_bad_row_width_is_rejected():
    X = np.zeros((10, 5))
    with pytest.raises(rg.InconsistentShapeError):
        RegularityCertifier(r=1.0).fit(X)
