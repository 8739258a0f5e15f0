"""Builtin generators, the implicit dumbbell field, level-set tracing, specs."""
from __future__ import annotations

import numpy as np
import numpy.testing as npt
import pytest
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

import regulus as rg


def _perimeter(b):
    e = b.edges
    return float(np.linalg.norm(b.points[e[:, 0]] - b.points[e[:, 1]], axis=1).sum())


def _loops(b):
    e = b.edges
    adj = coo_matrix(
        (np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(b.n_points, b.n_points)
    )
    k, _ = connected_components(adj, directed=False)
    return k


# ---------------------------------------------------------------------------
# builtin generators
# ---------------------------------------------------------------------------

EXPECTED = {
    # name: (loops, reach)
    "circle": (1, 1.0),
    "ellipse": (1, 0.5),
    "annulus": (2, 0.5),
    "rrect": (1, 0.5),
    "dumbbell": (1, 0.1),
    "figure-eight": (1, None),
}


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_builtin_shape_is_consistent(name):
    b, info = rg.generate(name, 800)
    loops, reach = EXPECTED[name]
    assert info.name == name
    assert info.reach == reach
    assert _loops(b) == loops
    npt.assert_allclose(np.linalg.norm(b.normals, axis=1), 1.0, atol=1e-12)
    if info.perimeter is not None:
        npt.assert_allclose(_perimeter(b), info.perimeter, rtol=1e-3)
    # every vertex sits on exactly two edges (closed loops)
    deg = np.bincount(b.edges.ravel(), minlength=b.n_points)
    assert (deg == 2).all()


@pytest.mark.parametrize("name", ["circle", "ellipse", "annulus", "rrect", "dumbbell"])
def test_arclength_sampling_is_near_uniform(name):
    b, _ = rg.generate(name)
    e = b.edges
    gaps = np.linalg.norm(b.points[e[:, 0]] - b.points[e[:, 1]], axis=1)
    assert gaps.max() / gaps.min() < 1.01


def test_circle_normals_are_radial():
    b, _ = rg.generate("circle", 200)
    npt.assert_allclose(b.normals, b.points, atol=1e-12)


def test_ellipse_normals_match_the_gradient():
    b, info = rg.generate("ellipse", 500)
    a, bb = info.params["a"], info.params["b"]
    grad = b.points / np.array([a * a, bb * bb])
    grad /= np.linalg.norm(grad, axis=1, keepdims=True)
    npt.assert_allclose(b.normals, grad, atol=1e-12)


def test_annulus_inner_normals_point_inward():
    b, info = rg.generate("annulus", 400)
    radii = np.linalg.norm(b.points, axis=1)
    inner = radii < 0.5 * (info.params["inner"] + info.params["outer"])
    dots = np.einsum("ij,ij->i", b.normals, b.points / radii[:, None])
    assert (dots[inner] < -0.999).all()
    assert (dots[~inner] > 0.999).all()


def test_rrect_flat_sides_have_axis_normals():
    b, _ = rg.generate("rrect", 2000)
    bottom = (np.abs(b.points[:, 0]) < 0.9) & (b.points[:, 1] < -0.9)
    expected = np.tile([0.0, -1.0], (int(bottom.sum()), 1))
    npt.assert_allclose(b.normals[bottom], expected, atol=1e-12)


def test_generate_rejects_unknown_shape():
    with pytest.raises(ValueError, match="available"):
        rg.generate("klein-bottle")


def test_generate_rejects_unknown_parameters():
    with pytest.raises(ValueError, match="bad parameters"):
        rg.generate("circle", 100, wobble=3.0)


def test_generate_rejects_tiny_sample_counts():
    with pytest.raises(rg.InconsistentShapeError):
        rg.generate("circle", 7)


def test_bad_geometry_is_rejected():
    with pytest.raises(rg.InconsistentShapeError):
        rg.generate("circle", 100, radius=-1.0)
    with pytest.raises(rg.InconsistentShapeError):
        rg.generate("dumbbell", 100, neck_gap=5.0)  # wider than the disks
    with pytest.raises(rg.InconsistentShapeError):
        rg.generate("dumbbell", 100, center_gap=1.0)  # fillets swallow the neck
    with pytest.raises(rg.InconsistentShapeError):
        rg.generate("annulus", 100, inner=2.0, outer=1.0)


def test_available_shapes_lists_the_registry():
    names = rg.available_shapes()
    assert names == sorted(names)
    assert set(EXPECTED) == set(names)


# ---------------------------------------------------------------------------
# implicit dumbbell field
# ---------------------------------------------------------------------------


def test_dumbbell_field_vanishes_on_the_sampled_boundary(dumbbell4000):
    b, _ = dumbbell4000
    f, _ = rg.dumbbell_field()
    npt.assert_allclose(f(b.points), 0.0, atol=1e-12)


def test_dumbbell_field_signs_and_gradient():
    f, grad = rg.dumbbell_field()
    inside = np.array([[5.0, 0.0], [0.0, 0.0], [-5.0, 1.0]])
    outside = np.array([[0.0, 1.0], [8.0, 0.0], [0.0, -2.0]])
    assert (f(inside) < 0).all()
    assert (f(outside) > 0).all()
    g = grad(outside)
    npt.assert_allclose(np.linalg.norm(g, axis=1), 1.0, atol=1e-12)
    # at (0, 1) the nearest wall is the neck top: gradient points up
    npt.assert_allclose(g[0], [0.0, 1.0], atol=1e-12)


# ---------------------------------------------------------------------------
# level-set tracing
# ---------------------------------------------------------------------------


def _circle_field():
    def f(p):
        return np.linalg.norm(np.atleast_2d(p), axis=1) - 1.0

    def grad(p):
        p = np.atleast_2d(p)
        return p / np.linalg.norm(p, axis=1, keepdims=True)

    return f, grad


def test_level_set_traces_the_unit_circle():
    f, grad = _circle_field()
    b = rg.extract_level_set(f, grad, (-1.5, 1.5, -1.5, 1.5), cells=200)
    radii = np.linalg.norm(b.points, axis=1)
    npt.assert_allclose(radii, 1.0, atol=1e-9)
    assert _loops(b) == 1
    dots = np.einsum("ij,ij->i", b.normals, b.points / radii[:, None])
    npt.assert_allclose(dots, 1.0, atol=1e-9)
    npt.assert_allclose(_perimeter(b), 2.0 * np.pi, rtol=1e-3)


def test_level_set_error_cases():
    f, grad = _circle_field()
    with pytest.raises(rg.NoContourError):  # no sign change
        rg.extract_level_set(f, grad, (2.0, 3.0, 2.0, 3.0), cells=50)
    with pytest.raises(rg.NoContourError):  # contour clipped by the box
        rg.extract_level_set(f, grad, (0.0, 2.0, -0.5, 0.5), cells=50)
    with pytest.raises(ValueError):  # degenerate box
        rg.extract_level_set(f, grad, (1.0, 1.0, 0.0, 1.0), cells=50)


def test_level_set_matches_the_sampled_dumbbell(dumbbell4000):
    _, info = dumbbell4000
    f, grad = rg.dumbbell_field()
    b = rg.extract_level_set(f, grad, (-7.5, 7.5, -2.7, 2.7), cells=600, r=0.1)
    assert _loops(b) == 1
    assert b.r == 0.1
    npt.assert_allclose(_perimeter(b), info.perimeter, rtol=1e-2)


# ---------------------------------------------------------------------------
# shape specs
# ---------------------------------------------------------------------------


def test_shape_spec_round_trip(tmp_path):
    p = tmp_path / "spec.txt"
    p.write_text(
        "# a small ellipse\n"
        "shape = ellipse\n"
        "n = 512\n"
        "a = 3.0\n"
        "b = 1.5   # minor semi-axis\n"
    )
    spec = rg.ShapeSpec.from_file(p)
    assert spec.shape == "ellipse"
    assert spec.n == 512
    assert spec.params == {"a": 3.0, "b": 1.5}
    b, info = spec.build()
    assert b.n_points == 512
    assert info.params["a"] == 3.0


def test_shape_spec_reports_the_offending_line(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("shape = circle\n\nradius = huge\n")
    with pytest.raises(ValueError, match=r"bad\.txt:3"):
        rg.ShapeSpec.from_file(p)
    q = tmp_path / "worse.txt"
    q.write_text("shape circle\n")
    with pytest.raises(ValueError, match=r"worse\.txt:1"):
        rg.ShapeSpec.from_file(q)


def test_shape_spec_requires_a_shape(tmp_path):
    p = tmp_path / "empty.txt"
    p.write_text("# nothing here\nn = 100\n")
    with pytest.raises(ValueError, match="missing required key"):
        rg.ShapeSpec.from_file(p)
