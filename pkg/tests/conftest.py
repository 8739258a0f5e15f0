"""Shared fixtures: builtin boundaries at their reference sampling sizes.

Boundaries are session-scoped because the expensive pair scans are cached on
the instance; reusing one object across tests amortizes the quadratic work.
Tests that mutate nothing may share freely (the dataclasses are frozen).
"""
from __future__ import annotations

import numpy as np
import pytest

import regulus as rg


def pytest_configure(config):
    config._acceptance_results = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_acceptance_results", [])
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log(request):
    return request.config._acceptance_results


@pytest.fixture(scope="session")
def circle2000():
    return rg.generate("circle", 2000)


@pytest.fixture(scope="session")
def circle20k():
    return rg.generate("circle", 20000)


@pytest.fixture(scope="session")
def ellipse4000():
    return rg.generate("ellipse", 4000)


@pytest.fixture(scope="session")
def annulus1600():
    return rg.generate("annulus", 1600)


@pytest.fixture(scope="session")
def rrect4000():
    return rg.generate("rrect", 4000)


@pytest.fixture(scope="session")
def dumbbell4000():
    return rg.generate("dumbbell", 4000)


@pytest.fixture(scope="session")
def figure8():
    return rg.generate("figure-eight", 1000)


def _icosahedron():
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    v = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=float,
    )
    v /= np.linalg.norm(v, axis=1)[:, None]
    f = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=int,
    )
    return v, f


def _subdivide(verts, faces):
    """One loop of triangle midpoint subdivision, re-projected to the sphere."""
    cache: dict[tuple[int, int], int] = {}
    verts = list(map(np.asarray, verts))

    def midpoint(a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        if key not in cache:
            m = 0.5 * (verts[a] + verts[b])
            m /= np.linalg.norm(m)
            cache[key] = len(verts)
            verts.append(m)
        return cache[key]

    out = []
    for a, b, c in faces:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        out.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]])
    return np.array(verts), np.array(out, dtype=int)


@pytest.fixture(scope="session")
def icosphere():
    """Unit-sphere triangle mesh, 642 vertices: (vertices, faces)."""
    v, f = _icosahedron()
    for _ in range(3):
        v, f = _subdivide(v, f)
    return v, f


def write_off(path, verts, faces):
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{len(verts)} {len(faces)} 0\n")
        for p in verts:
            fh.write(" ".join(f"{x:.17g}" for x in p) + "\n")
        for face in faces:
            fh.write(f"{len(face)} " + " ".join(str(i) for i in face) + "\n")


def write_obj(path, verts, faces):
    with open(path, "w") as fh:
        for p in verts:
            fh.write("v " + " ".join(f"{x:.17g}" for x in p) + "\n")
        for face in faces:
            fh.write("f " + " ".join(str(i + 1) for i in face) + "\n")


@pytest.fixture(scope="session")
def icosphere_off(icosphere, tmp_path_factory):
    v, f = icosphere
    path = tmp_path_factory.mktemp("mesh") / "icosphere.off"
    write_off(path, v, f)
    return path
