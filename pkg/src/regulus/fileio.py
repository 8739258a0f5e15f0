"""Read and write sampled boundaries.

CSV is the native format: one row per sample, header ``x,y,nx,ny`` (or
``x,y,z,nx,ny,nz``), unit normals, 17 significant digits so values survive a
round trip bit for bit.  Two comment lines carry what columns cannot: the
radius the data is scaled for and the loop structure (sample counts per
closed loop, in row order).  Triangle meshes load from OBJ or OFF with
area-weighted vertex normals and face edges as the adjacency.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .boundary import Boundary
from .errors import FileFormatError

__all__ = ["save_csv", "load_csv", "load_obj", "load_off", "save", "load"]

_HEADERS = {2: ["x", "y", "nx", "ny"], 3: ["x", "y", "z", "nx", "ny", "nz"]}


def _cycle_edges(counts: list[int], total: int) -> np.ndarray:
    if sum(counts) != total:
        raise FileFormatError(
            f"loop sizes {counts} do not add up to {total} rows"
        )
    rows = []
    offset = 0
    for c in counts:
        if c < 2:
            raise FileFormatError(f"loop of {c} samples cannot form a cycle")
        i = np.arange(c)
        rows.append(np.stack([i + offset, (i + 1) % c + offset], axis=1))
        offset += c
    return np.concatenate(rows, axis=0)


def save_csv(path, boundary: Boundary) -> None:
    """Write a boundary as CSV; row order is preserved on reload."""
    counts = _loop_counts(boundary)
    cols = _HEADERS[boundary.dim]
    data = np.hstack([boundary.points, boundary.normals])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# r = {boundary.r:.17g}\n")
        fh.write(f"# loops = {','.join(str(c) for c in counts)}\n")
        fh.write(",".join(cols) + "\n")
        for row in data:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _loop_counts(boundary: Boundary) -> list[int]:
    """Loop sizes in row order, assuming rows follow consecutive cycles."""
    n = boundary.n_points
    nbr: dict[int, set[int]] = {}
    for a, b in boundary.edges:
        nbr.setdefault(int(a), set()).add(int(b))
        nbr.setdefault(int(b), set()).add(int(a))
    counts = []
    start = 0
    while start < n:
        k = start
        while k + 1 < n and (k + 1) in nbr.get(k, ()):
            k += 1
        counts.append(k - start + 1)
        start = k + 1
    return counts


def load_csv(path, r: float | None = None) -> Boundary:
    """Read a boundary written by :func:`save_csv` (or compatible).

    The radius comes from the ``# r = ...`` comment unless overridden.
    Files without a ``# loops`` comment are treated as one closed loop in
    row order.
    """
    r_file = None
    counts: list[int] | None = None
    header: list[str] | None = None
    rows: list[list[float]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                key, _, value = (s.strip() for s in body.partition("="))
                if key == "r":
                    try:
                        r_file = float(value)
                    except ValueError:
                        raise FileFormatError(
                            f"{path}:{lineno}: unreadable radius {value!r}"
                        ) from None
                elif key == "loops":
                    try:
                        counts = [int(v) for v in value.split(",")]
                    except ValueError:
                        raise FileFormatError(
                            f"{path}:{lineno}: unreadable loop sizes {value!r}"
                        ) from None
                continue
            if header is None:
                header = [c.strip().lower() for c in line.split(",")]
                if header in (_HEADERS[2][:2], _HEADERS[3][:3]):
                    raise FileFormatError(
                        f"{path}:{lineno}: normals are required "
                        f"(expected columns like {','.join(_HEADERS[2])})"
                    )
                if header not in (_HEADERS[2], _HEADERS[3]):
                    raise FileFormatError(
                        f"{path}:{lineno}: unrecognized header {line!r}; expected "
                        f"{','.join(_HEADERS[2])} or {','.join(_HEADERS[3])}"
                    )
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise FileFormatError(
                    f"{path}:{lineno}: expected {len(header)} columns, "
                    f"got {len(parts)}"
                )
            try:
                rows.append([float(v) for v in parts])
            except ValueError:
                raise FileFormatError(
                    f"{path}:{lineno}: non-numeric value in {line!r}"
                ) from None
    if header is None or not rows:
        raise FileFormatError(f"{path}: no data rows")
    data = np.array(rows)
    dim = len(header) // 2
    radius = r if r is not None else r_file
    if radius is None:
        raise FileFormatError(
            f"{path}: no '# r = ...' comment; pass an explicit radius"
        )
    edges = _cycle_edges(counts if counts else [len(rows)], len(rows))
    return Boundary(data[:, :dim], data[:, dim:], edges, radius)


# ---------------------------------------------------------------------------
# Triangle meshes
# ---------------------------------------------------------------------------


def _mesh_boundary(vertices, faces, r, path) -> Boundary:
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 3:
        raise FileFormatError(f"{path}: expected 3-d vertices, got {v.shape}")
    normals = np.zeros_like(v)
    edge_set = set()
    for face in faces:
        if len(face) < 3:
            raise FileFormatError(f"{path}: face with {len(face)} vertices")
        idx = list(face)
        if any(k < 0 or k >= len(v) for k in idx):
            raise FileFormatError(f"{path}: face references vertex out of range")
        for a, b in zip(idx, idx[1:] + idx[:1]):
            edge_set.add((min(a, b), max(a, b)))
        # fan triangulation; cross products double as area weights
        for k in range(1, len(idx) - 1):
            a, b, c = idx[0], idx[k], idx[k + 1]
            cr = np.cross(v[b] - v[a], v[c] - v[a])
            normals[a] += cr
            normals[b] += cr
            normals[c] += cr
    lens = np.linalg.norm(normals, axis=1)
    if np.any(lens == 0):
        bad = int(np.flatnonzero(lens == 0)[0])
        raise FileFormatError(
            f"{path}: vertex {bad} has no incident face (or a degenerate one)"
        )
    edges = np.array(sorted(edge_set), dtype=int)
    if r is None:
        raise FileFormatError(f"{path}: mesh formats carry no radius; pass one")
    return Boundary(v, normals / lens[:, None], edges, r)


def load_obj(path, r: float | None = None) -> Boundary:
    """Wavefront OBJ: ``v`` and ``f`` records; normals are recomputed from
    faces (area weighted), any stored normals are ignored."""
    vertices = []
    faces = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            parts = raw.split()
            if not parts or parts[0].startswith("#"):
                continue
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise FileFormatError(
                        f"{path}:{lineno}: vertex needs 3 coordinates"
                    )
                try:
                    vertices.append([float(p) for p in parts[1:4]])
                except ValueError:
                    raise FileFormatError(
                        f"{path}:{lineno}: non-numeric vertex coordinate"
                    ) from None
            elif tag == "f":
                try:
                    face = [int(p.split("/")[0]) for p in parts[1:]]
                except ValueError:
                    raise FileFormatError(
                        f"{path}:{lineno}: non-integer face index"
                    ) from None
                faces.append([k - 1 if k > 0 else len(vertices) + k for k in face])
    if not faces:
        raise FileFormatError(f"{path}: no faces found")
    return _mesh_boundary(vertices, faces, r, path)


def load_off(path, r: float | None = None) -> Boundary:
    """OFF mesh: counts line, vertex block, face block."""
    with open(path, encoding="utf-8") as fh:
        tokens: list[tuple[int, str]] = []
        for lineno, raw in enumerate(fh, start=1):
            body = raw.split("#", 1)[0]
            tokens.extend((lineno, t) for t in body.split())
    pos = 0
    if pos < len(tokens) and tokens[pos][1].upper() == "OFF":
        pos += 1
    if len(tokens) - pos < 3:
        raise FileFormatError(f"{path}: truncated OFF header")

    def _take(count, kind):
        nonlocal pos
        if pos + count > len(tokens):
            line = tokens[-1][0] if tokens else 0
            raise FileFormatError(f"{path}:{line}: file ends inside {kind}")
        out = tokens[pos : pos + count]
        pos += count
        return out

    try:
        nv, nf, _ = (int(t[1]) for t in _take(3, "header"))
    except ValueError:
        raise FileFormatError(f"{path}: non-integer OFF counts") from None
    vertices = []
    for _ in range(nv):
        chunk = _take(3, "vertex block")
        try:
            vertices.append([float(t[1]) for t in chunk])
        except ValueError:
            raise FileFormatError(
                f"{path}:{chunk[0][0]}: non-numeric vertex coordinate"
            ) from None
    faces = []
    for _ in range(nf):
        (line, cnt_s) = _take(1, "face block")[0]
        try:
            cnt = int(cnt_s)
        except ValueError:
            raise FileFormatError(f"{path}:{line}: non-integer face size") from None
        chunk = _take(cnt, "face block")
        try:
            faces.append([int(t[1]) for t in chunk])
        except ValueError:
            raise FileFormatError(
                f"{path}:{chunk[0][0]}: non-integer face index"
            ) from None
    if not faces:
        raise FileFormatError(f"{path}: no faces found")
    return _mesh_boundary(vertices, faces, r, path)


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

_LOADERS = {".csv": load_csv, ".obj": load_obj, ".off": load_off}


def load(path, r: float | None = None) -> Boundary:
    suffix = Path(path).suffix.lower()
    loader = _LOADERS.get(suffix)
    if loader is None:
        raise FileFormatError(
            f"{path}: unsupported extension {suffix!r} "
            f"(known: {', '.join(sorted(_LOADERS))})"
        )
    return loader(path, r)


def save(path, boundary: Boundary) -> None:
    suffix = Path(path).suffix.lower()
    if suffix != ".csv":
        raise FileFormatError(f"{path}: only .csv output is supported")
    save_csv(path, boundary)
