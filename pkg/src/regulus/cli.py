"""Command-line interface.

Subcommands: ``gen`` (write a builtin boundary as CSV), ``certify`` (verdict
at a radius), ``estimate-r`` (bracket the largest certifiable radius),
``geodesic`` (in-boundary path or chord-doubling between two samples), and
``analyze-pairs`` (table of the most distance-distorted sample pairs).

Exit codes: 0 certified / success, 1 refuted (or chord-doubling found a
segment with no admissible midpoint), 2 usage, parse, or I/O error,
3 inconclusive, 4 degenerate input (no radius certifiable at all).

JSON output is deterministic: keys are sorted, floats use repr formatting,
and the report never embeds wall-clock times or thread counts.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys

import numpy as np

from . import __version__
from ._scan import block_ranges, resolve_threads
from .boundary import Boundary
from .certify import certify, estimate_max_r
from .errors import (
    AllRefutedError,
    FileFormatError,
    InconsistentShapeError,
    MidpointSearchError,
    NoContourError,
    RegulusError,
)
from .fileio import load, save_csv
from .geodesics import (
    chord_double,
    default_step_cap,
    distance_matrix,
    geodesic,
    intrinsic_distance,
    turn_rate_certificate,
)
from .geometry import arc_length_from_chord
from .shapes import ShapeSpec, available_shapes, generate
from .tolerances import Tolerances

__all__ = ["main"]

_SHAPE_PARAMS = [
    ("--radius", "radius", "circle radius"),
    ("--a", "a", "ellipse semi-axis a"),
    ("--b", "b", "ellipse semi-axis b"),
    ("--outer", "outer", "annulus outer radius"),
    ("--inner", "inner", "annulus inner radius"),
    ("--width", "width", "rounded-rectangle width"),
    ("--height", "height", "rounded-rectangle height"),
    ("--corner-radius", "corner_radius", "rounded-rectangle corner radius"),
    ("--disk-r", "disk_r", "dumbbell disk radius"),
    ("--center-gap", "center_gap", "dumbbell distance between disk centers"),
    ("--neck-gap", "neck_gap", "dumbbell neck thickness"),
    ("--fillet", "fillet", "dumbbell junction fillet radius"),
    ("--scale", "scale", "figure-eight size"),
]


def _add_shape_options(p: argparse.ArgumentParser, with_spec: bool = False):
    p.add_argument("--shape", choices=available_shapes(), help="builtin shape")
    p.add_argument("--n", type=int, help="number of boundary samples")
    if with_spec:
        p.add_argument("--spec", help="key = value file describing the shape")
    for flag, dest, desc in _SHAPE_PARAMS:
        p.add_argument(flag, dest=dest, type=float, help=desc)


def _add_common(p: argparse.ArgumentParser, with_input: bool = True):
    if with_input:
        p.add_argument("--in", dest="infile", help="boundary file (.csv/.obj/.off)")
        _add_shape_options(p)
    p.add_argument("--r", type=float, help="radius to test")
    p.add_argument(
        "--json",
        nargs="?",
        const="-",
        metavar="PATH",
        help="emit a JSON report (to PATH, or stdout when bare)",
    )
    p.add_argument("--threads", type=int, help="worker threads (REGULUS_THREADS)")
    p.add_argument("--tol-geo", type=float, help="absolute geometric allowance")
    p.add_argument("--tol-rel", type=float, default=1e-9, help="relative tolerance")


def _tol(args) -> Tolerances:
    return Tolerances(rel=args.tol_rel, geo_abs=args.tol_geo)


def _shape_params(args) -> dict:
    return {
        dest: getattr(args, dest)
        for _, dest, _ in _SHAPE_PARAMS
        if getattr(args, dest, None) is not None
    }


def _load_input(args):
    """Boundary plus a descriptor of where it came from (for the report)."""
    if args.infile and args.shape:
        raise ValueError("pass either --in or --shape, not both")
    if args.infile:
        boundary = load(args.infile, r=args.r)
        return boundary, {"path": args.infile}
    if args.shape:
        params = _shape_params(args)
        boundary, info = generate(args.shape, args.n, **params)
        if args.r is not None:
            boundary = boundary.rescaled(args.r)
        desc = {"shape": info.name, "n": boundary.n_points, **info.params}
        if info.reach is not None:
            desc["reach"] = info.reach
        return boundary, desc
    raise ValueError("an input is required: --in FILE or --shape NAME")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if dataclasses.is_dataclass(o) and not isinstance(o, type):
        return dataclasses.asdict(o)
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"not JSON-serializable: {type(o).__name__}")


def _emit_json(args, command: str, parameters: dict, shape: dict, results):
    envelope = {
        "schema_version": 1,
        "command": command,
        "parameters": parameters,
        "shape": shape,
        "results": results,
        "timing": {"seconds": None},
        "version": __version__,
    }
    text = json.dumps(envelope, indent=2, sort_keys=True, default=_json_default)
    if args.json == "-":
        print(text)
    else:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _shape_summary(boundary: Boundary, desc: dict) -> dict:
    return {
        **desc,
        "n_points": boundary.n_points,
        "dim": boundary.dim,
        "resolution_h": boundary.resolution_h,
        "r": boundary.r,
    }


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.spec:
        if args.shape:
            raise ValueError("pass either --spec or --shape, not both")
        spec = ShapeSpec.from_file(args.spec)
        boundary, info = spec.build()
    else:
        if not args.shape:
            raise ValueError("gen needs --shape NAME or --spec FILE")
        boundary, info = generate(args.shape, args.n, **_shape_params(args))
    if args.r is not None:
        boundary = boundary.rescaled(args.r)
    if args.out:
        save_csv(args.out, boundary)
    desc = {"shape": info.name, **info.params}
    if info.reach is not None:
        desc["reach"] = info.reach
    if args.json:
        results = {
            "out": args.out,
            "n_points": boundary.n_points,
            "perimeter": info.perimeter,
        }
        _emit_json(args, "gen", {"n": boundary.n_points, "r": boundary.r, **desc},
                   _shape_summary(boundary, desc), results)
    else:
        target = args.out if args.out else "(not written; pass --out)"
        print(
            f"{info.name}: {boundary.n_points} samples, "
            f"h={boundary.resolution_h:.6g}, r={boundary.r:.6g} -> {target}"
        )
    return 0


def _common_parameters(args, desc: dict) -> dict:
    return {
        "input": desc,
        "r": args.r,
        "tol_geo": args.tol_geo,
        "tol_rel": args.tol_rel,
    }


def cmd_certify(args) -> int:
    boundary, desc = _load_input(args)
    threads = resolve_threads(args.threads)
    report = certify(boundary, tol=_tol(args), threads=threads)
    if args.json:
        _emit_json(
            args,
            "certify",
            _common_parameters(args, desc),
            _shape_summary(boundary, desc),
            report,
        )
    else:
        c1, c2, orc = report.cond1, report.cond2, report.ball_oracle
        print(f"r = {report.r_tested:.8g}: {report.overall}")
        print(
            f"  condition 1 [{c1.margin_class}]: lip={c1.lip_estimate:.6g} "
            f"(threshold 1+{c1.eps_geo:.3g}), defect={c1.normality_defect:.3g}"
        )
        print(
            f"  condition 2 [{'ok' if c2.verdict else 'witness'}]: "
            f"{c2.checked_pairs} pairs in range, {len(c2.witnesses)} witnesses"
        )
        print(
            f"  ball oracle [{'ok' if orc.verdict else 'violated'}]: "
            f"rho_min={orc.rho_min:.6g} at {orc.rho_argmin}, "
            f"{len(orc.violations)} violations"
        )
        for w in report.witnesses[:5]:
            print(f"  witness: {w}")
    return {"certified": 0, "refuted": 1, "inconclusive": 3}[report.overall]


def cmd_estimate_r(args) -> int:
    boundary, desc = _load_input(args)
    threads = resolve_threads(args.threads)
    estimate = estimate_max_r(
        boundary, hi=args.hi, gap=args.gap, tol=_tol(args), threads=threads
    )
    if args.json:
        parameters = _common_parameters(args, desc)
        parameters.update({"hi": args.hi, "gap": args.gap})
        _emit_json(args, "estimate-r", parameters,
                   _shape_summary(boundary, desc), estimate)
    else:
        print(f"r_lo = {estimate.r_lo:.8g} (certified)")
        print(f"r_hi = {estimate.r_hi:.8g} ({estimate.hi_verdict})")
        print(f"relative gap = {estimate.gap:.4g}, probes = {len(estimate.probes)}")
    return 0


def cmd_geodesic(args) -> int:
    boundary, desc = _load_input(args)
    pair = intrinsic_distance(boundary, args.src, args.dst)
    results: dict = {
        "from": args.src,
        "to": args.dst,
        "euclidean": pair.euclidean,
        "intrinsic": pair.intrinsic,
        "ratio": pair.ratio,
    }
    if args.chord_double is not None:
        path = chord_double(boundary, args.src, args.dst, depth=args.chord_double)
        results["chord_double"] = {
            "depth": args.chord_double,
            "length": path.length,
            "vertices": path.vertices.shape[0],
        }
        if pair.euclidean < 2.0 * boundary.r:
            results["chord_double"]["arc_limit"] = arc_length_from_chord(
                pair.euclidean, boundary.r
            )
    else:
        path = geodesic(boundary, args.src, args.dst)
        cert = turn_rate_certificate(path, boundary.r, boundary.resolution_h, _tol(args))
        results["path"] = {
            "length": path.length,
            "max_turn_rate": path.max_turn_rate,
            "turn_bound": cert.bound,
            "within_bound": cert.within_bound,
            "converged": path.converged,
            "vertices": path.vertices.shape[0],
        }
    if args.json:
        parameters = _common_parameters(args, desc)
        parameters.update(
            {"from": args.src, "to": args.dst, "chord_double": args.chord_double}
        )
        _emit_json(args, "geodesic", parameters,
                   _shape_summary(boundary, desc), results)
    else:
        print(
            f"pair ({args.src}, {args.dst}): euclidean={pair.euclidean:.8g}, "
            f"intrinsic={pair.intrinsic:.8g}, ratio={pair.ratio:.6g}"
        )
        if "chord_double" in results:
            cd = results["chord_double"]
            line = (
                f"chord doubling depth {cd['depth']}: length={cd['length']:.8g}"
            )
            if "arc_limit" in cd:
                line += f", arc limit={cd['arc_limit']:.8g}"
            print(line)
        else:
            p = results["path"]
            print(
                f"geodesic: length={p['length']:.8g}, "
                f"turn rate={p['max_turn_rate']:.6g} "
                f"(bound {p['turn_bound']:.6g}, "
                f"{'ok' if p['within_bound'] else 'exceeded'})"
            )
    return 0


def _pair_table(boundary: Boundary, r: float, top: int) -> list[dict]:
    n = boundary.n_points
    if n > 6000:
        raise ValueError(
            f"analyze-pairs scans all pairs and is limited to 6000 samples "
            f"(got {n})"
        )
    dmat = distance_matrix(boundary)
    pts = boundary.points
    cut = 2.0 * r
    cols = np.arange(n)[None, :]
    ii_all, jj_all, ee_all = [], [], []
    for lo, hi in block_ranges(n, 256):
        diff = pts[lo:hi, None, :] - pts[None, :, :]
        e = np.linalg.norm(diff, axis=2)
        mask = (cols > np.arange(lo, hi)[:, None]) & (e < cut) & (e > 0)
        bi, bj = np.nonzero(mask)
        ii_all.append(bi + lo)
        jj_all.append(bj)
        ee_all.append(e[mask])
    ii = np.concatenate(ii_all)
    jj = np.concatenate(jj_all)
    ee = np.concatenate(ee_all)
    if ii.size == 0:
        return []
    dd = dmat[ii, jj]
    with np.errstate(invalid="ignore"):
        ratio = np.where(ee > 0, dd / ee, np.inf)
    order = np.lexsort((jj, ii, -ratio))[:top]
    rows = []
    for k in order:
        rows.append(
            {
                "i": int(ii[k]),
                "j": int(jj[k]),
                "euclidean": float(ee[k]),
                "intrinsic": float(dd[k]),
                "ratio": float(ratio[k]),
                "flagged": bool(ratio[k] >= 0.5 * math.pi),
            }
        )
    return rows


def cmd_analyze_pairs(args) -> int:
    boundary, desc = _load_input(args)
    rows = _pair_table(boundary, boundary.r, args.top)
    if args.json:
        parameters = _common_parameters(args, desc)
        parameters.update({"top": args.top})
        _emit_json(args, "analyze-pairs", parameters,
                   _shape_summary(boundary, desc), {"pairs": rows})
    else:
        print(f"{'i':>6} {'j':>6} {'euclidean':>12} {'intrinsic':>12} "
              f"{'ratio':>8}  flag")
        for row in rows:
            intr = (
                f"{row['intrinsic']:12.6g}"
                if math.isfinite(row["intrinsic"])
                else f"{'inf':>12}"
            )
            rat = (
                f"{row['ratio']:8.4f}"
                if math.isfinite(row["ratio"])
                else f"{'inf':>8}"
            )
            print(
                f"{row['i']:6d} {row['j']:6d} {row['euclidean']:12.6g} "
                f"{intr} {rat}  {'*' if row['flagged'] else ''}"
            )
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regulus",
        description="Certify or refute ball-regularity of sampled boundaries.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a builtin boundary as CSV")
    _add_shape_options(p, with_spec=True)
    p.add_argument("--r", type=float, help="radius to stamp into the file")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--json", nargs="?", const="-", metavar="PATH")
    p.add_argument("--threads", type=int)
    p.add_argument("--tol-geo", type=float)
    p.add_argument("--tol-rel", type=float, default=1e-9)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("certify", help="test regularity at a radius")
    _add_common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("estimate-r", help="bracket the largest certifiable radius")
    _add_common(p)
    p.add_argument("--hi", type=float, help="initial upper probe")
    p.add_argument("--gap", type=float, default=0.01, help="relative bracket width")
    p.set_defaults(func=cmd_estimate_r)

    p = sub.add_parser("geodesic", help="in-boundary path between two samples")
    _add_common(p)
    p.add_argument("--from", dest="src", type=int, required=True,
                   help="start sample index")
    p.add_argument("--to", dest="dst", type=int, required=True,
                   help="end sample index")
    p.add_argument("--chord-double", type=int, metavar="DEPTH",
                   help="use recursive midpoint doubling at this depth")
    p.set_defaults(func=cmd_geodesic)

    p = sub.add_parser("analyze-pairs", help="most distance-distorted pairs")
    _add_common(p)
    p.add_argument("--top", type=int, default=20, help="rows to report")
    p.set_defaults(func=cmd_analyze_pairs)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AllRefutedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except MidpointSearchError as exc:
        print(f"refuted: {exc}", file=sys.stderr)
        return 1
    except (FileFormatError, InconsistentShapeError, NoContourError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RegulusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
