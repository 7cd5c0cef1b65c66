"""Command line front end: ``normalproj {build,project,eddegree,verify,bench,random}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .congruence import DegenerateSurfaceError, build_congruence
from .grading import SpaceKind
from .inversion import (
    HashMismatchError,
    InversionError,
    InversionOptions,
    NonFiniteFiberError,
    eddegree,
    ed_degree_formula,
    project,
)
from .oracle import OracleOptions, match_solutions, oracle_project
from .reference import MATRIX_SHAPES
from .surface import ConsistencyError, SurfaceError, SurfaceParam, gallery, gallery_names
from .syzygy import FormatError, admissible_degree, build_matrix_rep, load_matrix_rep, save_matrix_rep

log = logging.getLogger("normalproj")

EXIT_MISMATCH = 1
EXIT_INVALID = 2
EXIT_DEGENERATE = 3
EXIT_HASH = 4

CSV_HEADER = ["x", "y", "z", "u", "v", "qx", "qy", "qz", "dist", "residual"]


class CliError(Exception):
    def __init__(self, msg, code):
        super().__init__(msg)
        self.code = code


def load_surface(ref: str) -> SurfaceParam:
    """Surface from a JSON path, or a bundled one by name (``segre``, ``sphere``)."""
    path = Path(ref)
    try:
        if path.exists():
            return SurfaceParam.load(path)
        name = ref[len("gallery:"):] if ref.startswith("gallery:") else ref
        if name in gallery_names():
            return gallery(name)
        raise SurfaceError(f"{ref}: no such file or bundled surface")
    except SurfaceError as exc:
        raise CliError(str(exc), EXIT_INVALID) from exc


def parse_domain(text):
    if text is None or text.lower() in ("unbounded", "none", "inf"):
        return None
    try:
        a, b, c, d = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"domain must be 'a,b,c,d' or 'unbounded', got {text!r}")
    return (a, b, c, d)


def parse_degree(text):
    return tuple(int(x) for x in text.replace("x", ",").split(","))


def _threads():
    try:
        return max(1, int(os.environ.get("NORMALPROJ_THREADS", os.cpu_count() or 1)))
    except ValueError:
        return 1


def _build_degree(s: SurfaceParam, override, mirrored=False):
    if override is None:
        return admissible_degree(s, mirrored=mirrored)
    deg = tuple(override)
    if len(deg) == s.kind.x_arity:
        deg = deg + (0,)
    if len(deg) != s.kind.arity:
        raise CliError(f"--degree needs {s.kind.x_arity} component(s) for {s.kind.value}", EXIT_INVALID)
    return deg


def _build(s: SurfaceParam, degree, tol):
    try:
        c = build_congruence(s)
        return build_matrix_rep(c, degree, tol)
    except (DegenerateSurfaceError, ConsistencyError) as exc:
        raise CliError(str(exc), EXIT_DEGENERATE) from exc


def _options(args) -> InversionOptions:
    return InversionOptions(
        rank_tol=args.tol,
        imag_tol=args.imag_tol,
        verify_tol=args.verify_tol,
        domain=args.domain,
        fiber_slack=getattr(args, "fiber_slack", 0),
    )


# --- subcommands --------------------------------------------------------------


def cmd_build(args, out):
    s = load_surface(args.surface)
    degree = _build_degree(s, args.degree, args.mirrored)
    t0 = time.perf_counter()
    m = _build(s, degree, args.tol)
    ms = 1e3 * (time.perf_counter() - t0)
    save_matrix_rep(m, args.output)
    report = {
        "surface": args.surface,
        "degree": list(degree),
        "admissible_degree": list(admissible_degree(s, mirrored=args.mirrored)),
        "shape": [m.rows, m.cols],
        "build_ms": round(ms, 3),
        "output": str(args.output),
    }
    print(json.dumps(report), file=out)
    return 0


def _parse_point(fields, where):
    try:
        vals = tuple(float(x) for x in fields)
    except ValueError:
        return None
    if len(vals) != 3 or not all(np.isfinite(vals)):
        raise CliError(f"{where}: expected three finite coordinates x,y,z", EXIT_INVALID)
    return vals


def _read_points(args):
    if args.point is not None:
        pt = _parse_point(args.point.split(","), "--point")
        if pt is None:
            raise CliError("--point: expected three finite coordinates x,y,z", EXIT_INVALID)
        return [pt]
    try:
        fh = sys.stdin if args.points == "-" else open(args.points)
    except OSError as exc:
        raise CliError(str(exc), EXIT_INVALID) from exc
    pts = []
    with fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].strip().startswith("#"):
                continue
            pt = _parse_point(row, f"{args.points}:{lineno}")
            if pt is None and lineno == 1:
                continue  # header
            if pt is None:
                raise CliError(f"{args.points}:{lineno}: not a numeric row", EXIT_INVALID)
            pts.append(pt)
    return pts


def project_points(m, s, points, opts, threads=1):
    """Project many points; results come back in input order."""

    def one(p):
        try:
            return project(m, s, p, opts), None
        except NonFiniteFiberError as exc:
            return [], str(exc)

    if threads <= 1 or len(points) <= 1:
        return [one(p) for p in points]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, points))


def cmd_project(args, out):
    s = load_surface(args.surface)
    try:
        m = load_matrix_rep(args.matrix)
    except (FormatError, OSError) as exc:
        raise CliError(str(exc), EXIT_INVALID) from exc
    if m.meta.get("surface_hash") != s.content_hash:
        raise CliError("matrix representation was built for a different surface", EXIT_HASH)
    points = _read_points(args)
    opts = _options(args)
    t0 = time.perf_counter()
    results = project_points(m, s, points, opts, _threads())
    wall = time.perf_counter() - t0

    if args.format == "json":
        records = []
        for p, (res, err) in zip(points, results):
            rec = {"point": list(p), "projections": [
                {"u": r.u, "v": r.v, "q": r.point.tolist(), "dist": r.distance,
                 "residual": r.residual, "multiplicity": r.multiplicity}
                for r in res
            ]}
            if err:
                rec["error"] = err
            records.append(rec)
        json.dump(records, out, indent=1)
        out.write("\n")
    else:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for p, (res, err) in zip(points, results):
            if err:
                out.write(f"# {p[0]!r},{p[1]!r},{p[2]!r}: {err}\n")
            for r in res:
                w.writerow([repr(float(x)) for x in (*p, r.u, r.v, *r.point, r.distance, r.residual)])
    print(f"projected {len(points)} point(s) in {wall:.3f} s", file=sys.stderr)
    return 0


def cmd_eddegree(args, out):
    if args.trials < 1:
        raise CliError("--trials must be >= 1", EXIT_INVALID)
    s = load_surface(args.surface)
    m = _build(s, admissible_degree(s), args.tol)
    ed = eddegree(s, args.trials, args.seed, m=m, rank_tol=args.tol)
    print(json.dumps({"surface": args.surface, "eddegree": ed, "class_formula": ed_degree_formula(s),
                      "trials": args.trials, "seed": args.seed}), file=out)
    return 0


def cmd_verify(args, out):
    s = load_surface(args.surface)
    if args.matrix:
        try:
            m = load_matrix_rep(args.matrix)
        except (FormatError, OSError) as exc:
            raise CliError(str(exc), EXIT_INVALID) from exc
    else:
        m = _build(s, _build_degree(s, args.degree), args.tol)
    rng = np.random.default_rng(args.seed)
    opts = _options(args)
    box = args.domain or (-1.0, 1.0, -1.0, 1.0)
    opts.domain = box
    oopts = OracleOptions(domain=box, grid_n=args.grid)
    failures = 0
    for i in range(args.n_points):
        p = rng.uniform(-1.0, 1.0, 3)
        try:
            got = [(r.u, r.v) for r in project(m, s, p, opts)]
            err = None
        except InversionError as exc:
            got, err = [], str(exc)
        want = oracle_project(s, p, oopts)
        matched, missed, extra = match_solutions(got, want, args.match_tol)
        ok = err is None and not missed and not extra
        failures += not ok
        line = {"point": p.tolist(), "matched": len(matched), "missed": len(missed), "extra": len(extra),
                "ok": ok}
        if err:
            line["error"] = err
        print(json.dumps(line), file=out)
    print(json.dumps({"points": args.n_points, "failures": failures, "pass": failures == 0}), file=out)
    return 0 if failures == 0 else EXIT_MISMATCH


CLASSES = {
    "triangular-nonrational": ("triangular", False),
    "triangular-rational": ("triangular", True),
    "tensor-nonrational": ("tensor", False),
    "tensor-rational": ("tensor", True),
}


def cmd_bench(args, out):
    kind, rational = CLASSES[args.cls]
    degrees = [parse_degree(d) for d in args.degrees.split(";") if d] if args.degrees else []
    rng = np.random.default_rng(args.seed)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["class", "degree", "mu0", "rows", "cols", "eddeg", "expected_shape", "expected_eddeg",
                "ok", "build_ms", "project_ms"])
    all_ok = True
    for deg in degrees:
        try:
            s = SurfaceParam.random(kind, deg, rational, rng)
        except SurfaceError as exc:
            raise CliError(str(exc), EXIT_INVALID) from exc
        mu0 = admissible_degree(s)
        t0 = time.perf_counter()
        m = _build(s, mu0, args.tol)
        build_ms = 1e3 * (time.perf_counter() - t0)
        ed = eddegree(s, 3, rng, m=m, rank_tol=args.tol)
        p = rng.uniform(-1, 1, 3)
        t0 = time.perf_counter()
        try:
            project(m, s, p, InversionOptions(domain=None, rank_tol=args.tol))
        except InversionError:
            pass
        project_ms = 1e3 * (time.perf_counter() - t0)
        expected = MATRIX_SHAPES.get((kind, rational, tuple(deg)))
        ok = (expected is None or expected == m.shape) and ed == ed_degree_formula(s)
        all_ok &= ok
        w.writerow([args.cls, "x".join(map(str, deg)), "x".join(map(str, mu0[:-1])), m.rows, m.cols, ed,
                    "x".join(map(str, expected)) if expected else "", ed_degree_formula(s), ok,
                    f"{build_ms:.1f}", f"{project_ms:.1f}"])
    return 0 if all_ok else EXIT_MISMATCH


def cmd_random(args, out):
    rng = np.random.default_rng(args.seed)
    s = SurfaceParam.random(args.kind, parse_degree(args.degree), args.rational, rng)
    s.save(args.output)
    print(json.dumps({"output": str(args.output), "kind": s.kind.value, "degree": list(s.degree_d),
                      "rational": s.rational}), file=out)
    return 0


# --- parser -----------------------------------------------------------------------


def _add_tolerances(p):
    p.add_argument("--tol", type=float, default=1e-8, help="relative rank tolerance")
    p.add_argument("--imag-tol", type=float, default=1e-6)
    p.add_argument("--verify-tol", type=float, default=1e-6)
    p.add_argument("--domain", type=parse_domain, default=(0.0, 1.0, 0.0, 1.0),
                   help="parameter box 'umin,umax,vmin,vmax' or 'unbounded'")


def build_parser():
    parser = argparse.ArgumentParser(prog="normalproj", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="compute and store the elimination matrix")
    p.add_argument("surface")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--degree", type=parse_degree, default=None, help="override mu, e.g. 4 or 2,2")
    p.add_argument("--mirrored", action="store_true", help="use the mirrored tensor-product degree")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("project", help="orthogonal projections of points")
    p.add_argument("matrix")
    p.add_argument("surface")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--point", help="single point 'x,y,z'")
    src.add_argument("--points", help="CSV file of x,y,z rows ('-' for stdin)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--fiber-slack", type=int, default=0,
                   help="corank allowed above the class ED degree before a fiber is called infinite")
    _add_tolerances(p)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("eddegree", help="numerical Euclidean distance degree")
    p.add_argument("surface")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_eddegree)

    p = sub.add_parser("verify", help="cross-check project against the brute-force oracle")
    p.add_argument("surface")
    p.add_argument("--n-points", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--matrix", help="use a stored matrix instead of building one")
    p.add_argument("--degree", type=parse_degree, default=None)
    p.add_argument("--grid", type=int, default=60)
    p.add_argument("--match-tol", type=float, default=1e-5)
    _add_tolerances(p)
    p.set_defaults(func=cmd_verify, domain=None)

    p = sub.add_parser("bench", help="matrix sizes and ED degrees on random surfaces")
    p.add_argument("--class", dest="cls", choices=sorted(CLASSES), required=True)
    p.add_argument("--degrees", default="", help="';'-separated degrees, e.g. '2;3' or '1,1;2,2'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("random", help="write a random surface file")
    p.add_argument("--kind", choices=("triangular", "tensor"), required=True)
    p.add_argument("--degree", required=True)
    p.add_argument("--rational", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_random)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, out)
    except CliError as exc:
        print(f"normalproj: {exc}", file=sys.stderr)
        return exc.code
    except HashMismatchError as exc:
        print(f"normalproj: {exc}", file=sys.stderr)
        return EXIT_HASH


if __name__ == "__main__":
    sys.exit(main())
