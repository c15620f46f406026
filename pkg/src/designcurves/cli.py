"""Command-line front end: solve, assemble, verify, sample, reconstruct, quadrature.

Exit codes: 0 success, 2 certificate/construction failure, 3 input error,
4 numerical non-convergence. All commands are deterministic for a fixed
configuration; identical runs write byte-identical files. JSON floats use
Python's shortest round-trip representation (up to 17 significant digits).
"""

import argparse
import json
import os
import sys

import numpy as np

from .assembly import AssemblyError, assemble_report
from .curves import (
    IntegrationError,
    curve_from_json,
    curve_length,
    design_residual,
    read_curve_json,
    write_curve_json,
    write_trace_csv,
)
from .harmonics import SphericalPolynomial
from .laguerre import rd_exact_moment, rd_weighted_integral
from .points import (
    BUILTIN_NAMES,
    CERTIFY_TOL,
    builtin_design,
    load_points,
    point_design_residual,
)
from .sampling import reconstruct_coeffs, trace_from_values
from .tennis import design_degree_for, solve_design_param, tennis_curve

EXIT_OK = 0
EXIT_CERTIFICATE = 2
EXIT_INPUT = 3
EXIT_NUMERICAL = 4


def _load_point_set(spec_str, degree):
    if spec_str in BUILTIN_NAMES:
        return builtin_design(spec_str)
    if not os.path.exists(spec_str):
        raise FileNotFoundError(
            f"{spec_str!r} is neither a built-in set ({', '.join(BUILTIN_NAMES)}) "
            "nor an existing file"
        )
    return load_points(spec_str, degree)


def _print_residual_table(report):
    for m in sorted(report.residuals, key=lambda m: (m.degree, m.exponents)):
        name = f"x^{m.exponents[0]} y^{m.exponents[1]} z^{m.exponents[2]}"
        print(f"  {name:<15} residual {report.residuals[m]:.3e}")
    print(f"  max residual {report.max_residual:.3e}")


def cmd_solve_family(args):
    if args.k < 2:
        print("error: k >= 2 required for solve", file=sys.stderr)
        return EXIT_INPUT
    a_k = solve_design_param(args.k, tol=args.tol)
    curve = tennis_curve(args.k, a_k)
    degree = design_degree_for(args.k)
    report = design_residual(curve, degree, tol=args.integration_tol)
    length = curve_length(curve, args.integration_tol)
    print(f"k = {args.k}")
    print(f"a_{args.k} = {a_k!r}")
    print(f"length = {length!r}")
    print(f"certificate degree = {degree}")
    _print_residual_table(report)
    if args.out:
        certificate = {
            "degree": degree,
            "max_residual": report.max_residual,
            "a": a_k,
            "k": args.k,
        }
        write_curve_json(args.out, curve, certificate=certificate)
        print(f"curve written to {args.out}")
    if report.max_residual > args.threshold:
        print(f"FAIL: residual above {args.threshold}", file=sys.stderr)
        return EXIT_CERTIFICATE
    return EXIT_OK


def cmd_assemble(args):
    points = _load_point_set(args.points, args.degree)
    radius = args.radius
    if radius is None and args.radius_factor != 1.0:
        base = points.covering_radius
        if base is None:
            from .points import covering_radius_points

            base = float(covering_radius_points(points))
        radius = args.radius_factor * base
    report = assemble_report(points, args.degree, r=radius)
    residual = design_residual(report.curve, args.degree, tol=args.integration_tol)
    length = curve_length(report.curve, args.integration_tol)
    certificate = {
        "degree": args.degree,
        "max_residual": residual.max_residual,
        "point_residual": report.point_residual,
        "length": length,
        "n_arcs": len(report.graph.arcs),
        "n_vertices": len(report.graph.vertices),
        "radius": report.radius,
        "n_points": points.n_points,
    }
    print(
        f"assembled {points.source}: {certificate['n_arcs']} arcs over "
        f"{certificate['n_vertices']} vertices, radius {report.radius!r}"
    )
    print(f"length = {length!r}")
    print(f"max residual at degree {args.degree} = {residual.max_residual:.3e}")
    write_curve_json(args.out, report.curve, certificate=certificate)
    print(f"curve written to {args.out}")
    if residual.max_residual > args.threshold:
        print(f"FAIL: residual above {args.threshold}", file=sys.stderr)
        return EXIT_CERTIFICATE
    return EXIT_OK


def cmd_verify(args):
    curve = read_curve_json(args.curve)
    report = design_residual(curve, args.degree, tol=args.integration_tol)
    _print_residual_table(report)
    if report.max_residual > args.threshold:
        worst = report.worst_monomial
        print(
            f"FAIL at degree {args.degree}: monomial x^{worst.exponents[0]} "
            f"y^{worst.exponents[1]} z^{worst.exponents[2]} off by "
            f"{report.residuals[worst]:.3e}"
        )
        return EXIT_CERTIFICATE
    print(f"PASS: curve integrates degree <= {args.degree} within {args.threshold}")
    return EXIT_OK


def cmd_sample(args):
    curve = read_curve_json(args.curve)
    write_trace_csv(args.out, curve, args.n)
    print(f"{args.n} samples written to {args.out}")
    return EXIT_OK


def _read_trace_csv(path):
    s_vals = []
    f_vals = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.replace(",", " ").split()
            if lineno == 1 and any(not _is_float(p) for p in parts):
                continue  # header row
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: expected 's,value' columns")
            if not (_is_float(parts[0]) and _is_float(parts[1])):
                raise ValueError(f"{path}:{lineno}: non-numeric entry")
            s_vals.append(float(parts[0]))
            f_vals.append(float(parts[1]))
    if not s_vals:
        raise ValueError(f"{path}: no samples")
    return np.asarray(s_vals), np.asarray(f_vals)


def _is_float(token):
    try:
        float(token)
        return True
    except ValueError:
        return False


def _read_xyz(path):
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 3 or not all(_is_float(p) for p in parts):
                raise ValueError(f"{path}:{lineno}: expected 'x y z'")
            rows.append([float(p) for p in parts])
    if not rows:
        raise ValueError(f"{path}: no points")
    return np.asarray(rows)


def cmd_reconstruct(args):
    curve = read_curve_json(args.curve)
    s, values = _read_trace_csv(args.trace)
    trace = trace_from_values(curve, s, values)
    result = reconstruct_coeffs(trace, args.degree)
    print(f"condition of evaluation system = {result.condition!r}")
    print(f"sample residual = {result.sample_residual!r}")
    doc = {
        "degree": args.degree,
        "harmonic_coefficients": [float(c) for c in result.coefficients],
        "sample_residual": result.sample_residual,
        "condition": result.condition,
    }
    if args.eval_points:
        pts = _read_xyz(args.eval_points)
        norms = np.linalg.norm(pts, axis=1, keepdims=True)
        vals = result.polynomial(pts / norms)
        doc["eval_points"] = pts.tolist()
        doc["values"] = [float(v) for v in np.atleast_1d(vals)]
        for p, v in zip(pts, np.atleast_1d(vals)):
            print(f"  f({p[0]:+.6f}, {p[1]:+.6f}, {p[2]:+.6f}) = {v!r}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        print(f"reconstruction written to {args.out}")
    return EXIT_OK


def _poly_from_json(path):
    with open(path) as fh:
        doc = json.load(fh)
    terms = doc["terms"] if isinstance(doc, dict) else doc
    coeffs = {}
    degree = 0
    for term in terms:
        exps = tuple(int(e) for e in term["exponents"])
        coeffs[exps] = coeffs.get(exps, 0.0) + float(term["coefficient"])
        degree = max(degree, sum(exps))
    return SphericalPolynomial(degree, coeffs)


def cmd_rd_quad(args):
    curve = read_curve_json(args.curve)
    poly = _poly_from_json(args.poly)
    value = rd_weighted_integral(
        poly, curve, args.order, degree=args.degree, tol=args.integration_tol
    )
    exact = sum(
        c * rd_exact_moment(m) for m, c in poly.coefficients.items()
    )
    gap = abs(value - exact)
    print(f"rule value  = {value!r}")
    print(f"exact value = {exact!r}")
    print(f"gap = {gap:.3e}")
    return EXIT_OK


def cmd_points_verify(args):
    if args.name:
        points = builtin_design(args.name)
    else:
        points = load_points(args.file, args.degree)
    report = point_design_residual(points, args.degree)
    _print_residual_table(report)
    if report.max_residual > CERTIFY_TOL:
        print(f"FAIL: not a degree-{args.degree} design within {CERTIFY_TOL}")
        return EXIT_CERTIFICATE
    print(f"PASS: certified at degree {args.degree}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="designcurves",
        description="Spherical design curves: construction, certification, quadrature.",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=0,
        help="random seed (all current commands are deterministic; kept for "
        "reproducible extensions)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-family", help="solve the closed-family design parameter")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-12, help="residual tolerance on the solve")
    p.add_argument("--integration-tol", type=float, default=1e-10)
    p.add_argument("--threshold", type=float, default=1e-8, help="certificate threshold")
    p.add_argument("--out", help="write the solved curve as JSON")
    p.set_defaults(func=cmd_solve_family)

    p = sub.add_parser("assemble", help="assemble a circle curve over design points")
    p.add_argument("--points", required=True, help="built-in name or xyz file")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--radius", type=float, default=None, help="explicit circle radius")
    p.add_argument(
        "--radius-factor",
        type=float,
        default=1.0,
        help="multiple of the covering radius to use as circle radius",
    )
    p.add_argument("--integration-tol", type=float, default=1e-10)
    p.add_argument("--threshold", type=float, default=1e-8)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("verify", help="certify a curve JSON at a degree")
    p.add_argument("--curve", required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--integration-tol", type=float, default=1e-10)
    p.add_argument("--threshold", type=float, default=1e-8)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sample", help="sample a curve JSON into a trace CSV")
    p.add_argument("--curve", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("reconstruct", help="recover a polynomial from a trace CSV")
    p.add_argument("--curve", required=True)
    p.add_argument("--trace", required=True, help="CSV with columns s,value")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--eval-points", help="xyz file of points to evaluate at")
    p.add_argument("--out", help="write coefficients and values as JSON")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("rd-quad", help="exp(-|x|)-weighted R^3 integral of a polynomial")
    p.add_argument("--curve", required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--poly", required=True, help="JSON with monomial terms")
    p.add_argument("--integration-tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_rd_quad)

    p = sub.add_parser("points-verify", help="certify a point set at a degree")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--file")
    group.add_argument("--name", choices=BUILTIN_NAMES)
    p.add_argument("--degree", type=int, required=True)
    p.set_defaults(func=cmd_points_verify)

    return parser


def main(argv=None):
    threads = os.environ.get("DESIGN_CURVES_THREADS")
    if threads:
        # best effort: cap BLAS pools spawned after this point; the package
        # itself runs single-threaded
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    np.random.seed(args.seed)
    try:
        return args.func(args)
    except AssemblyError as exc:
        print(f"connectivity failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except (IntegrationError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FileNotFoundError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RuntimeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
