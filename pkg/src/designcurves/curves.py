"""Piecewise-smooth closed curves on S^2: evaluation, line integrals, certificates."""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geometry import (
    SphericalCap,
    UnitVector,
    cap_boundary_frame,
    chord_geodesic,
    coords_of,
    fibonacci_mesh,
    mesh_resolution,
)
from .harmonics import monomial_basis, monomial_matrix, sphere_monomial_integral

__all__ = [
    "CLOSURE_TOL",
    "CurveSegment",
    "PiecewiseCurve",
    "QuadratureReport",
    "CoveringRadiusEstimate",
    "IntegrationError",
    "circle_arc_segment",
    "full_circle_segment",
    "callback_segment",
    "curve_point",
    "line_integral",
    "line_integral_many",
    "curve_length",
    "design_residual",
    "curve_covering_radius",
    "curve_to_json",
    "curve_from_json",
    "write_curve_json",
    "read_curve_json",
    "write_trace_csv",
]

CLOSURE_TOL = 1e-9

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)


class IntegrationError(RuntimeError):
    """Adaptive integration did not reach the requested tolerance."""

    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved error estimate {achieved:.3g})")
        self.achieved = achieved


@dataclass(frozen=True, eq=False)
class CurveSegment:
    """One smooth piece of a curve, parametrized over the local interval [0, 1].

    `point_fn` maps an array of local parameters to points (m, 3) on S^2 and
    `velocity_fn` to the derivative with respect to the local parameter.
    `params` carries a JSON-serializable description for the known kinds
    ("circle-arc", "tennis"); it is None for opaque callbacks.
    """

    kind: str
    point_fn: object
    velocity_fn: object
    params: dict = None

    def point(self, u):
        return self.point_fn(np.atleast_1d(np.asarray(u, dtype=float)))

    def velocity(self, u):
        return self.velocity_fn(np.atleast_1d(np.asarray(u, dtype=float)))

    def speed(self, u):
        return np.linalg.norm(self.velocity(u), axis=1)

    @property
    def start(self):
        return self.point(0.0)[0]

    @property
    def end(self):
        return self.point(1.0)[0]

    def reversed(self):
        if self.kind == "circle-arc":
            p = dict(self.params)
            p["theta0"], p["theta1"] = p["theta1"], p["theta0"]
            p["orientation"] = -p["orientation"]
            return circle_arc_segment(
                SphericalCap(np.asarray(p["center"]), p["radius"]),
                np.asarray(p["axis_u"]),
                np.asarray(p["axis_v"]),
                p["theta0"],
                p["theta1"],
                p["orientation"],
            )
        pf, vf = self.point_fn, self.velocity_fn
        params = None
        if self.params is not None:
            params = dict(self.params)
            if "s0" in params and "s1" in params:
                params["s0"], params["s1"] = params["s1"], params["s0"]
        return CurveSegment(
            kind=self.kind,
            point_fn=lambda u: pf(1.0 - u),
            velocity_fn=lambda u: -vf(1.0 - u),
            params=params,
        )


def circle_arc_segment(cap, axis_u, axis_v, theta0, theta1, orientation=1):
    """Arc of the boundary circle of `cap`, swept linearly from theta0 to theta1.

    The sweep direction is the sign of theta1 - theta0; orientation records the
    circle's global orientation for bookkeeping and serialization.
    """
    center = cap.center.coords
    r = cap.radius
    u = coords_of(axis_u)
    v = coords_of(axis_v)
    offset = center * math.cos(r)
    sin_r = math.sin(r)
    th0 = float(theta0)
    th1 = float(theta1)
    sweep = th1 - th0
    if sweep == 0.0:
        raise ValueError("degenerate arc: zero angular sweep")

    def point_fn(s):
        th = th0 + sweep * s
        return offset[None, :] + sin_r * (
            np.outer(np.cos(th), u) + np.outer(np.sin(th), v)
        )

    def velocity_fn(s):
        th = th0 + sweep * s
        return sweep * sin_r * (-np.outer(np.sin(th), u) + np.outer(np.cos(th), v))

    params = {
        "center": center.tolist(),
        "radius": r,
        "axis_u": u.tolist(),
        "axis_v": v.tolist(),
        "theta0": th0,
        "theta1": th1,
        "orientation": int(orientation),
    }
    return CurveSegment("circle-arc", point_fn, velocity_fn, params)


def full_circle_segment(cap, orientation=1):
    """The whole boundary circle of a cap as one closed arc."""
    _, u, v = cap_boundary_frame(cap)
    sweep = 2 * math.pi * (1 if orientation >= 0 else -1)
    return circle_arc_segment(cap, u, v, 0.0, sweep, orientation)


def callback_segment(point_fn, velocity_fn):
    """Segment defined by arbitrary vectorized point/velocity callables."""
    return CurveSegment("callback", point_fn, velocity_fn, None)


@dataclass(eq=False)
class PiecewiseCurve:
    """Closed, piecewise-smooth curve: ordered segments over a global [0, 1] domain.

    The global parameter splits evenly across segments. Consecutive segments
    must chain within CLOSURE_TOL geodesically, and closed curves must return
    to their starting point; violations are rejected at construction.
    """

    segments: tuple
    closed: bool = True
    _length_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ValueError("a curve needs at least one segment")
        self.segments = segs
        for i in range(len(segs) - 1):
            gap = chord_geodesic(segs[i].end, segs[i + 1].start)
            if gap > CLOSURE_TOL:
                raise ValueError(
                    f"segments {i} and {i + 1} do not chain: geodesic gap {gap:.3g}"
                )
        if self.closed:
            gap = chord_geodesic(segs[-1].end, segs[0].start)
            if gap > CLOSURE_TOL:
                raise ValueError(f"curve is not closed: geodesic gap {gap:.3g}")

    @property
    def n_segments(self):
        return len(self.segments)

    def point(self, s):
        """Points on the curve at global parameters s (scalar or array), shape (m, 3)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if np.any(s < -1e-12) or np.any(s > 1.0 + 1e-12):
            raise ValueError("curve parameter outside [0, 1]")
        n = self.n_segments
        idx = np.minimum((np.clip(s, 0.0, 1.0) * n).astype(int), n - 1)
        local = np.clip(s, 0.0, 1.0) * n - idx
        out = np.empty((s.size, 3))
        for i in range(n):
            mask = idx == i
            if np.any(mask):
                out[mask] = self.segments[i].point(local[mask])
        return out

    def speed(self, s):
        """Speed with respect to the global parameter at s (scalar or array)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        n = self.n_segments
        idx = np.minimum((np.clip(s, 0.0, 1.0) * n).astype(int), n - 1)
        local = np.clip(s, 0.0, 1.0) * n - idx
        out = np.empty(s.size)
        for i in range(n):
            mask = idx == i
            if np.any(mask):
                # local derivative rescales by n segments of global width 1/n
                out[mask] = self.segments[i].speed(local[mask]) * n
        return out

    def reversed(self):
        return PiecewiseCurve(
            tuple(seg.reversed() for seg in reversed(self.segments)), closed=self.closed
        )


def curve_point(curve, s):
    """Point on the curve at global parameter s, as a UnitVector."""
    return UnitVector(curve.point(float(s))[0])


def _integrate_segment(values_fn, budget, max_depth=30, max_panels=20000):
    """Adaptive 15-point Gauss-Legendre over [0, 1] for a vector-valued integrand.

    values_fn(u) -> (m, k) rows of integrand values. A panel is accepted when
    the one-panel and two-panel estimates agree within its share of the error
    budget (max norm over components). Exceeding the depth or total panel
    budget raises IntegrationError with the achieved error estimate, so a
    rough integrand cannot stall the caller.
    """
    panels = [0]

    def panel(a, b):
        panels[0] += 1
        half = 0.5 * (b - a)
        u = 0.5 * (a + b) + half * _GL_NODES
        vals = values_fn(u)
        return half * (_GL_WEIGHTS @ vals)

    def recurse(a, b, whole, budget, depth):
        mid = 0.5 * (a + b)
        left = panel(a, mid)
        right = panel(mid, b)
        err = float(np.max(np.abs(whole - (left + right))))
        if err <= budget:
            return left + right
        if depth >= max_depth or panels[0] > max_panels:
            raise IntegrationError(
                "line integral did not converge within the subdivision budget", err
            )
        half_budget = 0.5 * budget
        return recurse(a, mid, left, half_budget, depth + 1) + recurse(
            mid, b, right, half_budget, depth + 1
        )

    return recurse(0.0, 1.0, panel(0.0, 1.0), budget, 0)


def line_integral_many(curve, fs, tol=1e-10):
    """Line integrals of several scalar functions along the curve at once.

    fs maps points (m, 3) to values (m, k); the result has shape (k,). Each
    component carries an absolute error below tol.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    budget = tol / curve.n_segments
    total = None
    for seg in curve.segments:

        def values_fn(u, seg=seg):
            pts = seg.point(u)
            speeds = np.linalg.norm(seg.velocity(u), axis=1)
            vals = np.atleast_2d(np.asarray(fs(pts), dtype=float))
            if vals.shape[0] != pts.shape[0]:
                vals = vals.T
            return vals * speeds[:, None]

        part = _integrate_segment(values_fn, budget)
        total = part if total is None else total + part
    return np.atleast_1d(total)


def line_integral(curve, f, tol=1e-10):
    """Line integral of a scalar function along the curve.

    f maps points (m, 3) on S^2 to values (m,). The parametrization and
    orientation of the curve do not affect the result.
    """
    return float(line_integral_many(curve, lambda pts: f(pts)[:, None], tol)[0])


def curve_length(curve, tol=1e-10):
    """Arc length of the curve; the value is cached per requested tolerance."""
    cached = curve._length_cache.get("value")
    if cached is not None and curve._length_cache["tol"] <= tol:
        return cached
    value = float(
        line_integral_many(curve, lambda pts: np.ones((pts.shape[0], 1)), tol)[0]
    )
    curve._length_cache["value"] = value
    curve._length_cache["tol"] = tol
    return value


@dataclass(frozen=True, eq=False)
class QuadratureReport:
    """Residuals of equal-weight quadrature against exact sphere moments."""

    degree: int
    residuals: dict  # MonomialIndex -> float
    curve_length: float = None

    @property
    def max_residual(self):
        return max(self.residuals.values())

    @property
    def worst_monomial(self):
        return max(self.residuals, key=self.residuals.get)

    def passed(self, threshold):
        return self.max_residual <= threshold


class CoveringRadiusEstimate(float):
    """Covering-radius estimate carrying its mesh-resolution error bar."""

    def __new__(cls, value, resolution):
        obj = super().__new__(cls, value)
        obj.resolution = float(resolution)
        return obj

    @property
    def value(self):
        return float(self)


def design_residual(curve, t, tol=1e-10):
    """Certificate of exact degree-t quadrature along a closed curve.

    For every monomial of degree <= t the residual is
    |(1/length) * line integral - exact sphere moment|.
    """
    if not curve.closed:
        raise ValueError("design certificates require a closed curve")
    basis = monomial_basis(t)
    integrals = line_integral_many(curve, lambda pts: monomial_matrix(basis, pts), tol)
    length = curve_length(curve, tol)
    residuals = {
        m: abs(val / length - sphere_monomial_integral(m))
        for m, val in zip(basis, integrals)
    }
    return QuadratureReport(degree=int(t), residuals=residuals, curve_length=length)


def _dense_sample(curve, spacing):
    """Sample points along the curve with arc spacing at most `spacing`."""
    pieces = []
    n = curve.n_segments
    for seg in curve.segments:
        probe = seg.speed(np.linspace(0.0, 1.0, 33))
        m = max(8, int(math.ceil(probe.max() / spacing)) + 1)
        pieces.append(seg.point(np.arange(m) / m))
    return np.vstack(pieces)


def curve_covering_radius(curve, mesh_size=20000):
    """Covering radius of the curve's trajectory, estimated on a Fibonacci mesh.

    Returns the largest mesh-to-curve geodesic distance together with the
    combined resolution of the sphere mesh and the curve sampling; the true
    covering radius lies within that resolution of the estimate.
    """
    mesh_size = int(mesh_size)
    if mesh_size < 100:
        raise ValueError("mesh size must be >= 100")
    delta = mesh_resolution(mesh_size)
    samples = _dense_sample(curve, spacing=delta / 2)
    tree = cKDTree(samples)
    chord, _ = tree.query(fibonacci_mesh(mesh_size), k=1)
    geo = 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))
    return CoveringRadiusEstimate(float(geo.max()), delta + delta / 4)


# ---------------------------------------------------------------------------
# serialization


def curve_to_json(curve, certificate=None, tol=1e-10):
    """JSON-ready description of a curve built from serializable segments."""
    segs = []
    n = curve.n_segments
    for i, seg in enumerate(curve.segments):
        if seg.params is None:
            raise ValueError("callback segments cannot be serialized")
        segs.append(
            {"kind": seg.kind, "params": seg.params, "domain": [i / n, (i + 1) / n]}
        )
    doc = {
        "segments": segs,
        "closed": curve.closed,
        "length": curve_length(curve, tol),
    }
    if certificate is not None:
        doc["certificate"] = certificate
    return doc


def curve_from_json(doc):
    """Rebuild a PiecewiseCurve from its JSON description."""
    segs = []
    for entry in doc["segments"]:
        kind = entry["kind"]
        p = entry["params"]
        if kind == "circle-arc":
            cap = SphericalCap(np.asarray(p["center"], dtype=float), p["radius"])
            segs.append(
                circle_arc_segment(
                    cap,
                    np.asarray(p["axis_u"], dtype=float),
                    np.asarray(p["axis_v"], dtype=float),
                    p["theta0"],
                    p["theta1"],
                    p.get("orientation", 1),
                )
            )
        elif kind == "tennis":
            from .tennis import tennis_segment

            segs.append(tennis_segment(p["k"], p["a"], p.get("s0", 0.0), p.get("s1", 1.0)))
        else:
            raise ValueError(f"unknown segment kind {kind!r}")
    return PiecewiseCurve(tuple(segs), closed=bool(doc.get("closed", True)))


def write_curve_json(path, curve, certificate=None, tol=1e-10):
    doc = curve_to_json(curve, certificate=certificate, tol=tol)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def read_curve_json(path):
    with open(path) as fh:
        return curve_from_json(json.load(fh))


def write_trace_csv(path, curve, n):
    """Sample the curve at n uniform global parameters into a CSV trace.

    Columns: s, x, y, z, speed. The endpoint s = 1 is included so closed
    curves visibly return to their start.
    """
    n = int(n)
    if n < 2:
        raise ValueError("need at least 2 samples")
    s = np.linspace(0.0, 1.0, n)
    pts = curve.point(s)
    speeds = curve.speed(s)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", "x", "y", "z", "speed"])
        for i in range(n):
            writer.writerow(
                [repr(float(s[i]))]
                + [repr(float(c)) for c in pts[i]]
                + [repr(float(speeds[i]))]
            )
