"""Circles around design points, their intersection graph, and the curve assembly.

Placing equally-oriented circles of one radius around certified design points
yields exact quadrature for the design's degree regardless of the radius; the
radius only decides whether the circles connect into a single trajectory.
With the radius at the covering radius of the point set the circle graph is
connected, every intersection vertex has equal in- and out-degree, and an
Euler circuit stitches all arcs into one closed curve.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .curves import PiecewiseCurve, circle_arc_segment
from .geometry import SphericalCap, UnitVector, cap_boundary_frame, chord_geodesic
from .points import CERTIFY_TOL, covering_radius_points, point_design_residual

__all__ = [
    "AssemblyError",
    "OrientedCircle",
    "IntersectionVertex",
    "Arc",
    "ArcGraph",
    "oriented_circle",
    "circle_pair_intersection",
    "neighbor_graph",
    "graph_connected",
    "build_arc_graph",
    "strong_connectivity",
    "euler_circuit",
    "assemble_design_curve",
    "assemble_report",
    "AssemblyReport",
]

CLUSTER_TOL = 1e-8
TANGENCY_TOL = 1e-9


class AssemblyError(RuntimeError):
    """The circle configuration cannot be assembled into a single closed curve."""


@dataclass(frozen=True, eq=False)
class OrientedCircle:
    """Boundary circle of a spherical cap with a fixed traversal direction.

    orientation +1 runs counterclockwise as seen from outside the sphere above
    the cap center (the frame from cap_boundary_frame is right-handed).
    """

    cap: SphericalCap
    axis_u: np.ndarray
    axis_v: np.ndarray
    orientation: int
    id: int

    def point_at(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        c = self.cap.center.coords
        r = self.cap.radius
        return c * math.cos(r) + math.sin(r) * (
            np.outer(np.cos(theta), self.axis_u) + np.outer(np.sin(theta), self.axis_v)
        )

    def angle_of(self, point):
        p = np.asarray(point, dtype=float)
        return float(np.arctan2(p @ self.axis_v, p @ self.axis_u))


def oriented_circle(center, radius, circle_id=0, orientation=1):
    """Oriented boundary circle of the cap B_radius(center)."""
    cap = SphericalCap(
        center if isinstance(center, UnitVector) else UnitVector(np.asarray(center)),
        radius,
    )
    _, u, v = cap_boundary_frame(cap)
    return OrientedCircle(
        cap=cap,
        axis_u=u.coords,
        axis_v=v.coords,
        orientation=1 if orientation >= 0 else -1,
        id=int(circle_id),
    )


def circle_pair_intersection(c1, c2, tangency_tol=TANGENCY_TOL):
    """Intersection points of two equal-radius cap-boundary circles on S^2.

    Solves <x, z> = <y, z> = cos r on the unit sphere. Two points when the
    center distance is below 2r, one (tangency) when it is within
    tangency_tol of 2r, none beyond. Coincident centers are rejected since
    the circles coincide as sets.
    """
    x = c1.cap.center.coords
    y = c2.cap.center.coords
    r = c1.cap.radius
    if abs(r - c2.cap.radius) > 1e-12:
        raise ValueError("intersection expects circles of one common radius")
    dist = chord_geodesic(x, y)
    if dist <= 1e-12:
        raise ValueError("coincident circle centers: the circles coincide")
    if dist > 2 * r + tangency_tol:
        return []
    cos_r = math.cos(r)
    g = float(x @ y)
    p = cos_r / (1.0 + g)
    mid = p * (x + y)
    if abs(dist - 2 * r) <= tangency_tol:
        return [UnitVector(mid / np.linalg.norm(mid))]
    disc = 1.0 - p * p * 2.0 * (1.0 + g)
    normal = np.cross(x, y)
    m = math.sqrt(max(disc, 0.0) / (1.0 - g * g))
    return [UnitVector(mid + m * normal), UnitVector(mid - m * normal)]


def neighbor_graph(points, r):
    """Adjacency lists over a point set: an edge where caps of radius r overlap.

    Points x, y are adjacent when dist(x, y) <= 2r.
    """
    if not 0.0 < r < math.pi / 2:
        raise ValueError("radius must lie strictly in (0, pi/2)")
    coords = points.coords
    n = coords.shape[0]
    dots = np.clip(coords @ coords.T, -1.0, 1.0)
    dist = np.arccos(dots)
    adjacency = [
        [j for j in range(n) if j != i and dist[i, j] <= 2.0 * r] for i in range(n)
    ]
    return adjacency


def graph_connected(adjacency):
    """Connectivity of an undirected graph given as adjacency lists."""
    n = len(adjacency)
    if n == 0:
        return True
    seen = {0}
    stack = [0]
    while stack:
        for j in adjacency[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == n


@dataclass(eq=False)
class IntersectionVertex:
    """A point where circles meet, with one (circle, angle) incidence per circle."""

    point: np.ndarray
    incidences: list  # of (circle id, angle on that circle)


@dataclass(frozen=True, eq=False)
class Arc:
    """Directed arc of one circle between consecutive intersection angles.

    Angles are unwrapped along the circle's orientation so the sweep
    theta1 - theta0 is positive for orientation +1 and negative for -1.
    start == end == -1 marks the closed arc of an intersection-free circle.
    """

    circle: int
    theta0: float
    theta1: float
    start: int
    end: int


@dataclass(eq=False)
class ArcGraph:
    """Directed multigraph of circle arcs between intersection vertices."""

    circles: list
    vertices: list
    arcs: list

    @property
    def degrees_balanced(self):
        out_deg = {}
        in_deg = {}
        for arc in self.arcs:
            if arc.start >= 0:
                out_deg[arc.start] = out_deg.get(arc.start, 0) + 1
                in_deg[arc.end] = in_deg.get(arc.end, 0) + 1
        return all(
            out_deg.get(v, 0) == in_deg.get(v, 0)
            for v in set(out_deg) | set(in_deg)
        )


def _cluster_points(raw):
    """Greedy clustering of near-coincident intersection points.

    raw holds (point, circle_id, angle) records in deterministic order;
    symmetric configurations make three or more circles meet in one point, so
    records within CLUSTER_TOL merge into one vertex.
    """
    chord_tol = 2.0 * math.sin(CLUSTER_TOL / 2.0)
    reps = []
    clusters = []
    for point, cid, theta in raw:
        found = None
        for i, rep in enumerate(reps):
            if np.linalg.norm(rep - point) <= chord_tol:
                found = i
                break
        if found is None:
            reps.append(point)
            clusters.append([(cid, theta)])
        else:
            clusters[found].append((cid, theta))
    return reps, clusters


def build_arc_graph(circles, tangency_tol=TANGENCY_TOL):
    """Intersection vertices and directed arcs of a family of equal circles.

    Every circle must meet at least one other unless there is a single circle,
    which becomes one closed arc. Intersection points are clustered within
    CLUSTER_TOL so that vertices shared by three or more circles (as happens
    for symmetric designs) carry one incidence per circle; each vertex then
    automatically has equal in- and out-degree.
    """
    circles = list(circles)
    if not circles:
        raise ValueError("no circles to assemble")
    if len(circles) == 1:
        c = circles[0]
        sweep = 2.0 * math.pi * c.orientation
        return ArcGraph(
            circles=circles,
            vertices=[],
            arcs=[Arc(circle=c.id, theta0=0.0, theta1=sweep, start=-1, end=-1)],
        )

    raw = []
    touched = set()
    for i in range(len(circles)):
        for j in range(i + 1, len(circles)):
            pts = circle_pair_intersection(circles[i], circles[j], tangency_tol)
            if pts:
                touched.add(i)
                touched.add(j)
            for p in pts:
                pc = p.coords
                raw.append((pc, circles[i].id, circles[i].angle_of(pc)))
                raw.append((pc, circles[j].id, circles[j].angle_of(pc)))
    isolated = [circles[i].id for i in range(len(circles)) if i not in touched]
    if isolated:
        raise AssemblyError(
            f"circles {isolated} intersect no other circle; "
            "the radius is too small for the point spacing"
        )

    reps, clusters = _cluster_points(raw)
    angle_tol = 4.0 * CLUSTER_TOL / min(math.sin(c.cap.radius) for c in circles)
    vertices = []
    for rep, incs in zip(reps, clusters):
        merged = []
        for cid, theta in incs:
            duplicate = any(
                cid == c0 and _angle_gap(theta, t0) <= angle_tol for c0, t0 in merged
            )
            if not duplicate:
                merged.append((cid, theta))
        if len(merged) < 2:
            raise AssemblyError("intersection vertex with fewer than two circles")
        vertices.append(IntersectionVertex(point=rep, incidences=merged))

    by_circle = {c.id: [] for c in circles}
    for v_idx, vertex in enumerate(vertices):
        for cid, theta in vertex.incidences:
            by_circle[cid].append((theta, v_idx))

    arcs = []
    for c in circles:
        marks = by_circle[c.id]
        if not marks:
            raise AssemblyError(f"circle {c.id} lost all intersections")
        marks.sort(key=lambda m: m[0], reverse=(c.orientation < 0))
        gaps = [
            abs(_angle_gap(marks[i][0], marks[(i + 1) % len(marks)][0]))
            for i in range(len(marks))
        ]
        if len(marks) > 1 and min(gaps) * math.sin(c.cap.radius) < tangency_tol:
            raise AssemblyError(
                f"unresolved near-tangency on circle {c.id}: "
                "distinct vertices closer than the tangency tolerance"
            )
        two_pi = 2.0 * math.pi * c.orientation
        for i, (theta, v_idx) in enumerate(marks):
            nxt_theta, nxt_idx = marks[(i + 1) % len(marks)]
            if i + 1 == len(marks):
                nxt_theta = nxt_theta + two_pi
            arcs.append(
                Arc(circle=c.id, theta0=theta, theta1=nxt_theta, start=v_idx, end=nxt_idx)
            )

    graph = ArcGraph(circles=circles, vertices=vertices, arcs=arcs)
    if not graph.degrees_balanced:
        raise AssertionError("arc construction produced unbalanced vertex degrees")
    return graph


def _angle_gap(a, b):
    d = (b - a) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


def strong_connectivity(graph):
    """Whether every arc is reachable from every vertex along directed arcs.

    A single closed intersection-free arc counts as strongly connected.
    """
    active = {a.start for a in graph.arcs if a.start >= 0} | {
        a.end for a in graph.arcs if a.end >= 0
    }
    if not active:
        return len(graph.arcs) == 1
    forward = {v: [] for v in active}
    backward = {v: [] for v in active}
    for a in graph.arcs:
        if a.start < 0:
            return False
        forward[a.start].append(a.end)
        backward[a.end].append(a.start)

    def reaches_all(adj):
        start = next(iter(active))
        seen = {start}
        stack = [start]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen == active

    return reaches_all(forward) and reaches_all(backward)


def euler_circuit(graph):
    """Arc indices of a closed walk using every arc exactly once (Hierholzer).

    Requires balanced degrees and strong connectivity. The start vertex is the
    lexicographically smallest vertex point and outgoing arcs are consumed in
    (circle, angle) order, so the circuit is deterministic.
    """
    if len(graph.arcs) == 1 and graph.arcs[0].start < 0:
        return [0]
    if not graph.degrees_balanced:
        raise ValueError("Euler circuit requires equal in- and out-degrees")
    if not strong_connectivity(graph):
        raise ValueError("Euler circuit requires a strongly connected arc graph")

    out_arcs = {}
    for idx, arc in enumerate(graph.arcs):
        out_arcs.setdefault(arc.start, []).append(idx)
    for v in out_arcs:
        out_arcs[v].sort(key=lambda i: (graph.arcs[i].circle, graph.arcs[i].theta0))

    start = min(
        range(len(graph.vertices)), key=lambda i: tuple(graph.vertices[i].point)
    )
    ptr = {v: 0 for v in out_arcs}
    vertex_stack = [start]
    arc_stack = []
    circuit = []
    while vertex_stack:
        v = vertex_stack[-1]
        if ptr.get(v, 0) < len(out_arcs.get(v, ())):
            idx = out_arcs[v][ptr[v]]
            ptr[v] += 1
            vertex_stack.append(graph.arcs[idx].end)
            arc_stack.append(idx)
        else:
            vertex_stack.pop()
            if arc_stack:
                circuit.append(arc_stack.pop())
    circuit.reverse()
    if len(circuit) != len(graph.arcs):
        raise AssertionError("Euler circuit did not cover every arc")
    return circuit


@dataclass(eq=False)
class AssemblyReport:
    """Assembled curve together with its graph, circuit, and certificate data."""

    curve: PiecewiseCurve
    graph: ArcGraph
    circuit: list
    radius: float
    point_residual: float


def _curve_from_circuit(graph, circuit):
    by_id = {c.id: c for c in graph.circles}
    segments = []
    for idx in circuit:
        arc = graph.arcs[idx]
        c = by_id[arc.circle]
        segments.append(
            circle_arc_segment(
                c.cap, c.axis_u, c.axis_v, arc.theta0, arc.theta1, c.orientation
            )
        )
    return PiecewiseCurve(tuple(segments), closed=True)


def assemble_report(points, t, r=None, tangency_tol=TANGENCY_TOL):
    """Assemble the circle curve over a design point set, keeping the graph data.

    The default radius is the covering radius of the set (exact for built-in
    solids, mesh-estimated otherwise); exactness of the quadrature holds for
    any radius, so r is exposed for experiments, but connectivity can fail
    when r is small relative to the point spacing.
    """
    t = int(t)
    if points.max_residual is None:
        report = point_design_residual(points, t)
        points.max_residual = report.max_residual
        points.certified = report.max_residual <= CERTIFY_TOL
    point_residual = points.max_residual
    if points.degree < t or point_residual > CERTIFY_TOL:
        warnings.warn(
            f"point set {points.source!r} is not certified at degree {t} "
            f"(declared {points.degree}, residual {point_residual:.3g}); "
            "the curve certificate inherits this error",
            stacklevel=2,
        )
    if r is None:
        r = points.covering_radius
        if r is None:
            r = float(covering_radius_points(points))
    r = float(r)
    if not 0.0 < r < math.pi / 2:
        raise ValueError("assembly radius must lie strictly in (0, pi/2)")

    circles = [
        oriented_circle(points.coords[i], r, circle_id=i, orientation=1)
        for i in range(points.n_points)
    ]
    graph = build_arc_graph(circles, tangency_tol)
    if not strong_connectivity(graph):
        raise AssemblyError(
            "arc graph is not strongly connected; retry with a larger radius"
        )
    circuit = euler_circuit(graph)
    curve = _curve_from_circuit(graph, circuit)
    return AssemblyReport(
        curve=curve,
        graph=graph,
        circuit=circuit,
        radius=r,
        point_residual=point_residual,
    )


def assemble_design_curve(points, t, r=None):
    """Single closed curve of circle arcs realizing exact degree-t quadrature.

    Circles of one radius are placed around every point of a certified
    t-design set, intersections become vertices, and an Euler circuit chains
    all arcs. The total length is n_points * 2 pi sin(r).
    """
    return assemble_report(points, t, r=r).curve
