"""Spherical t-design point sets: built-in exact sets, file ingestion, certification."""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .curves import CoveringRadiusEstimate, QuadratureReport
from .geometry import fibonacci_mesh, mesh_resolution
from .harmonics import monomial_basis, monomial_matrix, sphere_monomial_integral

__all__ = [
    "CERTIFY_TOL",
    "DesignPointSet",
    "builtin_design",
    "BUILTIN_NAMES",
    "load_points",
    "point_design_residual",
    "covering_radius_points",
]

CERTIFY_TOL = 1e-9
_MIN_SEPARATION = 1e-9


@dataclass(eq=False)
class DesignPointSet:
    """Finite subset of S^2 with a declared exact-quadrature degree.

    `certified` is set only after the residual oracle confirms the declared
    degree within CERTIFY_TOL. `covering_radius` holds the exact value for the
    built-in solids and a cached mesh estimate otherwise.
    """

    coords: np.ndarray
    degree: int
    source: str
    covering_radius: float = None
    certified: bool = False
    max_residual: float = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.coords, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 1:
            raise ValueError("expected an (n, 3) array of points on S^2")
        norms = np.linalg.norm(pts, axis=1)
        if np.abs(norms - 1.0).max() > 1e-12:
            raise ValueError("points must be unit vectors (normalize before building)")
        if pts.shape[0] > 1:
            dots = np.clip(pts @ pts.T, -1.0, 1.0)
            np.fill_diagonal(dots, -1.0)
            if np.arccos(dots.max()) <= _MIN_SEPARATION:
                raise ValueError("point set contains (near-)duplicate points")
        pts.setflags(write=False)
        self.coords = pts
        self.degree = int(self.degree)

    @property
    def n_points(self):
        return self.coords.shape[0]


def _tetrahedron():
    v = np.array(
        [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float
    ) / math.sqrt(3)
    return v, 2, math.acos(1.0 / 3.0)


def _octahedron():
    v = np.vstack([np.eye(3), -np.eye(3)])
    return v, 3, math.acos(1.0 / math.sqrt(3.0))


def _cube():
    v = np.array(
        [[sx, sy, sz] for sx in (1, -1) for sy in (1, -1) for sz in (1, -1)],
        dtype=float,
    ) / math.sqrt(3)
    return v, 3, math.acos(1.0 / math.sqrt(3.0))


def _icosahedron():
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    c = math.sqrt(1.0 + phi * phi)
    rows = []
    for s1 in (1, -1):
        for s2 in (1, -1):
            rows.append([0.0, s1 / c, s2 * phi / c])
            rows.append([s1 / c, s2 * phi / c, 0.0])
            rows.append([s2 * phi / c, 0.0, s1 / c])
    # farthest points from the vertices are the 20 face centers
    rho = math.acos(math.sqrt((5.0 + 2.0 * math.sqrt(5.0)) / 15.0))
    return np.array(rows), 5, rho


_BUILTINS = {
    "tetrahedron": _tetrahedron,
    "octahedron": _octahedron,
    "cube": _cube,
    "icosahedron": _icosahedron,
}

BUILTIN_NAMES = tuple(sorted(_BUILTINS))


def builtin_design(name):
    """One of the exact built-in design sets: tetrahedron, octahedron, cube, icosahedron.

    The declared degree is re-validated by the residual oracle at build time.
    """
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise ValueError(
            f"unknown built-in design {name!r}; choose from {', '.join(BUILTIN_NAMES)}"
        ) from None
    coords, degree, rho = factory()
    ds = DesignPointSet(coords, degree, source=name, covering_radius=rho)
    report = point_design_residual(ds, degree)
    ds.max_residual = report.max_residual
    if report.max_residual > 1e-12:
        raise AssertionError(
            f"built-in set {name} failed its degree-{degree} certificate: "
            f"{report.max_residual:.3g}"
        )
    ds.certified = True
    return ds


def load_points(path, claimed_t):
    """Read a design point set from a text file (one "x y z" triple per line).

    Lines starting with '#' are skipped. Coordinates within 1e-6 of unit norm
    are normalized; anything farther off is rejected with its line number.
    The set is always run through the residual oracle at the claimed degree;
    if it fails CERTIFY_TOL it is still returned, uncertified, with a warning.
    """
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 3:
                raise ValueError(
                    f"{path}:{lineno}: expected 3 coordinates, got {len(parts)}"
                )
            try:
                xyz = [float(v) for v in parts]
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: non-numeric coordinate in {text!r}"
                ) from None
            norm = math.sqrt(sum(v * v for v in xyz))
            if abs(norm - 1.0) > 1e-6:
                raise ValueError(
                    f"{path}:{lineno}: point has norm {norm!r}, too far from 1"
                )
            rows.append([v / norm for v in xyz])
    if not rows:
        raise ValueError(f"{path}: no points")
    ds = DesignPointSet(np.asarray(rows), int(claimed_t), source=str(path))
    report = point_design_residual(ds, ds.degree)
    ds.max_residual = report.max_residual
    if report.max_residual <= CERTIFY_TOL:
        ds.certified = True
    else:
        warnings.warn(
            f"{path}: residual {report.max_residual:.3g} at degree {claimed_t} "
            f"exceeds {CERTIFY_TOL}; set loaded uncertified",
            stacklevel=2,
        )
    return ds


def point_design_residual(points, t):
    """Residuals of the equal-weight point average against exact sphere moments."""
    basis = monomial_basis(t)
    means = monomial_matrix(basis, points.coords).mean(axis=0)
    residuals = {
        m: abs(val - sphere_monomial_integral(m)) for m, val in zip(basis, means)
    }
    return QuadratureReport(degree=int(t), residuals=residuals, curve_length=None)


def covering_radius_points(points, mesh_size=20000):
    """Covering radius of the point set, estimated on a Fibonacci mesh.

    Returns the estimate with the mesh resolution as its error bar; the value
    is cached on the set when no radius is stored yet.
    """
    mesh_size = int(mesh_size)
    if mesh_size < 1:
        raise ValueError("mesh size must be >= 1")
    mesh = fibonacci_mesh(mesh_size)
    best_dot = (mesh @ points.coords.T).max(axis=1)
    value = float(np.arccos(np.clip(best_dot, -1.0, 1.0)).max())
    estimate = CoveringRadiusEstimate(value, mesh_resolution(mesh_size))
    if points.covering_radius is None:
        points.covering_radius = float(estimate)
    return estimate
