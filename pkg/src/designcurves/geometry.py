"""Core geometry of the unit sphere: points, rotations, geodesics, spherical caps."""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NORM_TOL",
    "UnitVector",
    "Rotation",
    "SphericalCap",
    "normalized",
    "coords_of",
    "geodesic_distance",
    "chord_geodesic",
    "rotation_taking",
    "cap_boundary_frame",
    "fibonacci_mesh",
    "mesh_resolution",
]

NORM_TOL = 1e-12


def coords_of(x):
    """Cartesian coordinates of a UnitVector or array-like, as a float ndarray."""
    if isinstance(x, UnitVector):
        return x.coords
    return np.asarray(x, dtype=float)


@dataclass(frozen=True, eq=False)
class UnitVector:
    """A point on S^d held as d+1 Cartesian coordinates of unit Euclidean norm."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coords, dtype=float))
        if c.ndim != 1 or c.size < 2:
            raise ValueError("expected at least 2 Cartesian coordinates")
        n = np.linalg.norm(c)
        if abs(n - 1.0) > NORM_TOL:
            raise ValueError(f"not a unit vector: norm = {n!r}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def dim(self):
        """Dimension d of the sphere S^d the point lives on."""
        return self.coords.size - 1

    def __array__(self, dtype=None, copy=None):
        return np.array(self.coords, dtype=dtype)

    def __repr__(self):
        return f"UnitVector({self.coords.tolist()!r})"


def normalized(x):
    """Rescale an array-like to unit norm and wrap it as a UnitVector."""
    c = np.asarray(x, dtype=float)
    n = np.linalg.norm(c)
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return UnitVector(c / n)


@dataclass(frozen=True, eq=False)
class Rotation:
    """A proper rotation of R^{d+1}: orthogonal matrix with determinant +1."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
            raise ValueError("rotation matrix must be square of size >= 2")
        err = np.abs(m.T @ m - np.eye(m.shape[0])).max()
        if err > NORM_TOL:
            raise ValueError(f"matrix is not orthogonal: max |M^T M - I| = {err:.3g}")
        det = np.linalg.det(m)
        if abs(det - 1.0) > 1e-9:
            raise ValueError(f"not a proper rotation: det = {det!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def apply(self, x):
        return UnitVector(self.matrix @ coords_of(x))


@dataclass(frozen=True, eq=False)
class SphericalCap:
    """Geodesic ball B_r(x) in S^d with angular radius 0 < r < pi/2."""

    center: UnitVector
    radius: float

    def __post_init__(self):
        center = self.center
        if not isinstance(center, UnitVector):
            center = UnitVector(center)
        r = float(self.radius)
        if not 0.0 < r < math.pi / 2:
            raise ValueError(f"cap radius must lie strictly in (0, pi/2), got {r!r}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", r)


def geodesic_distance(x, y):
    """Geodesic (great-circle) distance between two points of S^d, in radians.

    The inner product is clamped to [-1, 1] before arccos so that roundoff at
    distance 0 or pi cannot leave the arccos domain.
    """
    a = coords_of(x)
    b = coords_of(y)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.arccos(np.clip(np.dot(a, b), -1.0, 1.0)))


def chord_geodesic(x, y):
    """Geodesic distance computed through the chord length.

    Numerically equivalent to geodesic_distance away from the ends, but
    resolves tiny separations exactly, where arccos of an inner product
    cannot go below ~1.5e-8.
    """
    a = coords_of(x)
    b = coords_of(y)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return 2.0 * math.asin(min(1.0, 0.5 * float(np.linalg.norm(a - b))))


def _deterministic_orthogonal(x):
    """Unit vector orthogonal to x, chosen deterministically.

    Uses the smallest-index coordinate axis at angle >= arccos(0.9) from x,
    which keeps the Gram-Schmidt step well conditioned; a unit vector can have
    at most one component larger than 0.9.
    """
    for i in range(x.size):
        if abs(x[i]) <= 0.9:
            w = -x[i] * x
            w[i] += 1.0
            return w / np.linalg.norm(w)
    raise AssertionError("unreachable: unit vector with two components > 0.9")


def rotation_taking(u, v):
    """A rotation R with R u = v, deterministic in (u, v).

    Built from two reflections: one swapping u and v across their bisector
    hyperplane, one fixing v. The construction is numerically exact for every
    configuration including v = -u, where it reduces to a half-turn about a
    deterministically chosen axis orthogonal to u.
    """
    a = coords_of(u)
    b = coords_of(v)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    n = a.size
    diff = a - b
    nd = np.linalg.norm(diff)
    if nd < 1e-15:
        return Rotation(np.eye(n))
    n1 = diff / nd
    w = _deterministic_orthogonal(b)
    h1 = np.eye(n) - 2.0 * np.outer(n1, n1)   # maps a -> b, det -1
    h2 = np.eye(n) - 2.0 * np.outer(w, w)     # fixes b, det -1
    return Rotation(h2 @ h1)


def cap_boundary_frame(cap):
    """Offset and orthonormal frame parametrizing the boundary circle of a cap on S^2.

    Returns ``(offset, u, v)`` with ``offset = center * cos(r)`` such that

        theta -> offset + sin(r) * (u cos(theta) + v sin(theta))

    traces the boundary, a Euclidean circle of radius sin(r). The triple
    (u, v, center) is right-handed, so increasing theta runs counterclockwise
    as seen from outside the sphere above the cap center. The frame depends
    deterministically on the center only.
    """
    x = cap.center.coords
    if x.size != 3:
        raise ValueError("cap boundary frames are only defined on S^2")
    u = _deterministic_orthogonal(x)
    v = np.cross(x, u)
    v = v / np.linalg.norm(v)
    return x * math.cos(cap.radius), UnitVector(u), UnitVector(v)


def fibonacci_mesh(n):
    """n quasi-uniform points on S^2 from the golden-angle lattice, as an (n, 3) array.

    Deterministic; the covering radius of the mesh decays like O(n^{-1/2})
    (see mesh_resolution).
    """
    n = int(n)
    if n < 1:
        raise ValueError("mesh size must be >= 1")
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = i * (math.pi * (3.0 - math.sqrt(5.0)))
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def mesh_resolution(n):
    """Upper bound on the covering radius of fibonacci_mesh(n), in radians.

    Measured covering radii of the lattice stay below 2.7 n^{-1/2} across
    n = 10 .. 10^5 (see the geometry tests); the bound here adds margin.
    """
    return min(math.pi, 3.0 / math.sqrt(n))
