"""Polynomials and spherical harmonics on S^2: exact moments, recurrences, kernels.

All surface integrals use the normalized measure (total mass 1); the only
place the unnormalized area 4*pi enters the package is the weighted
R^3 quadrature, where it is explicit.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "MonomialIndex",
    "SphericalPolynomial",
    "KernelSpec",
    "monomial_basis",
    "sphere_monomial_integral",
    "legendre_P",
    "gegenbauer_P",
    "harmonic_space_dimension",
    "circle_average_factor",
    "kernel_spec",
    "reproducing_kernel",
    "kernel_values",
    "harmonic_subspace_basis",
    "sphere_orthonormal_basis",
]


@dataclass(frozen=True)
class MonomialIndex:
    """Exponent multi-index of a monomial in the Cartesian coordinates."""

    exponents: tuple

    def __post_init__(self):
        e = tuple(int(v) for v in self.exponents)
        if len(e) < 2 or any(v < 0 for v in e):
            raise ValueError(f"bad exponent tuple: {self.exponents!r}")
        object.__setattr__(self, "exponents", e)

    @property
    def degree(self):
        return sum(self.exponents)


def _as_index(m):
    return m if isinstance(m, MonomialIndex) else MonomialIndex(tuple(m))


def monomial_basis(t):
    """All monomial indices of degree <= t in 3 variables, lexicographically ordered.

    The count is C(t+3, 3).
    """
    t = int(t)
    if t < 0:
        raise ValueError("degree must be >= 0")
    idx = [
        MonomialIndex((a, b, c))
        for a, b, c in itertools.product(range(t + 1), repeat=3)
        if a + b + c <= t
    ]
    idx.sort(key=lambda m: m.exponents)
    return idx


def _double_factorial(n):
    # (-1)!! = 1 by convention
    if n <= 0:
        return 1
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def sphere_monomial_integral(m):
    """Exact normalized integral of x^a y^b z^c over S^2.

    Zero when any exponent is odd; otherwise
    (2a-1)!! (2b-1)!! (2c-1)!! / (2a+2b+2c+1)!! for exponents (2a, 2b, 2c),
    evaluated in exact integer arithmetic before conversion to float.
    """
    m = _as_index(m)
    if len(m.exponents) != 3:
        raise ValueError("sphere moments are implemented for S^2 (3 exponents) only")
    p, q, r = m.exponents
    if p % 2 or q % 2 or r % 2:
        return 0.0
    num = _double_factorial(p - 1) * _double_factorial(q - 1) * _double_factorial(r - 1)
    den = _double_factorial(p + q + r + 1)
    return float(Fraction(num, den))


def legendre_P(k, u):
    """Legendre polynomial P_k(u) by the three-term recurrence; requires |u| <= 1."""
    if np.any(np.abs(u) > 1.0 + 1e-14):
        raise ValueError("argument outside [-1, 1]")
    return float(_legendre_table(int(k), np.asarray([float(u)]))[-1, 0])


def _legendre_table(t, u):
    """P_k(u) for k = 0..t on an array u, shape (t+1, len(u))."""
    out = np.empty((t + 1, u.size))
    out[0] = 1.0
    if t >= 1:
        out[1] = u
    for k in range(2, t + 1):
        out[k] = ((2 * k - 1) * u * out[k - 1] - (k - 1) * out[k - 2]) / k
    return out


def gegenbauer_P(lam, k, u):
    """Gegenbauer polynomial value: coefficient of r^k in (1 - 2ru + r^2)^(-lam).

    Computed by the standard recurrence; lam must be positive.
    """
    lam = float(lam)
    if lam <= 0.0:
        raise ValueError("Gegenbauer parameter must be positive")
    k = int(k)
    u = float(u)
    prev2, prev1 = 1.0, 2.0 * lam * u
    if k == 0:
        return prev2
    if k == 1:
        return prev1
    for j in range(2, k + 1):
        cur = (2.0 * (j - 1 + lam) * u * prev1 - (j - 2 + 2 * lam) * prev2) / j
        prev2, prev1 = prev1, cur
    return prev1


def harmonic_space_dimension(d, k):
    """Dimension of the spherical-harmonic space of degree k on S^d.

    (2k+d-1)/(d-1) * C(k+d-2, d-2), with value 1 at k = 0.
    """
    d = int(d)
    k = int(k)
    if d < 2 or k < 0:
        raise ValueError("need d >= 2 and k >= 0")
    if k == 0:
        return 1
    num = (2 * k + d - 1) * math.comb(k + d - 2, d - 2)
    q, rem = divmod(num, d - 1)
    if rem:
        raise AssertionError("dimension formula did not divide evenly")
    return q


def circle_average_factor(k, r):
    """Factor scaling a degree-k harmonic's center value to its cap-circle average.

    For f harmonic of degree k on S^2, the normalized integral of f over the
    boundary circle of a cap of radius r equals this factor times f(center).
    Equals P_k(cos r); in particular 1 for k = 0.
    """
    r = float(r)
    if not 0.0 < r < math.pi / 2:
        raise ValueError(f"cap radius must lie strictly in (0, pi/2), got {r!r}")
    return legendre_P(k, math.cos(r))


# ---------------------------------------------------------------------------
# polynomials on the sphere


@dataclass(frozen=True, eq=False)
class SphericalPolynomial:
    """Polynomial of R^3 restricted to S^2, stored as monomial coefficients."""

    degree: int
    coefficients: dict  # MonomialIndex -> float

    def __post_init__(self):
        coeffs = {}
        for m, c in self.coefficients.items():
            m = _as_index(m)
            if len(m.exponents) != 3:
                raise ValueError("expected 3-variable monomials")
            if m.degree > self.degree:
                raise ValueError(
                    f"monomial {m.exponents} exceeds declared degree {self.degree}"
                )
            c = float(c)
            if c != 0.0:
                coeffs[m] = coeffs.get(m, 0.0) + c
        object.__setattr__(self, "coefficients", coeffs)

    def __call__(self, points):
        """Evaluate at one point (3,) or many points (n, 3)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(pts.shape[0])
        for m, c in self.coefficients.items():
            a, b, cc = m.exponents
            out += c * pts[:, 0] ** a * pts[:, 1] ** b * pts[:, 2] ** cc
        if np.ndim(points) == 1:
            return float(out[0])
        return out

    def multiply(self, other):
        prod = {}
        for m1, c1 in self.coefficients.items():
            for m2, c2 in other.coefficients.items():
                key = tuple(x + y for x, y in zip(m1.exponents, m2.exponents))
                prod[key] = prod.get(key, 0.0) + c1 * c2
        return SphericalPolynomial(self.degree + other.degree, prod)

    def integral(self):
        """Exact normalized surface integral over S^2."""
        return sum(c * sphere_monomial_integral(m) for m, c in self.coefficients.items())

    def scaled(self, factor):
        return SphericalPolynomial(
            self.degree, {m: factor * c for m, c in self.coefficients.items()}
        )


def monomial_matrix(basis, points):
    """Values of each monomial in `basis` at `points` (n, 3); shape (n, len(basis))."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    max_exp = [max((m.exponents[j] for m in basis), default=0) for j in range(3)]
    pows = []
    for j in range(3):
        table = np.empty((pts.shape[0], max_exp[j] + 1))
        table[:, 0] = 1.0
        for e in range(1, max_exp[j] + 1):
            table[:, e] = table[:, e - 1] * pts[:, j]
        pows.append(table)
    cols = [
        pows[0][:, m.exponents[0]] * pows[1][:, m.exponents[1]] * pows[2][:, m.exponents[2]]
        for m in basis
    ]
    return np.column_stack(cols)


# ---------------------------------------------------------------------------
# reproducing kernel


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Zonal reproducing kernel for polynomials of degree <= t on S^2.

    k_x(y) = sum_k b_k P_k(<x, y>) with the Gegenbauer parameter lam fixed by
    the sphere dimension; on S^2 (lam = 1/2) the Gegenbauer polynomials reduce
    to Legendre polynomials and b_k = 2k + 1 under the normalized measure.
    The coefficient choice is validated against the independent reproducing
    property oracle in the test suite, not taken on faith.
    """

    degree: int
    coefficients: np.ndarray
    lam: float

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.size != self.degree + 1:
            raise ValueError("need one coefficient per degree 0..t")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)


def kernel_spec(t, d=2):
    """Reproducing-kernel specification for Pi_t restricted to S^d (d = 2 only)."""
    if d != 2:
        raise ValueError("kernels are implemented on S^2 only")
    t = int(t)
    if t < 0:
        raise ValueError("degree must be >= 0")
    b = np.array([2.0 * k + 1.0 for k in range(t + 1)])
    return KernelSpec(degree=t, coefficients=b, lam=(d - 1) / 2.0)


def kernel_values(spec, x, points):
    """Evaluate y -> k_x(y) at many points; x is a UnitVector or (3,) array."""
    xc = np.asarray(x, dtype=float)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if xc.size != 3 or pts.shape[1] != 3:
        raise ValueError("kernels are implemented on S^2 only")
    dots = np.clip(pts @ xc, -1.0, 1.0)
    table = _legendre_table(spec.degree, dots)
    return spec.coefficients @ table


def reproducing_kernel(spec, x, y):
    """Kernel value k_x(y) = sum_k b_k P_k(<x, y>)."""
    return float(kernel_values(spec, x, np.asarray(y, dtype=float))[0])


# ---------------------------------------------------------------------------
# orthonormal bases of the harmonic subspaces, via exact moment Gram matrices


def _gram(basis):
    n = len(basis)
    g = np.empty((n, n))
    for i in range(n):
        ei = basis[i].exponents
        for j in range(i, n):
            ej = basis[j].exponents
            g[i, j] = g[j, i] = sphere_monomial_integral(
                MonomialIndex(tuple(a + b for a, b in zip(ei, ej)))
            )
    return g


def _fix_sign(vec):
    i = int(np.argmax(np.abs(vec)))
    return -vec if vec[i] < 0 else vec


def _poly_from_vector(vec, basis, degree, tol=1e-12):
    coeffs = {m: c for m, c in zip(basis, vec) if abs(c) > tol}
    return SphericalPolynomial(degree, coeffs)


@lru_cache(maxsize=None)
def _harmonic_vectors(k):
    """Orthonormal coefficient vectors for the degree-k harmonics on S^2.

    Vectors are expressed over monomial_basis(k) and are orthonormal in the
    exact-moment inner product <p, q> = integral(p q) on S^2. Built by
    removing the projection onto polynomials of degree < k from the exact
    degree-k monomials and orthonormalizing the remainder; the resulting count
    must match the harmonic space dimension 2k + 1.
    """
    basis = monomial_basis(k)
    g = _gram(basis)
    if k == 0:
        return (np.array([1.0]),)

    lower = []
    for j in range(k):
        for vec in _harmonic_vectors(j):
            padded = np.zeros(len(basis))
            low_basis = monomial_basis(j)
            pos = {m.exponents: i for i, m in enumerate(basis)}
            for m, c in zip(low_basis, vec):
                padded[pos[m.exponents]] = c
            lower.append(padded)
    w = np.column_stack(lower)  # G-orthonormal columns spanning Pi_{k-1}

    exact_cols = [i for i, m in enumerate(basis) if m.degree == k]
    e = np.zeros((len(basis), len(exact_cols)))
    for col, i in enumerate(exact_cols):
        e[i, col] = 1.0

    cross = w.T @ g @ e
    d = e.T @ g @ e
    schur = d - cross.T @ cross  # Gram of the part orthogonal to Pi_{k-1}
    vals, vecs = np.linalg.eigh(schur)
    keep = vals > 1e-10 * vals.max()
    expected = harmonic_space_dimension(2, k)
    if int(keep.sum()) != expected:
        raise AssertionError(
            f"harmonic basis extraction found {int(keep.sum())} directions, "
            f"expected {expected} at degree {k}"
        )
    out = []
    for val, u in zip(vals[keep], vecs[:, keep].T):
        vec = (e - w @ cross) @ u / math.sqrt(val)
        out.append(_fix_sign(vec))
    return tuple(out)


def harmonic_subspace_basis(k):
    """Orthonormal basis (2k+1 polynomials) of the degree-k harmonics on S^2."""
    basis = monomial_basis(k)
    return [_poly_from_vector(v, basis, k) for v in _harmonic_vectors(int(k))]


def sphere_orthonormal_basis(t):
    """Orthonormal basis of Pi_t restricted to S^2, graded by harmonic degree.

    Returns a list of (k, polynomial) pairs, (t+1)^2 in total, orthonormal for
    the normalized surface measure.
    """
    out = []
    for k in range(int(t) + 1):
        out.extend((k, p) for p in harmonic_subspace_basis(k))
    return out
