"""Exact recovery from curve samples: norm identities and kernel reconstruction.

On a 2t-design curve the normalized line integral of |f|^2 matches the surface
integral for every polynomial f of degree t, and f itself is recovered through
the reproducing kernel: f(x) = (1/length) * integral of f * k_x along the
curve.
"""

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .curves import curve_length, line_integral_many
from .geometry import fibonacci_mesh
from .harmonics import SphericalPolynomial, kernel_spec, kernel_values, sphere_orthonormal_basis

__all__ = [
    "CurveTrace",
    "ParsevalResult",
    "ReconstructionResult",
    "sample_trace",
    "trace_from_values",
    "parseval_check",
    "reconstruct_at",
    "reconstruct_coeffs",
]


@dataclass(eq=False)
class CurveTrace:
    """Samples of a scalar function along a curve, with the local speeds.

    Parameters must be strictly increasing within [0, 1] and values finite.
    """

    curve: object
    s: np.ndarray
    values: np.ndarray
    speeds: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        v = np.asarray(self.values, dtype=float)
        w = np.asarray(self.speeds, dtype=float)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("a trace needs at least two samples")
        if s[0] < 0.0 or s[-1] > 1.0 or np.any(np.diff(s) <= 0):
            raise ValueError("sample parameters must increase strictly within [0, 1]")
        if v.shape != s.shape or w.shape != s.shape:
            raise ValueError("values and speeds must match the sample parameters")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
            raise ValueError("trace contains non-finite entries")
        self.s, self.values, self.speeds = s, v, w

    @property
    def n_samples(self):
        return self.s.size


def trace_from_values(curve, s, values):
    """Trace from externally sampled values; speeds are filled in from the curve."""
    s = np.asarray(s, dtype=float)
    return CurveTrace(curve=curve, s=s, values=np.asarray(values, dtype=float),
                      speeds=curve.speed(s))


def sample_trace(curve, f, n):
    """Trace of f along the curve at n uniform parameters in [0, 1)."""
    n = int(n)
    if n < 2:
        raise ValueError("need at least two samples")
    s = np.arange(n) / n
    return CurveTrace(curve=curve, s=s, values=np.asarray(f(curve.point(s)), dtype=float),
                      speeds=curve.speed(s))


class ParsevalResult(NamedTuple):
    lhs: float
    rhs: float
    gap: float


def parseval_check(curve, f, t, tol=1e-10):
    """Compare the curve average of |f|^2 with its exact surface integral.

    f must be a SphericalPolynomial of degree <= t so the surface side can be
    evaluated from exact moments; the curve should carry a 2t-design
    certificate for the gap to vanish.
    """
    if not isinstance(f, SphericalPolynomial):
        raise TypeError("parseval_check needs a SphericalPolynomial for the exact side")
    if f.degree > t:
        raise ValueError(f"polynomial degree {f.degree} exceeds declared degree {t}")
    length = curve_length(curve, tol)
    lhs = float(
        line_integral_many(curve, lambda pts: np.asarray(f(pts)) ** 2, tol)[0]
    ) / length
    rhs = f.multiply(f).integral()
    return ParsevalResult(lhs=lhs, rhs=rhs, gap=abs(lhs - rhs))


def reconstruct_at(curve, f, t, x, tol=1e-10):
    """Value of the degree-t polynomial matching f along the curve, at point x.

    Computes (1/length) * integral of f * k_x along the curve with the
    degree-t reproducing kernel; on a 2t-design curve this returns f(x)
    exactly (up to quadrature tolerance) whenever f is a polynomial of
    degree <= t, and the L^2 projection of f onto that space otherwise.
    """
    spec = kernel_spec(int(t))
    xc = np.asarray(x, dtype=float)

    def integrand(pts):
        return np.asarray(f(pts)) * kernel_values(spec, xc, pts)

    length = curve_length(curve, tol)
    return float(line_integral_many(curve, integrand, tol)[0]) / length


@dataclass(eq=False)
class ReconstructionResult:
    """Polynomial recovered from a trace, with its diagnostics.

    coefficients are taken against the orthonormal harmonic basis in `basis`
    (the output of sphere_orthonormal_basis); sample_residual is the largest
    mismatch between the polynomial and the trace values, and condition is the
    conditioning of the evaluation system.
    """

    polynomial: SphericalPolynomial
    coefficients: np.ndarray
    basis: list
    sample_residual: float
    condition: float


def _trapezoid_weights(s, closed):
    if closed:
        # periodic rule: the gap from the last sample back to the first wraps once
        prev = np.roll(s, 1)
        prev[0] -= 1.0
        nxt = np.roll(s, -1)
        nxt[-1] += 1.0
        return 0.5 * (nxt - prev)
    w = np.empty_like(s)
    w[0] = 0.5 * (s[1] - s[0])
    w[-1] = 0.5 * (s[-1] - s[-2])
    w[1:-1] = 0.5 * (s[2:] - s[:-2])
    return w


def reconstruct_coeffs(trace, t):
    """Degree-t polynomial recovered from finitely many curve samples.

    Discretizes the kernel reconstruction with a (periodic) trapezoid rule in
    the curve parameter, then solves the square evaluation system over an
    orthonormal harmonic basis at a (t+1)^2-point mesh. The accuracy is set by
    the sampling density; as a guide use at least 40 * 2t * n_segments
    samples. A warning is raised when the trace values cannot be matched by a
    degree-t polynomial.
    """
    t = int(t)
    curve = trace.curve
    w = _trapezoid_weights(trace.s, bool(curve.closed))
    mass = w * trace.speeds
    length = float(mass.sum())

    basis = sphere_orthonormal_basis(t)
    eval_points = fibonacci_mesh((t + 1) ** 2)
    a = np.column_stack([poly(eval_points) for _, poly in basis])
    singular = np.linalg.svd(a, compute_uv=False)
    condition = float(singular[0] / singular[-1]) if singular[-1] > 0 else np.inf
    if singular[-1] <= 1e-10 * singular[0]:
        raise np.linalg.LinAlgError(
            "evaluation system is rank deficient; the trace is under-sampled "
            "or the curve is not a design for this degree"
        )

    spec = kernel_spec(t)
    pts = curve.point(trace.s)
    weighted = mass * trace.values
    rhs = np.array(
        [float(kernel_values(spec, xp, pts) @ weighted) / length for xp in eval_points]
    )
    coeffs = np.linalg.solve(a, rhs)

    poly_coeffs = {}
    for c, (_, poly) in zip(coeffs, basis):
        for m, v in poly.coefficients.items():
            poly_coeffs[m] = poly_coeffs.get(m, 0.0) + c * v
    polynomial = SphericalPolynomial(t, poly_coeffs)

    residual = float(np.abs(polynomial(pts) - trace.values).max())
    scale = 1.0 + float(np.abs(trace.values).max())
    if residual > 1e-6 * scale:
        warnings.warn(
            f"trace is not reproduced by a degree-{t} polynomial "
            f"(sample residual {residual:.3g}); returning the projection",
            stacklevel=2,
        )
    return ReconstructionResult(
        polynomial=polynomial,
        coefficients=coeffs,
        basis=basis,
        sample_residual=residual,
        condition=condition,
    )
