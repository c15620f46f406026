"""A closed-curve family on S^2 with a two-term cosine speed law.

The member with winding parameter k and mixing weight a is

    s -> ( a cos(2 pi s) + (1-a) cos(2 pi (2k-1) s),
           a sin(2 pi s) - (1-a) sin(2 pi (2k-1) s),
           2 sqrt(a(1-a)) sin(2 pi k s) )

closed and smooth on [0, 1]; k = 1, a = 1 degenerates to the equator. For a
suitable a in (1/2, 1) the curve integrates all quadratics (k = 2) or cubics
(k >= 3) exactly, which is what solve_design_param pins down. The k = 2
member looks like the seam of a tennis ball.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .curves import CurveSegment, PiecewiseCurve
from .geometry import UnitVector

__all__ = [
    "TennisParams",
    "SpeedParams",
    "SpeedSpectrum",
    "tennis_point",
    "speed_params",
    "speed_fourier",
    "eta",
    "design_degree_for",
    "solve_design_param",
    "tennis_segment",
    "tennis_curve",
    "great_circle",
]

FOURIER_TAIL_TOL = 1e-14


@dataclass(frozen=True)
class TennisParams:
    """Winding number k >= 1 and mixing weight a in [0, 1] selecting a family member."""

    k: int
    a: float

    def __post_init__(self):
        k = int(self.k)
        a = float(self.a)
        if k < 1:
            raise ValueError("winding parameter k must be >= 1")
        if not 0.0 <= a <= 1.0:
            raise ValueError("mixing weight a must lie in [0, 1]")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "a", a)


class SpeedParams(NamedTuple):
    alpha: float
    beta: float
    diff: float  # alpha - beta, by its own closed form; must be positive


@dataclass(frozen=True, eq=False)
class SpeedSpectrum:
    """Cosine coefficients of the speed: |velocity|(s) = sum_n c_n cos(4 pi k n s).

    c_0 is the curve length. Positivity of the speed requires alpha > beta,
    and the stored tail coefficient must be negligible.
    """

    alpha: float
    beta: float
    fourier: np.ndarray

    def __post_init__(self):
        if self.alpha - self.beta <= 0:
            raise ValueError("speed spectrum requires alpha - beta > 0")
        c = np.asarray(self.fourier, dtype=float)
        if c.size < 1:
            raise ValueError("need at least the constant coefficient")
        if c.size > 1 and abs(c[-1]) > FOURIER_TAIL_TOL:
            raise ValueError(
                f"Fourier tail {abs(c[-1]):.3g} above {FOURIER_TAIL_TOL}; increase N"
            )
        c.setflags(write=False)
        object.__setattr__(self, "fourier", c)


def _params(p):
    return p if isinstance(p, TennisParams) else TennisParams(*p)


def _points(p, s):
    k, a = p.k, p.a
    s = np.atleast_1d(np.asarray(s, dtype=float))
    w = 2.0 * math.pi
    zc = 2.0 * math.sqrt(a * (1.0 - a))
    return np.column_stack(
        [
            a * np.cos(w * s) + (1.0 - a) * np.cos(w * (2 * k - 1) * s),
            a * np.sin(w * s) - (1.0 - a) * np.sin(w * (2 * k - 1) * s),
            zc * np.sin(w * k * s),
        ]
    )


def _velocities(p, s):
    k, a = p.k, p.a
    s = np.atleast_1d(np.asarray(s, dtype=float))
    w = 2.0 * math.pi
    m = 2 * k - 1
    zc = 2.0 * math.sqrt(a * (1.0 - a))
    return np.column_stack(
        [
            -w * a * np.sin(w * s) - w * m * (1.0 - a) * np.sin(w * m * s),
            w * a * np.cos(w * s) - w * m * (1.0 - a) * np.cos(w * m * s),
            w * k * zc * np.cos(w * k * s),
        ]
    )


def tennis_point(p, s):
    """Point of the family member at parameter s in [0, 1]."""
    p = _params(p)
    s = float(s)
    if not 0.0 <= s <= 1.0:
        raise ValueError("parameter outside [0, 1]")
    return UnitVector(_points(p, s)[0])


def speed_params(p):
    """The constants (alpha, beta) of the squared speed alpha + beta cos(4 pi k s).

    Also returns alpha - beta by its separate closed form, which stays positive
    on the whole parameter square and certifies that the speed never vanishes.
    """
    p = _params(p)
    k, a = p.k, p.a
    w2 = 4.0 * math.pi**2
    alpha = w2 * (a**2 + (2 * k - 1) ** 2 * (1 - a) ** 2 + 2 * k**2 * a * (1 - a))
    beta = 2.0 * w2 * a * (1 - a) * (k - 1) ** 2
    diff = w2 * (a**2 + (2 * k - 1) ** 2 * (1 - a) ** 2 + 2 * a * (1 - a) * (2 * k - 1))
    return SpeedParams(alpha=alpha, beta=beta, diff=diff)


def speed_fourier(p, n_coeffs=16):
    """Cosine coefficients c_0..c_N of the speed of a family member.

    Because the squared speed has period 1/(2k), the speed expands in
    cos(4 pi k n s) and its coefficients are those of
    sqrt(alpha + beta cos(2 pi u)) over one period of u:

        c_0 = integral of the square root, c_n = 2 integral against cos(2 pi n u).

    Computed with the periodic trapezoid rule (spectrally accurate for this
    analytic integrand), doubling the grid until the coefficients settle.
    c_0 equals the length of the curve.
    """
    p = _params(p)
    n_coeffs = int(n_coeffs)
    if n_coeffs < 1:
        raise ValueError("need at least one coefficient")
    alpha, beta, _ = speed_params(p)
    if alpha - beta <= 0:
        raise ValueError("speed is not strictly positive")

    prev = None
    m = 512
    while True:
        u = np.arange(m) / m
        g = np.sqrt(alpha + beta * np.cos(2.0 * math.pi * u))
        spec = np.fft.rfft(g) / m
        c = np.empty(n_coeffs + 1)
        c[0] = spec[0].real
        take = min(n_coeffs, spec.size - 1)
        c[1 : take + 1] = 2.0 * spec[1 : take + 1].real
        c[take + 1 :] = 0.0
        if prev is not None and np.max(np.abs(c - prev)) < 1e-15:
            break
        if m >= 2**18:
            break
        prev = c
        m *= 2
    return SpeedSpectrum(alpha=alpha, beta=beta, fourier=c)


def eta(p):
    """Mean of z^2 along a family member: 2a(1-a) (1 - (c_1 / 2) / c_0)."""
    p = _params(p)
    spectrum = speed_fourier(p, n_coeffs=16)
    c0, c1 = spectrum.fourier[0], spectrum.fourier[1]
    return 2.0 * p.a * (1.0 - p.a) * (1.0 - 0.5 * c1 / c0)


def design_degree_for(k):
    """Largest degree certified for the solved family member: 2 at k = 2, 3 for k >= 3."""
    k = int(k)
    if k < 2:
        raise ValueError("k >= 2 required for solve")
    return 2 if k == 2 else 3


def solve_design_param(k, tol=1e-12):
    """Mixing weight a_k in (1/2, 1) where the mean of z^2 along the curve is 1/3.

    Bisection on [1/2, 1]: the mean exceeds 1/3 at a = 1/2 and vanishes at
    a = 1, so a root is bracketed. Stops when |eta(a) - 1/3| <= tol.
    """
    k = int(k)
    if k < 2:
        raise ValueError("k >= 2 required for solve")
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    target = 1.0 / 3.0
    lo, hi = 0.5, 1.0
    f_lo = eta(TennisParams(k, lo)) - target
    if f_lo <= 0:
        raise RuntimeError(
            f"bracketing failed: eta(1/2) = {f_lo + target!r} is not above 1/3"
        )
    mid = 0.5 * (lo + hi)
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        f_mid = eta(TennisParams(k, mid)) - target
        if abs(f_mid) <= tol:
            return mid
        if f_mid > 0:
            lo = mid
        else:
            hi = mid
    return mid


def tennis_segment(k, a, s0=0.0, s1=1.0):
    """Piece of a family member over the parameter subinterval [s0, s1].

    s0 > s1 traverses the piece backwards.
    """
    p = TennisParams(k, a)
    s0 = float(s0)
    s1 = float(s1)
    if s0 == s1:
        raise ValueError("degenerate segment: empty parameter interval")
    span = s1 - s0

    def point_fn(u):
        return _points(p, s0 + span * u)

    def velocity_fn(u):
        return span * _velocities(p, s0 + span * u)

    return CurveSegment(
        "tennis", point_fn, velocity_fn, {"k": p.k, "a": p.a, "s0": s0, "s1": s1}
    )


def tennis_curve(k, a):
    """Family member (k, a) as a closed single-segment curve."""
    return PiecewiseCurve((tennis_segment(k, a),), closed=True)


def great_circle():
    """The equator, i.e. the degenerate family member (1, 1)."""
    return tennis_curve(1, 1.0)
