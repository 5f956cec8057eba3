"""Separatrix-splitting jumps of the expansion coefficients.

The jump of the v2-coordinate across one passage of the upper separatrix is
the Melnikov integral

    dB1 = integral over R of cos(omega t + phi0) sech^2(t) dt.

The printed closed form cos(phi0) pi / cosh(pi omega / 2) is kept for
comparison only.  Contour integration gives pi omega / sinh(pi omega / 2)
for the cosine transform of sech^2, and the two differ by several percent
at omega ~ 1, so everything downstream uses the quadrature value.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from . import quadrature
from .errors import QuadratureNonConvergent, RegularizationDiverges
from .linearized import sech2, v1

TAIL_TOL = 1e-13
# Calibration of delta_b_generic against delta_b1_quadrature (see tests).
GENERIC_NORMALIZATION = 1.0


def _cos_phase(phi: float) -> float:
    # exact zeros at odd multiples of pi/2 so parity-based identities hold bitwise
    if math.remainder(phi - 0.5 * math.pi, math.pi) == 0.0:
        return 0.0
    return math.cos(phi)


def _sin_phase(phi: float) -> float:
    if math.remainder(phi, math.pi) == 0.0:
        return 0.0
    return math.sin(phi)


def tail_cutoff(tol: float = TAIL_TOL) -> float:
    """T such that the neglected tails of the sech^2 integrand sum below tol."""
    return 0.5 * math.log(2.0 / tol)


def delta_b1_closed(omega: float, Phi0: float) -> float:
    """The printed closed form cos(Phi0) * pi / cosh(pi omega / 2)."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    return _cos_phase(Phi0) * math.pi / math.cosh(0.5 * math.pi * omega)


def delta_b1_quadrature(omega: float, Phi0: float, tol: float = 1e-11) -> float:
    """Melnikov integral by composite Gauss-Legendre on [-T, T].

    T is chosen so that 2 exp(-2T) < 1e-13; panels are doubled until two
    successive estimates agree to ``tol``.  Any real omega is accepted; the
    integral is even in omega.
    """
    T = tail_cutoff()
    n0 = max(8, int(4 * abs(omega) * T))
    val, _ = quadrature.integrate(
        lambda t: np.cos(omega * t + Phi0) * sech2(t), -T, T, tol=tol, n0=n0
    )
    return val


@dataclass
class JumpResult:
    omega: float
    phi0: float
    closed_form: float
    quadrature: float
    rel_discrepancy: float

    def to_dict(self) -> dict:
        return asdict(self)


def jump_report(omega: float, phi0: float) -> JumpResult:
    closed = delta_b1_closed(omega, phi0)
    quad = delta_b1_quadrature(omega, phi0)
    rel = abs(closed - quad) / max(abs(quad), 1e-300)
    return JumpResult(omega, phi0, closed, quad, rel)


def discrepancy_report(omegas: Sequence[float] = (0.5, 1.0, 2.0), phi0: float = 0.0):
    return [jump_report(w, phi0) for w in omegas]


# --- dA1 -----------------------------------------------------------------
#
# v2 = sinh(2t)/8 + 3/8 (tanh t + t sech^2 t).  Against sin(omega t):
#   * sinh(2t)/8 integrates in closed form; its growing part is exactly the
#     exp(2s) counterterm, leaving exp(-2s)(2 sin + omega cos)/(8(4+omega^2)).
#   * the plateau 3/8 of tanh contributes 3/4 (1 - cos(omega s))/omega; the
#     cos(omega s) piece oscillates forever and is removed as a second
#     counterterm, keeping the non-oscillating constant.
#   * what is left decays like t exp(-2t); its leading tail beyond s is added
#     in closed form, so the extrapolated values converge like exp(-4s).


def _tail_exp_sin(a, omega, s):
    """integral_s^inf exp(-a t) sin(omega t) dt"""
    d = a * a + omega * omega
    return math.exp(-a * s) * (a * math.sin(omega * s) + omega * math.cos(omega * s)) / d


def _tail_t_exp_sin(a, omega, s):
    """integral_s^inf t exp(-a t) sin(omega t) dt"""
    d = a * a + omega * omega
    e = math.exp(-a * s)
    n = a * math.sin(omega * s) + omega * math.cos(omega * s)
    j = e * n / d
    return s * j + e * math.sin(omega * s) / d - 2.0 * a * e * n / d**2


def _bounded_part(omega, s, tol):
    f = lambda t: 0.375 * (np.tanh(t) + t * sech2(t)) * np.sin(omega * t)
    val, _ = quadrature.integrate(f, 0.0, s, tol=tol, n0=max(8, int(2 * omega * s)))
    return 2.0 * val


def delta_a1_terms(omega: float, s: float, tol: float = 1e-13) -> dict:
    """Pieces of the regularised dA1 bracket at cut-off s (for sin(phi0)=1).

    Keys: ``bracket`` (the printed expression: integral minus the exp(2s)
    counterterm), ``regularized`` (bracket plus the plateau counterterm) and
    ``extrapolated`` (regularized with the exponentially small sinh remainder
    dropped and the leading tail of the bounded part added).
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    w2 = omega * omega + 4.0
    sin_s, cos_s = math.sin(omega * s), math.cos(omega * s)
    sinh_remainder = math.exp(-2.0 * s) * (2.0 * sin_s + omega * cos_s) / (8.0 * w2)
    bounded = _bounded_part(omega, s, tol)
    bracket = bounded + sinh_remainder
    regularized = bracket + 0.75 * cos_s / omega
    # leading decay of tanh - 1 + t sech^2 is -2 exp(-2t) + 4 t exp(-2t)
    tail = 2.0 * 0.375 * (-2.0 * _tail_exp_sin(2.0, omega, s) + 4.0 * _tail_t_exp_sin(2.0, omega, s))
    extrapolated = regularized - sinh_remainder + tail
    return {"bracket": bracket, "regularized": regularized, "extrapolated": extrapolated}


def delta_a1_sequence(omega: float, s_schedule: Sequence[float], tol: float = 1e-13) -> np.ndarray:
    return np.array([delta_a1_terms(omega, s, tol)["extrapolated"] for s in s_schedule])


def delta_a1(
    omega: float,
    Phi0: float,
    s_schedule: Sequence[float] = (6.0, 8.0, 10.0, 12.0),
    tol: float = 1e-8,
    quad_tol: float = 1e-13,
) -> float:
    """Regularised jump dA1 = -sin(Phi0) * lim_s [ ... ] as printed.

    Raises RegularizationDiverges when the extrapolated values along
    ``s_schedule`` fail to settle within ``tol``.
    """
    s_schedule = list(s_schedule)
    if len(s_schedule) < 3 or any(b <= a for a, b in zip(s_schedule, s_schedule[1:])):
        raise ValueError("s_schedule must be increasing with at least 3 entries")
    sp = _sin_phase(Phi0)
    if sp == 0.0:
        return 0.0
    seq = delta_a1_sequence(omega, s_schedule, quad_tol)
    diffs = np.abs(np.diff(seq))
    if diffs[-1] >= tol:
        trend = "grow" if diffs[-1] > diffs[0] else "shrink too slowly"
        raise RegularizationDiverges(
            f"successive dA1 values {trend}: last difference {diffs[-1]:.3g} >= {tol:g}"
        )
    return -sp * float(seq[-1])


def delta_b_generic(f_n, grid=None, tol: float = 1e-11) -> float:
    """Jump of the v2-coordinate produced by a source term f_n.

    ``f_n`` is either a vectorised callable, integrated over ``grid`` =
    (t_lo, t_hi) (default: the Melnikov cut-off interval), or a pair of
    arrays (t, values) sampled on a grid, which is spline-interpolated.
    The integrand f_n * v1 must have decayed below 1e-10 at both ends.
    """
    if callable(f_n):
        lo, hi = grid if grid is not None else (-tail_cutoff(), tail_cutoff())
        g = lambda t: np.asarray(f_n(t), dtype=float) * v1(t)
        ends = np.abs(g(np.array([lo, hi])))
        if np.any(ends > 1e-10):
            raise ValueError("f_n * v1 does not decay at the interval ends")
        val, _ = quadrature.integrate(g, lo, hi, tol=tol, n0=64)
        return GENERIC_NORMALIZATION * val
    t, values = (np.asarray(a, dtype=float) for a in f_n)
    prod = values * v1(t)
    if abs(prod[0]) > 1e-10 or abs(prod[-1]) > 1e-10:
        raise ValueError("f_n * v1 does not decay at the grid ends")
    spline = CubicSpline(t, prod)
    return GENERIC_NORMALIZATION * float(spline.integrate(t[0], t[-1]))


__all__ = [
    "JumpResult",
    "QuadratureNonConvergent",
    "RegularizationDiverges",
    "delta_a1",
    "delta_a1_sequence",
    "delta_a1_terms",
    "delta_b1_closed",
    "delta_b1_quadrature",
    "delta_b_generic",
    "discrepancy_report",
    "jump_report",
]
