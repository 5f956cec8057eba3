"""Matched asymptotic expansions near the separatrix and near the saddles.

Along the upper separatrix u = tanh t + sum_n eps^n U_n(t), where every
correction solves the linearised equation

    U_n'' + 2 U_n - 6 tanh(t)^2 U_n = f_n(t)

with f_1 = cos(omega t + Phi0) and f_n for n >= 2 collected from the cubic.
Near the saddle (1, 0) the natural time is tau = t + tau0, tau0 = ln(eps)/4,
and u = 1 + sum_n eps^(n/2) u_n(tau).  The lower separatrix uses
theta = tau + theta_shift.

Coefficient conventions.  A is the v1-coordinate (coefficient of the
decaying exponential, divided by 4) and B the v2-coordinate (16 times the
growing exponential) on either side, so that both B_n^- and B_n^+ measure
the same direction and their difference is the Melnikov-type jump.  With
this choice E - 1/2 = eps * B along the upper branch to first order.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from . import linearized, quadrature
from .errors import IllConditionedFit, WrongBranch
from .linearized import dv1, dv2, sech2, v1, v2, wronskian
from .melnikov import _cos_phase, delta_b1_closed, delta_b1_quadrature


class LinearizedBasis:
    """Stateless evaluator for the pair (v1, v2); Wronskian identically 1."""

    v1 = staticmethod(v1)
    v2 = staticmethod(v2)
    dv1 = staticmethod(dv1)
    dv2 = staticmethod(dv2)
    wronskian = staticmethod(wronskian)
    potential = staticmethod(linearized.potential)


# --- separatrix corrections ------------------------------------------------


@dataclass(frozen=True)
class CorrectionTerm:
    """U_n sampled on a uniform grid, callable anywhere inside it.

    ``I1`` and ``I2`` are the running integrals of f*v1 and f*v2 from ``t0``
    at the grid nodes, so that U = -v1 I2 + v2 I1 + A v1 + B v2.
    A_minus/A_plus/B_minus/B_plus hold the extracted asymptotic coefficients
    (NaN when extraction was skipped).
    """

    n: int
    t: np.ndarray
    values: np.ndarray
    I1: np.ndarray
    I2: np.ndarray
    f: Callable
    t0: float
    A: float
    B: float
    omega: float | None = None
    A_minus: float = math.nan
    A_plus: float = math.nan
    B_minus: float = math.nan
    B_plus: float = math.nan

    def _integrals(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t[0] - 1e-12) or np.any(t > self.t[-1] + 1e-12):
            raise ValueError("evaluation point outside the correction grid")
        idx = np.clip(np.searchsorted(self.t, t, side="right") - 1, 0, len(self.t) - 2)
        lo = self.t[idx]
        j1 = quadrature.partial_integrals(lambda s: self.f(s) * v1(s), lo, t)
        j2 = quadrature.partial_integrals(lambda s: self.f(s) * v2(s), lo, t)
        return self.I1[idx] + j1, self.I2[idx] + j2

    def __call__(self, t):
        i1, i2 = self._integrals(t)
        return -v1(t) * i2 + v2(t) * i1 + self.A * v1(t) + self.B * v2(t)

    def derivative(self, t):
        i1, i2 = self._integrals(t)
        return -dv1(t) * i2 + dv2(t) * i1 + self.A * dv1(t) + self.B * dv2(t)

    def coordinates(self, t):
        """(a, b): the v1- and v2-coordinates, U = a v1 + b v2."""
        i1, i2 = self._integrals(t)
        return self.A - i2, self.B + i1

    def rows(self):
        return zip(self.t.tolist(), self.values.tolist())


def _as_function(f_n):
    if callable(f_n):
        return f_n
    t, vals = (np.asarray(a, dtype=float) for a in f_n)
    return CubicSpline(t, vals)


def solve_correction(
    n: int,
    f_n,
    t0: float = 0.0,
    A: float = 0.0,
    B: float = 0.0,
    grid: tuple[float, float] = (-6.0, 6.0),
    h: float = 0.01,
    omega: float | None = None,
    extract: bool = True,
    window: tuple[float, float] | None = None,
) -> CorrectionTerm:
    """Solve the linearised equation with source ``f_n``.

    ``f_n`` is a vectorised callable or a pair (t, values) that is
    spline-interpolated.  The solution is fixed by its coordinates A, B on
    (v1, v2) at ``t0``.  Cell integrals are checked against half-cell
    refinement (QuadratureNonConvergent beyond 1e-8).
    """
    lo, hi = grid
    if not lo < t0 < hi and not (lo <= t0 <= hi):
        raise ValueError("t0 must lie inside the grid")
    m = int(round((hi - lo) / h))
    nodes = np.linspace(lo, hi, m + 1)
    f = _as_function(f_n)
    c1 = quadrature.cell_integrals(lambda s: f(s) * v1(s), nodes)
    c2 = quadrature.cell_integrals(lambda s: f(s) * v2(s), nodes)
    I1 = np.concatenate([[0.0], np.cumsum(c1)])
    I2 = np.concatenate([[0.0], np.cumsum(c2)])
    term = CorrectionTerm(n, nodes, np.zeros_like(nodes), I1, I2, f, t0, A, B, omega)
    # shift the running integrals so that they vanish at t0
    o1, o2 = term._integrals(np.array([t0]))
    I1 = I1 - o1[0]
    I2 = I2 - o2[0]
    values = -v1(nodes) * I2 + v2(nodes) * I1 + A * v1(nodes) + B * v2(nodes)
    term = CorrectionTerm(n, nodes, values, I1, I2, f, t0, A, B, omega)
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite correction values")
    if extract:
        Am, Bm = extract_coefficients(term, window, side=-1)
        Ap, Bp = extract_coefficients(term, window, side=+1)
        term = CorrectionTerm(n, nodes, values, I1, I2, f, t0, A, B, omega, Am, Ap, Bm, Bp)
    return term


def build_fn(n: int, lower_terms: Sequence[Callable], omega: float = 1.0, Phi0: float = 0.0):
    """Source term of order n as a vectorised callable.

    f_1 is the forcing.  For n >= 2, f_n = 2 * sum of U_i U_j U_k over
    ordered triples with i + j + k = n and every index below n, U_0 = tanh;
    this is the eps^n part of 2 u^3 with the linear 6 U_0^2 U_n moved to the
    left-hand side.  ``lower_terms[i]`` is U_{i+1}.
    """
    if n < 1:
        raise ValueError("order must be >= 1")
    if n == 1:
        return lambda t: np.cos(omega * np.asarray(t, dtype=float) + Phi0)
    if len(lower_terms) < n - 1:
        raise ValueError(f"need U_1..U_{n - 1} to build f_{n}")
    terms = [np.tanh] + list(lower_terms[: n - 1])
    triples = [
        (i, j, n - i - j)
        for i in range(n)
        for j in range(n)
        if 0 <= n - i - j < n
    ]

    def f(t):
        t = np.asarray(t, dtype=float)
        vals = [U(t) for U in terms]
        out = np.zeros_like(t)
        for i, j, k in triples:
            out = out + vals[i] * vals[j] * vals[k]
        return 2.0 * out

    return f


def _basis_columns(order: int, omega: float | None):
    """Asymptotic basis on one side, in the outgoing variable s >= 0.

    Returns (names, functions).  The growing exponential is named 'grow'
    and the plain decaying one 'decay'; these carry B and A.
    """
    cols: list[tuple[str, Callable]] = []
    trig = []
    if omega is not None:
        for m in range(1, order + 1):
            trig.append((f"cos{m}", lambda s, m=m: np.cos(m * omega * s)))
            trig.append((f"sin{m}", lambda s, m=m: np.sin(m * omega * s)))
    for k in range(order, 1, -1):
        cols.append((f"e{2 * k}", lambda s, k=k: np.exp(2 * k * s)))
    cols.append(("grow", lambda s: np.exp(2 * s)))
    if order >= 2:
        cols.append(("t_grow", lambda s: s * np.exp(2 * s)))
        for name, g in trig[: 2 * (order - 1)]:
            cols.append((f"grow_{name}", lambda s, g=g: np.exp(2 * s) * g(s)))
    cols.append(("one", lambda s: np.ones_like(s)))
    for name, g in trig:
        cols.append((name, g))
    if order >= 2:
        cols.append(("t", lambda s: s))
    cols.append(("decay", lambda s: np.exp(-2 * s)))
    cols.append(("t_decay", lambda s: s * np.exp(-2 * s)))
    for name, g in trig[:2]:
        cols.append((f"decay_{name}", lambda s, g=g: np.exp(-2 * s) * g(s)))
    cols.append(("e-4", lambda s: np.exp(-4 * s)))
    cols.append(("t_e-4", lambda s: s * np.exp(-4 * s)))
    if not trig:
        # with trigonometric columns this pair pushes the fit past the
        # conditioning limit; without them it sharpens A considerably
        cols.append(("e-6", lambda s: np.exp(-6 * s)))
        cols.append(("t_e-6", lambda s: s * np.exp(-6 * s)))
    return [c[0] for c in cols], [c[1] for c in cols]


def extract_coefficients(
    term,
    window: tuple[float, float] | None = None,
    side: int = +1,
    order: int | None = None,
    n_samples: int = 400,
    cond_limit: float = 1e12,
):
    """(A, B) on one side of the separatrix from a windowed least-squares fit.

    ``term`` is a CorrectionTerm or any vectorised callable (then ``order``
    defaults to 1 and no trigonometric columns are used unless the callable
    carries an ``omega`` attribute).  ``window`` is given in |t|; by default
    it is [0.35 T, 0.8 T] with T = grid end / 0.8.  The fit uses the basis
    of growing, bounded and decaying exponentials (with polynomial and
    trigonometric factors) of the term's order, with unit-norm columns;
    IllConditionedFit is raised when the squared condition number, i.e. that
    of the normal equations, exceeds ``cond_limit``.

    Returned: A = (coefficient of exp(-2|t|)) / 4 and
    B = 16 * (coefficient of exp(2|t|)) * sign, so that v1 gives A = 1 and
    v2 gives B = 1 on both sides.
    """
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    omega = getattr(term, "omega", None)
    if order is None:
        order = getattr(term, "n", 1)
    if window is None:
        edge = min(abs(term.t[0]), abs(term.t[-1])) if hasattr(term, "t") else 6.0
        T = edge / 0.8
        window = (0.35 * T, 0.8 * T)
    lo, hi = window
    if not 0 <= lo < hi:
        raise ValueError("window must satisfy 0 <= lo < hi")
    s = np.linspace(lo, hi, n_samples)
    y = np.asarray(term(side * s), dtype=float)
    if not np.any(y):
        return 0.0, 0.0
    # trig factors of the physical time: cos(m w t) is even, sin odd in s
    names, funcs = _basis_columns(order, omega)
    X = np.column_stack([g(s) for g in funcs])
    scale = np.linalg.norm(X, axis=0)
    Xs = X / scale
    cond = np.linalg.cond(Xs)
    if cond * cond > cond_limit:
        raise IllConditionedFit(f"condition number {cond:.3g} (squared {cond * cond:.3g})")
    coef, *_ = np.linalg.lstsq(Xs, y, rcond=None)
    coef = coef / scale
    grow = coef[names.index("grow")]
    decay = coef[names.index("decay")]
    # v2 ~ sign(t) exp(2|t|)/16, so the v2-coordinate flips sign with the side
    return float(decay / 4.0), float(16.0 * grow * side)


# --- saddle expansion ----------------------------------------------------


class Side(enum.Enum):
    PLUS = "PlusSaddle"
    MINUS = "MinusSaddle"


@dataclass(frozen=True)
class SaddleCoeffs:
    """alpha[i], beta[i] are alpha_{i+1}, beta_{i+1} (coefficients of exp(-2tau), exp(2tau))."""

    side: Side
    alpha: tuple
    beta: tuple
    tau0: float

    def __post_init__(self):
        if len(self.alpha) != len(self.beta):
            raise ValueError("alpha and beta must have the same length")
        if not math.isfinite(self.tau0):
            raise ValueError("tau0 must be finite")

    def alpha_n(self, n: int) -> float:
        return self.alpha[n - 1] if 1 <= n <= len(self.alpha) else 0.0

    def beta_n(self, n: int) -> float:
        return self.beta[n - 1] if 1 <= n <= len(self.beta) else 0.0


def saddle_correction(side: Side, n: int, tau, coeffs: SaddleCoeffs, params, form: str = "consistent"):
    """u_1 or u_2 of the saddle expansion u = +-1 + sum eps^(n/2) u_n(tau).

    u_2 solves u'' - 4u = cos(omega tau + phi0 - omega tau0) +- 6 u_1^2
    (+ at the saddle (1, 0)).  ``form="consistent"`` returns that particular
    solution, alpha^2/2 e^{-4tau} + beta^2/2 e^{4tau} - 3 alpha beta, with the
    sign of the quadratic part following the saddle; ``form="printed"`` uses
    the coefficients 1/12, 1/12, -1/2 as usually quoted, which do not solve
    the equation and are kept for comparison.
    """
    if n not in (1, 2):
        raise ValueError("closed forms exist for n = 1, 2 only")
    tau = np.asarray(tau, dtype=float)
    a1, b1 = coeffs.alpha_n(1), coeffs.beta_n(1)
    if n == 1:
        return a1 * np.exp(-2 * tau) + b1 * np.exp(2 * tau)
    a2, b2 = coeffs.alpha_n(2), coeffs.beta_n(2)
    omega, phi0 = params.omega, params.phi0
    forcing = -np.cos(omega * tau + phi0 - omega * coeffs.tau0) / (4.0 + omega**2)
    if form == "printed":
        quad = a1**2 / 12 * np.exp(-4 * tau) + b1**2 / 12 * np.exp(4 * tau) - 0.5 * a1 * b1
    elif form == "consistent":
        quad = a1**2 / 2 * np.exp(-4 * tau) + b1**2 / 2 * np.exp(4 * tau) - 3.0 * a1 * b1
        if side is Side.MINUS:
            quad = -quad
    else:
        raise ValueError(f"unknown form {form!r}")
    return quad + forcing + a2 * np.exp(-2 * tau) + b2 * np.exp(2 * tau)


def _pad(values, length):
    out = list(values) + [0.0] * (length - len(values))
    return tuple(float(x) for x in out)


def match_upper_to_saddle(
    B1_minus: float,
    deltaB1: float,
    epsilon: float,
    A_plus: Sequence[float] = (),
    B_plus: Sequence[float] = (),
) -> SaddleCoeffs:
    """Saddle coefficients at (1, 0) from the upper-separatrix ledger.

    ``A_plus`` = (A_1^+, A_2^+, ...); ``B_plus`` = (B_2^+, B_3^+, ...), the
    first-order B_1^+ being B1_minus + deltaB1.  alpha_1 = -2,
    alpha_{2n+1} = 4 A_n^+, beta_{2n-1} = B_n^+/16, even orders vanish, and
    tau0 = ln(eps)/4.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    B = [B1_minus + deltaB1] + list(B_plus)
    length = max(2 * len(A_plus) + 1, 2 * len(B) - 1)
    alpha = [0.0] * length
    beta = [0.0] * length
    alpha[0] = -2.0
    for n, a in enumerate(A_plus, start=1):
        alpha[2 * n] = 4.0 * a
    for n, b in enumerate(B, start=1):
        beta[2 * n - 2] = b / 16.0
    return SaddleCoeffs(Side.PLUS, tuple(alpha), tuple(beta), 0.25 * math.log(epsilon))


class Outcome(enum.Enum):
    ESCAPES = "Escapes"
    TURNS_TO_LOWER_BRANCH = "TurnsToLowerBranch"


@dataclass(frozen=True)
class EscapeVerdict:
    outcome: Outcome
    degenerate: bool
    margin: float  # positive means escape; proportional to beta_1^+


def escape_predicate(B1_minus: float, phi0: float, omega: float = 1.0, mode: str = "paper") -> EscapeVerdict:
    """Does the first passage near (1, 0) leave along the unstable branch?

    ``mode="paper"``: escape iff cos(phi0) > -16 B1_minus cosh(pi omega/2).
    ``mode="oracle"``: escape iff B1_minus + M cos(phi0) > 0 with M the
    quadrature Melnikov integral.  Equality is reported as escape with the
    degenerate flag set.
    """
    c = _cos_phase(phi0)
    if mode == "paper":
        margin = c + 16.0 * B1_minus * math.cosh(0.5 * math.pi * omega)
    elif mode == "oracle":
        margin = (B1_minus + delta_b1_quadrature(omega, 0.0) * c) / 16.0
    else:
        raise ValueError(f"unknown mode {mode!r}")
    out = Outcome.ESCAPES if margin >= 0.0 else Outcome.TURNS_TO_LOWER_BRANCH
    return EscapeVerdict(out, margin == 0.0, margin)


def first_order_ic(B1_minus: float, params, t_centre: float = 0.0):
    """State at the lobe centre of the first-order solution with given B_1^-.

    The v2-coordinate at the centre is B_1^- plus the Melnikov integral up to
    the centre; the v1-coordinate (a time shift) is set to zero, so u = 0.
    """
    from .core import PhaseState

    omega, phi0 = params.omega, params.phi0
    T = 0.5 * math.log(2e13)
    part, _ = quadrature.integrate(
        lambda s: np.cos(omega * (s + t_centre) + phi0) * sech2(s), -T, 0.0, tol=1e-13, n0=32
    )
    return PhaseState(t_centre, 0.0, 1.0 + params.epsilon * (B1_minus + part))


@dataclass(frozen=True)
class LowerFragment:
    a: tuple
    b: tuple
    theta_shift: float
    phi: float


def match_saddle_to_lower(coeffs: SaddleCoeffs, epsilon: float, Phi: float, omega: float = 1.0) -> LowerFragment:
    """Lower-separatrix coefficients from the (1, 0) saddle expansion.

    a_n = alpha_{2n-1}(-beta_1)/8, b_n = -32 beta_{2n+1}/beta_1,
    theta = tau + ln(eps)/4 + ln(-beta_1)/2 - ln(2)/2 and
    phi = Phi - (omega/2)(ln eps + ln(-beta_1) - ln 2).
    Raises WrongBranch when beta_1 >= 0 (the solution escapes).
    """
    b1 = coeffs.beta_n(1)
    if not b1 < 0.0:
        raise WrongBranch(f"beta_1 = {b1} >= 0: the trajectory leaves along the escaping branch")
    N = (len(coeffs.alpha) + 1) // 2
    a = tuple(coeffs.alpha_n(2 * n - 1) * (-b1) / 8.0 for n in range(1, N + 1))
    b = tuple(-32.0 * coeffs.beta_n(2 * n + 1) / b1 for n in range(1, N + 1))
    log_term = math.log(epsilon) + math.log(-b1) - math.log(2.0)
    shift = 0.25 * math.log(epsilon) + 0.5 * (math.log(-b1) - math.log(2.0))
    return LowerFragment(a, b, shift, Phi - 0.5 * omega * log_term)


def match_lower_to_left_saddle(a_minus: Sequence[float], b_minus: Sequence[float], epsilon: float) -> SaddleCoeffs:
    """Saddle coefficients at (-1, 0) from the lower-separatrix ledger.

    alpha_1 = 2, alpha_{2n+1} = 4 a_n^-, beta_{2n-1} = b_n^-/16 (n >= 1).
    """
    length = max(2 * len(a_minus) + 1, 2 * len(b_minus) - 1, 1)
    alpha = [0.0] * length
    beta = [0.0] * length
    alpha[0] = 2.0
    for n, a in enumerate(a_minus, start=1):
        alpha[2 * n] = 4.0 * a
    for n, b in enumerate(b_minus, start=1):
        beta[2 * n - 2] = b / 16.0
    return SaddleCoeffs(Side.MINUS, tuple(alpha), tuple(beta), 0.25 * math.log(epsilon))


def lower_jump(epsilon: float, beta1_plus: float, Phi: float, omega: float = 1.0, normalization: str = "oracle") -> float:
    """Jump db_1 = b_1^- - b_1^+ across the lower separatrix.

    prefactor * cos(Phi - (omega/2)(ln eps + ln(-beta_1^+) - ln 2)); the
    prefactor is the quadrature Melnikov integral ("oracle") or
    pi/cosh(pi omega/2) ("paper").
    """
    if not beta1_plus < 0:
        raise WrongBranch("lower jump needs beta_1^+ < 0")
    if normalization == "oracle":
        pref = delta_b1_quadrature(omega, 0.0)
    elif normalization == "paper":
        pref = delta_b1_closed(omega, 0.0)
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    arg = Phi - 0.5 * omega * (math.log(epsilon) + math.log(-beta1_plus) - math.log(2.0))
    return pref * _cos_phase(arg)


@dataclass
class CircleLedger:
    """Matched coefficients for one upper passage and the following lower one."""

    A: list = field(default_factory=list)
    B: list = field(default_factory=list)
    a: list = field(default_factory=list)
    b: list = field(default_factory=list)
    alpha: list = field(default_factory=list)
    beta: list = field(default_factory=list)
    Phi: float = 0.0
    phi: float = math.nan
    theta_shift: float = math.nan

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("A", "B", "a", "b", "alpha", "beta", "Phi", "phi", "theta_shift")}

    def to_json(self, **kw) -> str:
        d = {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in self.to_dict().items()}
        return json.dumps(d, **kw)


def build_ledger(
    B1_minus: float,
    epsilon: float,
    omega: float,
    Phi: float,
    A_plus: Sequence[float] = (),
    B_plus: Sequence[float] = (),
) -> CircleLedger:
    """Run the matching chain upper -> saddle (1, 0) -> lower at first order.

    Phi is the forcing phase at the lobe centre; the jump is the quadrature
    Melnikov integral.  When the passage escapes the lower part is left
    empty (phi and theta_shift NaN).
    """
    dB1 = delta_b1_quadrature(omega, Phi)
    coeffs = match_upper_to_saddle(B1_minus, dB1, epsilon, A_plus, B_plus)
    led = CircleLedger(
        A=[float(x) for x in A_plus],
        B=[B1_minus + dB1] + [float(x) for x in B_plus],
        alpha=list(coeffs.alpha),
        beta=list(coeffs.beta),
        Phi=float(Phi),
    )
    try:
        frag = match_saddle_to_lower(coeffs, epsilon, Phi, omega)
    except WrongBranch:
        return led
    led.a, led.b = list(frag.a), list(frag.b)
    led.phi, led.theta_shift = frag.phi, frag.theta_shift
    return led
