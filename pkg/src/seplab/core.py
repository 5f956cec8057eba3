"""The periodically forced Duffing oscillator

    u'' + 2u - 2u^3 = eps * cos(omega * t + phi0)

its unperturbed first integral, the exact separatrix solutions and a coarse
classification of the phase plane.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

SEPARATRIX_ENERGY = 0.5


@dataclass(frozen=True)
class PhaseState:
    """A point (t, u, u') of the phase flow."""

    t: float
    u: float
    v: float

    def __post_init__(self):
        if not all(math.isfinite(x) for x in (self.t, self.u, self.v)):
            raise ValueError(f"non-finite phase state {self!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v])


@dataclass(frozen=True)
class SystemParams:
    epsilon: float
    omega: float = 1.0
    phi0: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if not self.omega > 0.0:
            raise ValueError(f"omega must be positive, got {self.omega}")

    @property
    def delta(self) -> float:
        """The map parameter -omega * ln(eps)."""
        return -self.omega * math.log(self.epsilon)

    def with_epsilon(self, epsilon: float) -> "SystemParams":
        return SystemParams(epsilon, self.omega, self.phi0)


# epsilon = 0 is allowed above: the unperturbed system is the reference case
# for most checks. The asymptotic formulas themselves require 0 < eps < 1 and
# say so where it matters.


class Branch(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class SeparatrixBranch:
    branch: Branch = Branch.UPPER
    shift: float = 0.0


class Region(enum.Enum):
    INSIDE_EYE = "inside_eye"
    OUTSIDE_LEFT = "outside_left"
    OUTSIDE_RIGHT = "outside_right"
    NEAR_SADDLE_PLUS = "near_saddle_plus"
    NEAR_SADDLE_MINUS = "near_saddle_minus"


def rhs(state: PhaseState, params: SystemParams) -> tuple[float, float]:
    u, v = state.u, state.v
    forcing = params.epsilon * math.cos(params.omega * state.t + params.phi0)
    return v, -2.0 * u + 2.0 * u**3 + forcing


def vector_field(params: SystemParams):
    """Return f(t, y) for scipy-style solvers, y = [u, v]."""
    eps, omega, phi0 = params.epsilon, params.omega, params.phi0

    def f(t, y):
        u = y[0]
        return np.array([y[1], -2.0 * u + 2.0 * u**3 + eps * math.cos(omega * t + phi0)])

    return f


def energy_uv(u, v):
    """E = v^2/2 + u^2 - u^4/2; works elementwise on arrays."""
    return 0.5 * v * v + u * u - 0.5 * u**4


def energy(state: PhaseState) -> float:
    return float(energy_uv(state.u, state.v))


def separatrix_state(t: float, branch: SeparatrixBranch = SeparatrixBranch()) -> PhaseState:
    s = t + branch.shift
    u = math.tanh(s)
    v = 1.0 / math.cosh(s) ** 2 if abs(s) < 350.0 else 0.0
    if branch.branch is Branch.LOWER:
        u, v = -u, -v
    return PhaseState(t, u, v)


def classify(state: PhaseState, saddle_radius: float = 0.05) -> Region:
    """Place a state in one of five phase-plane regions.

    The saddle balls take priority. Elsewhere the separatrix level E = 1/2
    splits the plane: below it and with |u| < 1 lies the eye (the bounded
    well), everything else is outside and is labelled by the sign of u.
    States below the separatrix level with |u| > 1 lie beyond the potential
    barrier and count as outside as well.
    """
    if saddle_radius <= 0:
        raise ValueError("saddle_radius must be positive")
    u, v = state.u, state.v
    if math.hypot(u - 1.0, v) < saddle_radius:
        return Region.NEAR_SADDLE_PLUS
    if math.hypot(u + 1.0, v) < saddle_radius:
        return Region.NEAR_SADDLE_MINUS
    if energy(state) < SEPARATRIX_ENERGY and abs(u) < 1.0:
        return Region.INSIDE_EYE
    return Region.OUTSIDE_RIGHT if u >= 0.0 else Region.OUTSIDE_LEFT
