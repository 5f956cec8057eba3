"""Discrete circle-to-circle map for near-separatrix motion.

State at circle n: sigma_k(n) (the v2-direction coefficients in units of
B/16, alternately for the upper and the lower branch), chi_k(n) and the
phase psi(n) with the secular n*omega*ln(eps) part removed.  The physical
forcing phase at circle n is psi(n) + (n-1)*delta/2 with delta = -omega ln eps.

One step:
    s      = sigma_1 + dsigma_1(n)                  must satisfy s*(-1)^n > 0
    psi'   = psi - (omega/2)(ln(|s|/16) - ln 2)
    sigma_k' = -32 (sigma_{k+1} + dsigma_{k+1}) / s
    chi_1' = 2 at even n+1, -2 at odd n+1
    chi_k' = -(1/32)(chi_{k-1} + dchi_{k-1}) * s

In FULL mode sigma_K has no successor, so each step pushes one more entry
past the truncation frontier (NaN = unknown).  LEADING mode closes the
hierarchy with zeros and runs indefinitely.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .core import PhaseState, SystemParams, energy
from .integrator import (
    DEFAULT_ESCAPE_BOUND,
    EventKind,
    IntegratorOptions,
    detect_events,
    integrate,
)
from .linearized import sech2
from .melnikov import _cos_phase, delta_b1_closed, delta_b1_quadrature
from . import quadrature


class Mode(enum.Enum):
    FULL = "full"
    LEADING = "leading"


class Normalization(enum.Enum):
    PAPER = "paper"
    ORACLE = "oracle"


class StopReason(enum.Enum):
    SIGN_CONDITION_VIOLATED = "SignConditionViolated"
    TRUNCATION_EXHAUSTED = "TruncationExhausted"


@dataclass(frozen=True)
class StepOutcome:
    continued: bool
    reason: StopReason | None = None

    @property
    def label(self) -> str:
        return "Continued" if self.continued else f"Stopped:{self.reason.value}"


CONTINUED = StepOutcome(True)


@dataclass(frozen=True)
class MapState:
    n: int
    sigma: tuple
    chi: tuple
    psi: float
    K: int
    epsilon: float
    omega: float = 1.0

    def __post_init__(self):
        if self.K < 1 or len(self.sigma) != self.K or len(self.chi) != self.K:
            raise ValueError("sigma and chi must have length K >= 1")

    @property
    def delta(self) -> float:
        return 0.0 if self.epsilon == 0 else -self.omega * math.log(self.epsilon)

    @property
    def phase(self) -> float:
        """Physical forcing phase at the current circle."""
        return self.psi + 0.5 * (self.n - 1) * self.delta

    def known(self) -> int:
        """Number of leading sigma entries still inside the truncation frontier."""
        s = np.asarray(self.sigma, dtype=float)
        bad = np.nonzero(np.isnan(s))[0]
        return int(bad[0]) if bad.size else self.K


def init_map(B_minus, A_minus, Phi: float, params: SystemParams) -> MapState:
    """State at n = 1: sigma(1) = B^-, chi(1) = A^-, psi(1) = Phi."""
    B = tuple(float(x) for x in B_minus)
    A = tuple(float(x) for x in A_minus)
    if len(A) != len(B):
        raise ValueError("B_minus and A_minus must have the same length")
    return MapState(1, B, A, float(Phi), len(B), params.epsilon, params.omega)


def delta_sigma1(psi_k: float, omega: float, normalization: Normalization = Normalization.ORACLE) -> float:
    """Kick of sigma_1 at forcing phase psi_k."""
    if normalization is Normalization.PAPER:
        pref = math.pi / (16.0 * math.cosh(0.5 * math.pi * omega))
    else:
        pref = delta_b1_quadrature(omega, 0.0) / 16.0
    return pref * _cos_phase(psi_k)


class _Kicker:
    """Caches the kick prefactor; higher-order kicks come from an optional hook."""

    def __init__(self, omega, normalization, hook=None, epsilon=1.0):
        if epsilon == 0:
            self.pref = 0.0
        elif normalization is Normalization.PAPER:
            self.pref = math.pi / (16.0 * math.cosh(0.5 * math.pi * omega))
        else:
            self.pref = delta_b1_quadrature(omega, 0.0) / 16.0
        self.hook = hook

    def __call__(self, state: MapState):
        K = state.K
        ds = np.zeros(K)
        dc = np.zeros(K)
        if self.hook is not None:
            hs, hc = self.hook(state)
            ds[: len(hs)] = hs
            dc[: len(hc)] = hc
        ds[0] = self.pref * _cos_phase(state.phase)
        return ds, dc


def advance(state: MapState, kicks, mode: Mode = Mode.LEADING) -> MapState:
    """Apply the recurrences without checking the sign condition."""
    ds, dc = kicks(state)
    sig = np.asarray(state.sigma, dtype=float)
    chi = np.asarray(state.chi, dtype=float)
    s = sig[0] + ds[0]
    K = state.K
    nxt = np.empty(K)
    nxt[: K - 1] = -32.0 * (sig[1:] + ds[1:]) / s
    # the coefficient past the truncation is unknown in FULL mode, zero in LEADING
    nxt[K - 1] = np.nan if mode is Mode.FULL else 0.0
    new_n = state.n + 1
    nchi = np.empty(K)
    nchi[0] = 2.0 if new_n % 2 == 0 else -2.0
    nchi[1:] = -(chi[:-1] + dc[:-1]) * s / 32.0
    if np.isfinite(s) and s != 0.0:
        psi = state.psi - 0.5 * state.omega * (math.log(abs(s) / 16.0) - math.log(2.0))
    else:
        psi = math.nan
    return replace(state, n=new_n, sigma=tuple(nxt.tolist()), chi=tuple(nchi.tolist()), psi=psi)


def map_step(
    state: MapState,
    mode: Mode = Mode.LEADING,
    normalization: Normalization = Normalization.ORACLE,
    kicks: Callable | None = None,
):
    """One gated step: (next state, outcome); a stopped step returns the input state."""
    kick = kicks if kicks is not None else _Kicker(state.omega, normalization, epsilon=state.epsilon)
    known = state.known()
    if known < 1:
        return state, StepOutcome(False, StopReason.TRUNCATION_EXHAUSTED)
    ds, _ = kick(state)
    s = state.sigma[0] + ds[0]
    if not s * (-1) ** state.n > 0:
        return state, StepOutcome(False, StopReason.SIGN_CONDITION_VIOLATED)
    if mode is Mode.FULL and known < 2:
        return state, StepOutcome(False, StopReason.TRUNCATION_EXHAUSTED)
    return advance(state, kick, mode), CONTINUED


@dataclass(frozen=True)
class TraceRecord:
    n: int
    sigma1: float
    psi: float
    delta_sigma1: float
    outcome: str


@dataclass
class MapTrace:
    records: list = field(default_factory=list)
    final: MapState | None = None

    @property
    def n_continued(self) -> int:
        return sum(1 for r in self.records if r.outcome == "Continued")

    @property
    def stopped(self) -> bool:
        return bool(self.records) and self.records[-1].outcome != "Continued"

    def rows(self):
        for r in self.records:
            yield (r.n, r.sigma1, r.psi, r.delta_sigma1, r.outcome)


def run_map(
    state: MapState,
    max_steps: int,
    mode: Mode = Mode.LEADING,
    normalization: Normalization = Normalization.ORACLE,
    hook: Callable | None = None,
) -> MapTrace:
    """Iterate map_step until a stop or ``max_steps`` steps.

    One record per attempted step; the last one carries the stop reason.
    ``hook(state) -> (dsigma, dchi)`` may supply the higher-order kicks.
    """
    kick = _Kicker(state.omega, normalization, hook, state.epsilon)
    trace = MapTrace()
    for _ in range(max_steps):
        ds, _ = kick(state)
        nxt, out = map_step(state, mode, normalization, kick)
        trace.records.append(TraceRecord(state.n, state.sigma[0], state.psi, float(ds[0]), out.label))
        if not out.continued:
            break
        state = nxt
    trace.final = state
    return trace


@dataclass
class SensitivityProfile:
    k: int
    eta: float
    diff: np.ndarray  # |sigma_1(n) - sigma_1'(n)| for n = 1, 2, ...
    first_divergence: int | None  # first n with nonzero difference


def bernoulli_sensitivity(
    state: MapState,
    k: int,
    eta: float,
    steps: int | None = None,
    mode: Mode = Mode.FULL,
    normalization: Normalization = Normalization.ORACLE,
) -> SensitivityProfile:
    """Difference of sigma_1 traces when sigma_k(1) is shifted by eta.

    The recurrences are applied without the sign gate so that the profile is
    defined whatever the seed.  sigma_k reaches sigma_1 after k - 1 steps, so
    the first nonzero difference sits at n = k.
    """
    if not 1 <= k <= max(1, state.K - 1):
        raise ValueError("k must satisfy 1 <= k <= K - 1")
    steps = state.K - 1 if steps is None else steps
    sig = list(state.sigma)
    sig[k - 1] += eta
    other = replace(state, sigma=tuple(sig))
    kick = _Kicker(state.omega, normalization, epsilon=state.epsilon)
    a, b = state, other
    diffs = [abs(a.sigma[0] - b.sigma[0])]
    for _ in range(steps):
        a, b = advance(a, kick, mode), advance(b, kick, mode)
        diffs.append(abs(a.sigma[0] - b.sigma[0]))
    diff = np.array(diffs)
    nz = np.nonzero(diff > 0)[0]
    first = int(nz[0]) + state.n if nz.size else None
    return SensitivityProfile(k, eta, diff, first)


# --- comparison with the ODE ------------------------------------------------


def _head_integral(omega, phase_fn, upper):
    T = 0.5 * math.log(2e13)
    if upper <= -T:
        return 0.0
    val, _ = quadrature.integrate(lambda s: sech2(s) * phase_fn(s), -T, upper, tol=1e-12, n0=32)
    return val


def seed_from_state(ic: PhaseState, params: SystemParams, K: int = 1) -> MapState:
    """Map state at circle 1 matching an initial condition inside a lobe.

    The lobe centre is located from the unperturbed orbit through the
    initial point, the forcing phase there becomes psi(1), and sigma_1(1)
    is (E - 1/2)/(16 eps) with the part of the Melnikov integral already
    accumulated before the initial time removed.  States on the lower branch
    (v < 0) are mirrored onto the upper one.
    """
    u, v, phi0 = ic.u, ic.v, params.phi0
    if v < 0:
        u, v, phi0 = -u, -v, phi0 + math.pi
    if abs(u) >= 1.0:
        raise ValueError("initial state must lie between the saddles")
    tc = ic.t - math.atanh(u)
    Phi = params.omega * tc + phi0
    if params.epsilon == 0:
        return MapState(1, (0.0,) * K, (0.0,) * K, Phi, K, 0.0, params.omega)
    h0 = (energy(PhaseState(ic.t, u, v)) - 0.5) / params.epsilon
    acc = _head_integral(params.omega, lambda s: np.cos(params.omega * (s + tc) + phi0), ic.t - tc)
    B1 = h0 - acc
    sigma = (B1 / 16.0,) + (0.0,) * (K - 1)
    return MapState(1, sigma, (0.0,) * K, Phi, K, params.epsilon, params.omega)


@dataclass
class CompareReport:
    epsilon: float
    omega: float
    phi0: float
    ode_lobes: int
    ode_escaped: bool
    ode_lifetime: float
    map_lobes: int
    map_outcome: str
    measured_sigma: list  # (t, (E - 1/2)/(16 eps) signed by branch) at each lobe centre
    predicted_sigma1: list
    agree_within_one: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def predicted_vs_observed(
    ic: PhaseState,
    params: SystemParams,
    K: int = 1,
    max_steps: int = 200,
    opts: IntegratorOptions = IntegratorOptions(),
    mode: Mode = Mode.LEADING,
    normalization: Normalization = Normalization.ORACLE,
    escape_bound: float = DEFAULT_ESCAPE_BOUND,
) -> CompareReport:
    """Lobe counts from the ODE and from the map, started from the same state."""
    traj = integrate(ic, params, opts, escape_bound)
    events = detect_events(traj, escape_bound=escape_bound)
    stop = traj.t_end if traj.escaped else math.inf
    centres = [e for e in events if e.kind is EventKind.U_ZERO and e.t < stop]
    measured = []
    eps = params.epsilon
    if eps > 0:
        for e in centres:
            sign = 1.0 if e.state.v > 0 else -1.0
            measured.append((e.t, sign * (energy(e.state) - 0.5) / (16.0 * eps)))
    state = seed_from_state(ic, params, K)
    trace = run_map(state, max_steps, mode, normalization)
    map_lobes = trace.n_continued
    outcome = trace.records[-1].outcome if trace.records else "Continued"
    return CompareReport(
        eps,
        params.omega,
        params.phi0,
        len(centres),
        bool(traj.escaped),
        float(traj.t_end - ic.t),
        map_lobes,
        outcome,
        measured,
        [r.sigma1 for r in trace.records],
        abs(map_lobes - len(centres)) <= 1,
    )
