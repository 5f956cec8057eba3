"""Time integration of the forced oscillator, event detection and lifetime scans.

The solver is scipy's DOP853 (an 8(5,3) embedded Runge-Kutta pair) with its
dense output; escape is a terminal solver event, every other event is found
afterwards on the interpolant.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .core import PhaseState, SystemParams, energy_uv, vector_field
from .errors import SeplabError, StepSizeUnderflow

DEFAULT_ESCAPE_BOUND = 2.0
DEFAULT_SADDLE_RADIUS = 0.05
_SUBDIV = 8


@dataclass(frozen=True)
class IntegratorOptions:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    max_step: float = math.inf
    t_max: float = 100.0

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            tol = getattr(self, name)
            if not 0.0 < tol <= 1e-2:
                raise ValueError(f"{name} must lie in (0, 1e-2], got {tol}")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")


class EventKind(enum.Enum):
    U_ZERO = "UZero"
    SADDLE_ENTRY = "SaddleEntry"
    SADDLE_EXIT = "SaddleExit"
    ESCAPE = "Escape"


@dataclass(frozen=True)
class EventRecord:
    kind: EventKind
    t: float
    state: PhaseState


@dataclass
class Trajectory:
    """Accepted solver steps plus the dense interpolant between them."""

    t: np.ndarray
    y: np.ndarray  # shape (2, n)
    sol: object
    params: SystemParams
    escaped: bool
    escape_bound: float

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    def __call__(self, t):
        return self.sol(t)

    def state(self, t: float) -> PhaseState:
        u, v = self.sol(t)
        return PhaseState(float(t), float(u), float(v))

    def sample(self, dt: float):
        """(t, u, v, E) on a uniform grid from t0 to the final time, inclusive."""
        n = int(math.floor(abs(self.t_end - self.t0) / dt + 1e-9))
        ts = self.t0 + math.copysign(dt, self.t_end - self.t0) * np.arange(n + 1)
        if ts[-1] != self.t_end:
            ts = np.append(ts, self.t_end)
        u, v = self.sol(ts)
        return ts, u, v, energy_uv(u, v)


def integrate(
    ic: PhaseState,
    params: SystemParams,
    opts: IntegratorOptions = IntegratorOptions(),
    escape_bound: float = DEFAULT_ESCAPE_BOUND,
    backward: bool = False,
) -> Trajectory:
    """Integrate over [ic.t, ic.t + t_max] (or backwards) until escape.

    Escape is |u| reaching ``escape_bound``; it stops the integration.
    """
    if escape_bound <= 1.0:
        raise ValueError("escape_bound must exceed 1")
    if abs(ic.u) >= escape_bound:
        raise ValueError("initial state already beyond the escape bound")
    t_end = ic.t - opts.t_max if backward else ic.t + opts.t_max

    def escape(t, y):
        return y[0] * y[0] - escape_bound * escape_bound

    escape.terminal = True
    escape.direction = 1.0

    sol = solve_ivp(
        vector_field(params),
        (ic.t, t_end),
        [ic.u, ic.v],
        method="DOP853",
        rtol=max(opts.rel_tol, 2.3e-14),
        atol=opts.abs_tol,
        max_step=opts.max_step,
        dense_output=True,
        events=[escape],
    )
    if sol.status == -1:
        raise StepSizeUnderflow(f"integration failed at t={sol.t[-1]:.6g}: {sol.message}")
    return Trajectory(sol.t, sol.y, sol.sol, params, sol.status == 1, escape_bound)


def _crossings(traj: Trajectory, g, t_grid, y_grid):
    """Sign changes of the scalar g(u, v) along the grid, polished by brentq.

    Only strict changes between nonzero samples count, so touching zero (or
    starting on it) is not an event.  Returns (t, falling) pairs.
    """
    vals = g(y_grid[0], y_grid[1])
    nz = np.nonzero(vals)[0]
    out = []
    h = lambda s: float(g(*traj.sol(s)))
    for i, j in zip(nz[:-1], nz[1:]):
        ga, gb = vals[i], vals[j]
        if ga * gb > 0:
            continue
        if j > i + 1:
            root = t_grid[i + 1]  # exact zero sample(s) between the two
        else:
            a, b = t_grid[i], t_grid[j]
            root = brentq(h, min(a, b), max(a, b), xtol=1e-12, rtol=4 * np.finfo(float).eps)
        out.append((root, ga > gb))
    return out


def detect_events(
    traj: Trajectory,
    saddle_radius: float = DEFAULT_SADDLE_RADIUS,
    escape_bound: float | None = None,
) -> list[EventRecord]:
    """Events of a trajectory, sorted by time.

    UZero marks sign changes of u strictly after the initial time.
    SaddleEntry/Exit mark crossings of the circle of radius ``saddle_radius``
    around (+-1, 0). Escape is the first time |u| reaches the bound.
    """
    bound = traj.escape_bound if escape_bound is None else escape_bound
    if bound <= 1.0:
        raise ValueError("escape_bound must exceed 1")
    # sample every step at _SUBDIV interior points of the interpolant
    steps = traj.t
    frac = np.linspace(0.0, 1.0, _SUBDIV + 1)[:-1]
    t_grid = (steps[:-1, None] + np.diff(steps)[:, None] * frac[None, :]).ravel()
    t_grid = np.append(t_grid, steps[-1])
    y_grid = traj.sol(t_grid)

    records = []

    def add(kind, t):
        records.append(EventRecord(kind, float(t), traj.state(t)))

    for t, _ in _crossings(traj, lambda u, v: u, t_grid, y_grid):
        add(EventKind.U_ZERO, t)
    r2 = saddle_radius * saddle_radius
    for centre in (1.0, -1.0):
        g = lambda u, v, c=centre: (u - c) ** 2 + v * v - r2
        for t, falling in _crossings(traj, g, t_grid, y_grid):
            add(EventKind.SADDLE_ENTRY if falling else EventKind.SADDLE_EXIT, t)
    esc = _crossings(traj, lambda u, v: u * u - bound * bound, t_grid, y_grid)
    if esc:
        add(EventKind.ESCAPE, esc[0][0])
    elif traj.escaped and bound == traj.escape_bound:
        add(EventKind.ESCAPE, traj.t_end)
    records.sort(key=lambda r: r.t if traj.t_end >= traj.t0 else -r.t)
    return records


@dataclass(frozen=True)
class LifetimeSample:
    epsilon: float
    lifetime: float
    n_lobes: int
    error: str | None = field(default=None, compare=False)


def lifetime(
    ic: PhaseState,
    params: SystemParams,
    escape_bound: float = DEFAULT_ESCAPE_BOUND,
    opts: IntegratorOptions = IntegratorOptions(),
) -> LifetimeSample:
    """Time to first escape (t_max if none) and the number of u = 0 crossings before it."""
    traj = integrate(ic, params, opts, escape_bound)
    events = detect_events(traj, escape_bound=escape_bound)
    t_stop = traj.t_end if traj.escaped else math.inf
    lobes = sum(1 for e in events if e.kind is EventKind.U_ZERO and e.t < t_stop)
    life = (traj.t_end - ic.t) if traj.escaped else opts.t_max
    return LifetimeSample(params.epsilon, float(life), lobes)


def _lifetime_job(args):
    eps, template, ic, opts, bound = args
    try:
        return lifetime(ic, template.with_epsilon(eps), bound, opts)
    except (SeplabError, ValueError, ArithmeticError) as exc:
        return LifetimeSample(eps, math.nan, 0, f"{type(exc).__name__}: {exc}")


def default_workers() -> int:
    env = os.environ.get("SEPLAB_WORKERS")
    if env:
        return max(1, int(env))
    return 1


def scan_lifetime(
    eps_grid,
    template: SystemParams,
    ic: PhaseState,
    opts: IntegratorOptions = IntegratorOptions(),
    escape_bound: float = DEFAULT_ESCAPE_BOUND,
    workers: int | None = None,
) -> list[LifetimeSample]:
    """One LifetimeSample per grid value, in grid order.

    Samples are independent, so they may run in a process pool; a failing
    sample is recorded with a NaN lifetime and the error message.
    """
    grid = [float(e) for e in eps_grid]
    if any(not 0.0 < e < 1.0 for e in grid):
        raise ValueError("every epsilon must lie in (0, 1)")
    if len(set(grid)) != len(grid):
        raise ValueError("epsilon grid has repeated values")
    workers = default_workers() if workers is None else workers
    jobs = [(e, template, ic, opts, escape_bound) for e in grid]
    if workers <= 1 or len(jobs) < 2:
        return [_lifetime_job(j) for j in jobs]
    chunk = max(1, len(jobs) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_lifetime_job, jobs, chunksize=chunk))
