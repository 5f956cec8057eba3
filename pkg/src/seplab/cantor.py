"""Sets of delta = -omega ln(eps) for which the leading-order map prolongs.

A step n is allowed when

    cos(psi(n) + (n-1) delta/2) < -16 sigma_1(n) cosh(pi omega/2).

The sweep runs the leading-order map on a delta grid (vectorised over the
grid), keeps the grid points passing every step up to N, merges them into
intervals and sharpens the endpoints by bisection.  Generation N+1 is
intersected with generation N, so the sets are nested by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .melnikov import delta_b1_quadrature
from .separatrix_map import Normalization

DEFAULT_RESOLUTION = 1e-3


def default_delta0(omega: float = 1.0) -> float:
    """Lower end of the delta range used by default (eps_0 = 0.1)."""
    return omega * math.log(10.0)


def prolongation_condition(sigma1, psi, n, delta, omega):
    """The prolongation inequality with the secular phase written via delta.

    Works elementwise on arrays.
    """
    arg = np.asarray(psi) + 0.5 * (np.asarray(n) - 1) * np.asarray(delta)
    return np.cos(arg) < -16.0 * np.asarray(sigma1) * math.cosh(0.5 * math.pi * omega)


@dataclass(frozen=True)
class IntervalSet:
    intervals: tuple
    generation: int
    delta_range: tuple = (math.nan, math.nan)
    resolution: float = DEFAULT_RESOLUTION

    def __post_init__(self):
        prev = -math.inf
        for lo, hi in self.intervals:
            if not lo < hi or lo < prev:
                raise ValueError("intervals must be sorted, disjoint and non-empty")
            prev = hi

    def measure(self) -> float:
        return float(sum(hi - lo for lo, hi in self.intervals))

    def restrict(self, lo: float, hi: float) -> "IntervalSet":
        return IntervalSet(_intersect(self.intervals, ((lo, hi),)), self.generation, (lo, hi), self.resolution)

    def to_dict(self) -> dict:
        return {
            "generation": self.generation,
            "intervals": [[a, b] for a, b in self.intervals],
            "measure": self.measure(),
        }


def measure(s: IntervalSet) -> float:
    return s.measure()


def is_refinement(coarse: IntervalSet, fine: IntervalSet, tol: float | None = None) -> bool:
    """True when every interval of ``fine`` lies inside one of ``coarse`` (up to tol)."""
    tol = coarse.resolution / 10.0 if tol is None else tol
    for lo, hi in fine.intervals:
        if not any(a - tol <= lo and hi <= b + tol for a, b in coarse.intervals):
            return False
    return True


def _intersect(a, b):
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if lo < hi:
            out.append((lo, hi))
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return tuple(out)


class LeadingModel:
    """Leading-order map: sigma_1 drops to zero after the first step."""

    def __init__(self, sigma1: float, psi: float, omega: float, normalization=Normalization.ORACLE):
        self.sigma1, self.psi, self.omega = float(sigma1), float(psi), float(omega)
        if normalization is Normalization.PAPER:
            self.pref = math.pi / (16.0 * math.cosh(0.5 * math.pi * omega))
        else:
            self.pref = delta_b1_quadrature(omega, 0.0) / 16.0

    def steps_passed(self, delta, N):
        """(N+1, m) boolean: row g says the first g steps were all allowed."""
        delta = np.asarray(delta, dtype=float)
        out = np.ones((N + 1, delta.size), dtype=bool)
        sigma = np.full(delta.size, self.sigma1)
        psi = np.full(delta.size, self.psi)
        alive = np.ones(delta.size, dtype=bool)
        with np.errstate(divide="ignore", invalid="ignore"):
            for n in range(1, N + 1):
                alive &= prolongation_condition(sigma, psi, n, delta, self.omega)
                out[n] = alive
                phase = psi + 0.5 * (n - 1) * delta
                s = sigma + self.pref * np.cos(phase)
                psi = psi - 0.5 * self.omega * (np.log(np.abs(s) / 16.0) - math.log(2.0))
                sigma = np.zeros_like(sigma)
        return out

    def psi_trace(self, delta: float, N: int):
        """psi(1..N+1) at one delta, for cross-checks against the map module."""
        sigma, psi = self.sigma1, self.psi
        trace = [psi]
        for n in range(1, N + 1):
            s = sigma + self.pref * math.cos(psi + 0.5 * (n - 1) * delta)
            psi = psi - 0.5 * self.omega * (math.log(abs(s) / 16.0) - math.log(2.0))
            sigma = 0.0
            trace.append(psi)
        return np.array(trace)


class IdealizedModel:
    """sigma_1 = -1/(32 cosh(pi omega/2)) and psi = 0 at every step.

    The threshold is then 1/2 and step n removes the bands where
    (n-1) delta/2 lies within pi/3 of a multiple of 2 pi.  The first step
    (cos 0 = 1) is taken as given.
    """

    def __init__(self, omega: float):
        self.omega = float(omega)
        self.sigma1 = -1.0 / (32.0 * math.cosh(0.5 * math.pi * omega))

    def steps_passed(self, delta, N):
        delta = np.asarray(delta, dtype=float)
        out = np.ones((N + 1, delta.size), dtype=bool)
        alive = np.ones(delta.size, dtype=bool)
        for n in range(2, N + 1):
            alive &= prolongation_condition(self.sigma1, 0.0, n, delta, self.omega)
            out[n] = alive
        return out


def _runs(mask):
    """Index pairs (first, last) of maximal runs of True."""
    if not mask.any():
        return []
    d = np.diff(np.concatenate([[0], mask.astype(np.int8), [0]]))
    starts = np.nonzero(d == 1)[0]
    ends = np.nonzero(d == -1)[0] - 1
    return list(zip(starts, ends))


def _bisect(model, g, good, bad, tol):
    """Move ``good`` (passing) towards ``bad`` until |good - bad| < tol, vectorised."""
    good = np.asarray(good, dtype=float)
    bad = np.asarray(bad, dtype=float)
    while good.size and np.max(np.abs(good - bad)) >= tol:
        mid = 0.5 * (good + bad)
        ok = model.steps_passed(mid, g)[g]
        good = np.where(ok, mid, good)
        bad = np.where(ok, bad, mid)
    return good


def _generation_intervals(model, g, grid, passed, tol):
    lo_edge, hi_edge = grid[0], grid[-1]
    runs = _runs(passed)
    if not runs:
        return ()
    left_good = np.array([grid[i] for i, _ in runs])
    left_bad = np.array([grid[i - 1] if i > 0 else np.nan for i, _ in runs])
    right_good = np.array([grid[j] for _, j in runs])
    right_bad = np.array([grid[j + 1] if j + 1 < grid.size else np.nan for _, j in runs])
    lm = ~np.isnan(left_bad)
    rm = ~np.isnan(right_bad)
    left = np.where(lm, 0.0, lo_edge)
    right = np.where(rm, 0.0, hi_edge)
    left[lm] = _bisect(model, g, left_good[lm], left_bad[lm], tol)
    right[rm] = _bisect(model, g, right_good[rm], right_bad[rm], tol)
    return tuple((float(a), float(b)) for a, b in zip(left, right) if a < b)


def admissible_sets(
    N: int,
    delta_range: tuple[float, float],
    omega: float = 1.0,
    seed: tuple[float, float] = (-0.1, 0.0),
    resolution: float = DEFAULT_RESOLUTION,
    model=None,
) -> list[IntervalSet]:
    """Generations 0..N of the admissible delta set.

    ``seed`` = (sigma_1(1), psi(1)) for the leading-order map; ``model``
    overrides it (e.g. IdealizedModel).
    """
    lo, hi = delta_range
    if not 0.0 < lo < hi:
        raise ValueError("delta_range must satisfy 0 < lo < hi")
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if N < 0:
        raise ValueError("N must be non-negative")
    if model is None:
        model = LeadingModel(seed[0], seed[1], omega)
    m = int(math.ceil((hi - lo) / resolution)) + 1
    grid = np.linspace(lo, hi, m)
    passed = model.steps_passed(grid, N)
    tol = resolution / 100.0
    sets = [IntervalSet(((float(lo), float(hi)),), 0, (lo, hi), resolution)]
    for g in range(1, N + 1):
        raw = _generation_intervals(model, g, grid, passed[g], tol)
        sets.append(IntervalSet(_intersect(raw, sets[-1].intervals), g, (lo, hi), resolution))
    return sets


def admissible_set(N, delta_range, omega=1.0, seed=(-0.1, 0.0), resolution=DEFAULT_RESOLUTION, model=None):
    return admissible_sets(N, delta_range, omega, seed, resolution, model)[-1]


def window_ratios(coarse: IntervalSet, fine: IntervalSet, period: float = 4 * math.pi, centre: float = 0.0):
    """measure(fine)/measure(coarse) on each full window [c + k P - P/2, c + k P + P/2] inside the range."""
    lo, hi = coarse.delta_range
    k0 = math.ceil((lo - centre + period / 2) / period)
    out = []
    k = k0
    while centre + k * period + period / 2 <= hi:
        a, b = centre + k * period - period / 2, centre + k * period + period / 2
        mc = coarse.restrict(a, b).measure()
        if mc > 0:
            out.append((a, b, fine.restrict(a, b).measure() / mc))
        k += 1
    return out


@dataclass
class SelfSimilarityReport:
    ratios: list = field(default_factory=list)  # per generation: list of window ratios
    spread: list = field(default_factory=list)  # (max - min)/mean per generation


def self_similarity(sets, period=4 * math.pi):
    """Per-window measure ratios between successive generations (reported only)."""
    rep = SelfSimilarityReport()
    for a, b in zip(sets, sets[1:]):
        r = [x for _, _, x in window_ratios(a, b, period)]
        rep.ratios.append(r)
        rep.spread.append((max(r) - min(r)) / np.mean(r) if r and np.mean(r) > 0 else math.nan)
    return rep
