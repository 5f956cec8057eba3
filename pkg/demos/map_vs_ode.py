"""Separatrix map against direct integration.

Seeds the map from the trajectory's first lobe and compares how many lobes
each predicts before escape, for a handful of eps values. The leading-order
map is only good for small eps; agreement degrades as eps grows.
"""
import math

from seplab import separatrix_map as sm
from seplab.core import PhaseState, SystemParams

ic = PhaseState(0.0, 0.0, 1.0)
for eps in (0.001, 0.002, 0.005, 0.01, 0.02):
    rep = sm.predicted_vs_observed(ic, SystemParams(eps, 1.0, math.pi))
    print(f"eps={eps:<6} ode lobes={rep.ode_lobes:3d} escaped={rep.ode_escaped!s:5}  "
          f"map lobes={rep.map_lobes:3d} ({rep.map_outcome})  within one: {rep.agree_within_one}")

# a short FULL-mode trace with higher coefficients switched on; the recurrence
# divides by the kicked sigma1, so a sizeable sigma2 gives a large next sigma1
state = sm.init_map((-0.1, 0.05, 0.0, 0.0), (0.0,) * 4, 0.0, SystemParams(0.01, 1.0))
for rec in sm.run_map(state, 8, sm.Mode.FULL).records:
    print(f"  n={rec.n} sigma1={rec.sigma1:+.6f} psi={rec.psi:+.4f} -> {rec.outcome}")
