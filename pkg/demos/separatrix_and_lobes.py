"""Follow one forced trajectory from the origin and list its lobes.

Starts exactly on the unperturbed separatrix, u(0)=0, u'(0)=1, and prints
the event log: every zero crossing of u marks a completed lobe.
"""
import math
import sys

from seplab.core import PhaseState, SystemParams, energy_uv
from seplab.integrator import IntegratorOptions, detect_events, integrate

eps = float(sys.argv[1]) if len(sys.argv) > 1 else 0.05

params = SystemParams(eps, 1.0, math.pi)
traj = integrate(PhaseState(0.0, 0.0, 1.0), params, IntegratorOptions(t_max=100.0))
print(f"eps={eps}: escaped={traj.escaped} at t={traj.t_end:.4f}")

for ev in detect_events(traj):
    u, v = ev.state.u, ev.state.v
    print(f"  {ev.kind.value:12s} t={ev.t:9.4f}  u={u:+.4f} v={v:+.4f}  E-1/2={energy_uv(u, v) - 0.5:+.3e}")
