"""Lifetime before escape as a function of eps, on a coarse grid.

Use the CLI `scan` command for the full 991-point grid; this keeps to 100
points so it finishes in a few seconds and reports the local maxima.
"""
import math

import numpy as np

from seplab.core import PhaseState, SystemParams
from seplab.integrator import IntegratorOptions, default_workers, scan_lifetime

grid = np.linspace(0.001, 0.1, 100)
samples = scan_lifetime(grid, SystemParams(0.05, 1.0, math.pi), PhaseState(0.0, 0.0, 1.0),
                        IntegratorOptions(t_max=100.0), workers=default_workers())
L = np.array([s.lifetime for s in samples])

peaks = [i for i in range(1, len(L) - 1) if L[i] > L[i - 1] and L[i] > L[i + 1]]
print(f"{len(peaks)} local maxima")
for i in peaks:
    print(f"  eps={grid[i]:.4f}  lifetime={L[i]:.2f}  lobes={samples[i].n_lobes}")
