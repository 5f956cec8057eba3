"""Solutions of the separatrix linearisation v'' + 2v - 6 tanh(t)^2 v = 0.

v1 = sech^2 t is the time-shift mode.  The second solution is usually
written as

    v2 = sinh(4t)/(32 cosh^2 t) + sinh(2t)/(4 cosh^2 t) + 3t/(8 cosh^2 t),

which simplifies to sinh(2t)/8 + 3/8 tanh t + 3/8 t sech^2 t; the short form
avoids the overflow of sinh(4t) and exposes the growing part sinh(2t)/8
exactly.  The pair is normalised so that v1 v2' - v1' v2 = 1.

Asymptotics used throughout the package:
    v1 ~ 4 exp(-2|t|),  v2 ~ sign(t) exp(2|t|)/16 + 3/8 sign(t).
"""

from __future__ import annotations

import numpy as np


def sech2(t):
    """sech(t)^2 without overflow for large |t|."""
    e = np.exp(-2.0 * np.abs(t))
    return 4.0 * e / (1.0 + e) ** 2


def v1(t):
    return sech2(t)


def dv1(t):
    return -2.0 * sech2(t) * np.tanh(t)


def v2(t):
    t = np.asarray(t, dtype=float)
    return np.sinh(2.0 * t) / 8.0 + 0.375 * np.tanh(t) + 0.375 * t * sech2(t)


def dv2(t):
    t = np.asarray(t, dtype=float)
    s = sech2(t)
    return np.cosh(2.0 * t) / 4.0 + 0.75 * s - 0.75 * t * s * np.tanh(t)


def v2_printed(t):
    """The three-term form of v2 exactly as usually written (|t| < ~170)."""
    t = np.asarray(t, dtype=float)
    c2 = np.cosh(t) ** 2
    return np.sinh(4 * t) / (32 * c2) + np.sinh(2 * t) / (4 * c2) + 3 * t / (8 * c2)


def wronskian(t):
    return v1(t) * dv2(t) - dv1(t) * v2(t)


def potential(t):
    """Coefficient q(t) = 2 - 6 tanh(t)^2 of the linearised equation."""
    return 2.0 - 6.0 * np.tanh(t) ** 2
