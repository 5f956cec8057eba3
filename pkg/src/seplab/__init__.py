"""Numerical laboratory for near-separatrix motion of the forced Duffing oscillator."""

from .core import (
    Branch,
    PhaseState,
    Region,
    SeparatrixBranch,
    SystemParams,
    classify,
    energy,
    rhs,
    separatrix_state,
)
from .errors import (
    IllConditionedFit,
    QuadratureNonConvergent,
    RegularizationDiverges,
    SeplabError,
    StepSizeUnderflow,
    WrongBranch,
)

__version__ = "0.1.0"
