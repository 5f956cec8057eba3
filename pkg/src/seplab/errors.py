"""Exception types raised by the numerical routines."""


class SeplabError(Exception):
    """Base class for all numerical failures reported by seplab."""


class StepSizeUnderflow(SeplabError):
    pass


class QuadratureNonConvergent(SeplabError):
    pass


class IllConditionedFit(SeplabError):
    pass


class RegularizationDiverges(SeplabError):
    pass


class WrongBranch(SeplabError):
    """Raised when a matching step is requested on the escaping branch."""
