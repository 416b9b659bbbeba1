"""Exception types raised by the solvers.

Numerical findings that contradict the theory (a singular Jacobian, a
broken continuation) are raised, never regularized away.
"""


class FraclapError(RuntimeError):
    """Base class for all solver failures."""


class StalledError(FraclapError):
    pass


class NewtonSingularError(FraclapError):
    pass


class NoPlateauError(FraclapError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ContinuityBreakError(FraclapError):
    pass


class BranchStallError(FraclapError):
    def __init__(self, message, last_s=None):
        super().__init__(message)
        self.last_s = last_s


class ExtrapolationError(FraclapError):
    pass


class BracketError(FraclapError):
    pass


class QuadratureError(FraclapError):
    def __init__(self, message, worst_radius=None):
        super().__init__(message)
        self.worst_radius = worst_radius
