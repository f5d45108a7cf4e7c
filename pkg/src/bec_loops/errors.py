"""Exception hierarchy shared by the solver modules."""


class BecLoopsError(Exception):
    """Base class for all errors raised by this package."""


class NoDoubleWell(BecLoopsError):
    """The sampled potential does not have two minima separated by a barrier."""


class ConvergenceFailure(BecLoopsError):
    """An eigensolver did not meet its residual bound."""


class GridMismatch(BecLoopsError):
    """Two sampled objects live on different grids."""


class NoBoundMode(BecLoopsError):
    """A split single-well potential has no state below its plateau."""


class NoConvergence(BecLoopsError):
    """Newton iteration exceeded its budget or the line search stalled."""


class SingularJacobian(BecLoopsError):
    """The extended Newton Jacobian could not be factorized."""


class StepCollapse(BecLoopsError):
    """Continuation step shrank below its floor without corrector convergence."""


class DegenerateOmega(BecLoopsError):
    """Tunneling element is zero, leaving the relative phase undetermined."""


class WindowExit(BecLoopsError):
    """The sweep left the parameter window where two modes are well defined."""


class ConfigError(BecLoopsError):
    """A run configuration failed validation."""
