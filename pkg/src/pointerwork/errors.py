class PointerworkError(Exception):
    """Base class for every error raised by pointerwork."""


class ConfigError(PointerworkError, ValueError):
    """Bad configuration, violated precondition or dimension mismatch."""


class NumericalError(PointerworkError, ArithmeticError):
    """Non-finite amplitudes, positivity alarms or ill-defined bases."""


class InsufficientDecayError(NumericalError):
    """A decay fit was requested on a series that never decays."""


class DegenerateCouplingWarning(UserWarning):
    """The V operator of a level pair vanishes identically."""
