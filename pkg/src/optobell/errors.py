class OptobellError(Exception):
    """Base class for all errors raised by **optobell**."""


class ParameterError(OptobellError, ValueError):
    """Physical inputs outside their allowed range."""


class InstabilityError(ParameterError):
    """The blue-sideband coupling is not smaller than the red-sideband coupling."""


class EmptyIntervalError(ParameterError):
    """An optimization was requested over an interval with nothing to search."""


class ConfigError(OptobellError, ValueError):
    """Malformed configuration document, override or sweep definition."""


class ConvergenceError(OptobellError, ArithmeticError):
    """An iterative solve or optimizer did not reach its tolerance."""


class SingularSystemError(OptobellError, ArithmeticError):
    """The frequency-domain system matrix is numerically singular.

    Attributes:
        omega (float): Analysis frequency at which the solve failed.
        condition (float): Condition number of the offending matrix.
    """

    def __init__(self, omega: float, condition: float):
        super().__init__(
            "singular system matrix at omega=" + repr(omega) + " (condition number " + format(condition, ".3e") + ")"
        )
        self.omega = omega
        self.condition = condition


class NoSignalError(OptobellError, ArithmeticError):
    """Normalization of the correlation coefficient vanishes."""


def exit_code(exc: BaseException) -> int:
    """Map an exception to the exit code reported by the command line."""
    if isinstance(exc, (ConfigError, ParameterError)):
        return 2
    if isinstance(exc, ArithmeticError):
        return 3
    if isinstance(exc, OSError):
        return 4
    return 1
