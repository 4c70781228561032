"""Exception hierarchy.

Each class carries the CLI exit code its failures map to.
"""


class MertensError(Exception):
    exit_code = 1


class ParameterError(MertensError, ValueError):
    """A precondition on the numeric parameters is violated."""

    exit_code = 5


class DomainError(ParameterError):
    """Argument outside the domain where the formula holds."""


class RangeError(ParameterError):
    """Result would overflow, or an iteration failed to converge."""


class PoleError(DomainError):
    pass


class CoverageError(MertensError):
    """Requested range exceeds the sieved limit or the loaded zeros."""

    exit_code = 4


class PrecisionError(MertensError):
    exit_code = 4


class AccuracyError(MertensError):
    """Quadrature or series failed to reach the requested tolerance."""


class FormatError(MertensError, ValueError):
    exit_code = 2

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class OrderError(FormatError):
    pass


class CorruptionError(FormatError):
    pass


class ConsistencyError(MertensError):
    exit_code = 5


class VerdictError(MertensError):
    exit_code = 1
