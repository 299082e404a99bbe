"""Exception types shared across the package.

The CLI maps these onto exit codes: validation problems exit with 2,
numerical failures with 3 and I/O problems with 4.
"""


class SSNEError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ValidationError(SSNEError, ValueError):
    """Invalid input: bad parameters, malformed graphs, impossible requests."""

    exit_code = 2


class ParseError(ValidationError):
    """An edge-list line could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalError(SSNEError, ArithmeticError):
    """A numerical routine diverged, failed to converge or hit a singular system."""

    exit_code = 3

    def __init__(self, message: str, residual: float | None = None):
        self.residual = residual
        super().__init__(message)


class ResourceError(SSNEError, MemoryError):
    """A dense allocation would exceed the configured memory cap."""

    exit_code = 3
