"""Exception types shared across the package."""


class QaoalabError(Exception):
    """Base class for all package-specific errors."""


class FormatError(QaoalabError):
    """Malformed input file (FCIDUMP, DIMACS, CSV, operator JSON)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ShapeError(QaoalabError):
    """Qubit count, dimension, or mode mismatch between operands."""


class CapacityError(QaoalabError):
    """Dense construction requested above the configured qubit limit."""


class ValidationError(QaoalabError):
    """An input violates a declared invariant (hermiticity, orthonormality, ...)."""


class ConvergenceError(QaoalabError):
    """Iterative solver failed to converge; carries the last residual."""

    def __init__(self, message: str, residual: float | None = None):
        self.residual = residual
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)


class StabilityError(QaoalabError):
    """Norm drift of an evolution operation exceeded the allowed bound."""


class ModeError(QaoalabError):
    """Operation invoked on a state whose mode (full/sector) does not support it."""


class SweepError(QaoalabError):
    """Too many grid cells failed for the sweep result to be usable."""
