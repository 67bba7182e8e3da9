"""Exception hierarchy.

Each class carries the CLI exit code it maps to, so the front end never has
to guess how to report a failure.
"""

from __future__ import annotations


class NearUnitError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1


class ValidationError(NearUnitError, ValueError):
    """Inputs violate a documented precondition."""

    exit_code = 2


class ConfigError(ValidationError):
    """A config file could not be parsed or holds an invalid field."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field


class SpecificationError(ValidationError):
    """A noise specification is internally inconsistent (e.g. common ARMA zeros)."""


class InstabilityError(ValidationError):
    """An AR polynomial has a zero on or inside the unit circle."""


class DegenerateFilterError(ValidationError):
    """The filter sum vanishes, so the attraction constant is zero."""


class ClassificationError(ValidationError):
    """A scaling regime was requested that does not match the Hurst index."""


class UnsupportedCoefficientError(ValidationError):
    """The AR coefficient is outside the range an identity is valid for."""


class DegenerateEmbeddingError(NearUnitError, ArithmeticError):
    """Circulant embedding produced a materially negative eigenvalue."""

    exit_code = 3

    def __init__(self, eigenvalue: float, index: int, tolerance: float):
        super().__init__(
            f"circulant embedding eigenvalue {eigenvalue:.6g} at index {index} "
            f"is below -{tolerance:.3g}; use the Cholesky sampler instead"
        )
        self.eigenvalue = eigenvalue
        self.index = index


class AccuracyError(NearUnitError, ArithmeticError):
    """Quadrature did not reach the requested tolerance."""

    exit_code = 3

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error={error:.3g})")
        self.estimate = estimate
        self.error = error


class DegeneratePathError(NearUnitError, ArithmeticError):
    """Sum of squared regressors is zero, so the OLS statistics are undefined."""

    exit_code = 3


class DegenerateDriverError(NearUnitError, ArithmeticError):
    """A driver path has zero L2 norm on the grid."""

    exit_code = 3
