"""Exception hierarchy shared by every module of the package."""


class ComplexityError(Exception):
    """Base class for all errors raised by addcomplexity."""


class DomainError(ComplexityError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(ComplexityError, ValueError):
    """Malformed input data (unsorted spectra, empty grids, ...)."""


class ConfigurationError(ComplexityError, ValueError):
    """A model or run configuration cannot be materialized."""


class RegimeError(ComplexityError):
    """The requested method is undefined in this parameter regime.

    ``kind`` is a short machine tag, e.g. ``"n=1"``, ``"bounded"`` or
    ``"degenerate"``.
    """

    def __init__(self, message, kind="n=1"):
        super().__init__(message)
        self.kind = kind


class ResourceError(ComplexityError):
    """A computation exceeded its term cap."""


class InsufficientCoverageError(ComplexityError):
    """A truncated distribution was queried beyond its covered mass."""


class ConsistencyError(ComplexityError, RuntimeError):
    """Internal invariant broken, e.g. a finite spectrum ran out before the
    threshold was reached."""
