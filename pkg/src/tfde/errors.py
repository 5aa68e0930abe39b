"""Exception hierarchy for the tfde package.

Everything raised on purpose derives from :class:`TfdeError`, so callers can
catch one type. Validation failures double as ``ValueError`` and numerical
failures as ``RuntimeError`` to stay friendly to generic handlers.
"""


class TfdeError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(TfdeError, ValueError):
    """A parameter is outside its documented range."""


class DomainError(TfdeError, ValueError):
    """An evaluation point lies outside the object's validity window."""


class DimensionMismatchError(TfdeError, ValueError):
    """Array arguments have inconsistent shapes."""


class ConfigError(TfdeError, ValueError):
    """A configuration file or command line could not be validated."""


class SoeConstructionError(TfdeError, RuntimeError):
    """Exponential-sum construction missed its error target after refinement."""


class LevelOrderError(TfdeError, RuntimeError):
    """History state used or advanced out of time-level sequence."""


class SolverBreakdownError(TfdeError, RuntimeError):
    """Tridiagonal elimination hit a negligible pivot or a bad residual."""


class ToleranceNotMetError(TfdeError, RuntimeError):
    """Adaptive quadrature stalled before reaching the requested accuracy."""
