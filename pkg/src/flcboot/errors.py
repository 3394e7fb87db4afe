"""Exception types raised across the package."""


class FlcError(Exception):
    """Base class for all package errors."""


class DegenerateDesign(FlcError):
    """The nested designs leave no numerator or no denominator degrees of freedom."""


class SaturatedFit(FlcError):
    """The full design reproduces the response exactly, so F is undefined."""


class DomainError(FlcError, ValueError):
    """An argument lies outside the domain of the operation."""


class DimensionMismatch(FlcError, ValueError):
    pass


class NotPSD(FlcError):
    """A covariance matrix has a pivot below the negative tolerance."""


class ConfigError(FlcError):
    pass
