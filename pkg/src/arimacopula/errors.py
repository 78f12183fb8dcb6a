"""Exception hierarchy.

Every domain error derives from :class:`ArimaCopulaError` so the CLI can
report it by class name and exit with status 1.
"""


class ArimaCopulaError(Exception):
    """Base class for all domain errors raised by the package."""


class EmptyInput(ArimaCopulaError, ValueError):
    pass


class MissingMonth(ArimaCopulaError, ValueError):
    def __init__(self, year, month):
        super().__init__(f"no records for {year:04d}-{month:02d}")
        self.year = year
        self.month = month


class NonPositiveValue(ArimaCopulaError, ValueError):
    def __init__(self, index):
        super().__init__(f"value at index {index} is not strictly positive")
        self.index = index


class InsufficientLength(ArimaCopulaError, ValueError):
    pass


class InitialMismatch(ArimaCopulaError, ValueError):
    pass


class DegenerateSeries(ArimaCopulaError, ValueError):
    pass


class LagTooLarge(ArimaCopulaError, ValueError):
    pass


class NumericalBreakdown(ArimaCopulaError, ArithmeticError):
    pass


class InvalidDf(ArimaCopulaError, ValueError):
    pass


class SampleSizeUnsupported(ArimaCopulaError, ValueError):
    pass


class NoConvergence(ArimaCopulaError, RuntimeError):
    """Optimizer exhausted its budget. ``best`` holds the best point found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InvalidParameter(ArimaCopulaError, ValueError):
    pass


class BoundaryPoint(ArimaCopulaError, ValueError):
    pass


class TauOutOfRange(ArimaCopulaError, ValueError):
    pass


class FamilyIncompatible(ArimaCopulaError, ValueError):
    pass


class LengthMismatch(ArimaCopulaError, ValueError):
    pass


class InsufficientOverlap(ArimaCopulaError, ValueError):
    pass


class CutoffOutOfRange(ArimaCopulaError, ValueError):
    pass


class ConfigError(ArimaCopulaError, ValueError):
    pass
