"""Exception hierarchy shared by every module."""


class SarnakLabError(Exception):
    """Base class for all errors raised by sarnaklab."""


class DomainError(SarnakLabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapacityError(SarnakLabError, MemoryError):
    """A request would exceed a configured size or memory ceiling."""


class OutOfRangeError(SarnakLabError, IndexError):
    """An index falls outside the range covered by a table."""


class InvalidCoefficientError(DomainError):
    """A Hall-Petresco coefficient is not in the required lower-central-series term."""


class TableFormatError(SarnakLabError):
    """Base class for cache-file decode failures."""


class HeaderError(TableFormatError):
    pass


class VersionError(TableFormatError):
    pass


class TruncatedError(TableFormatError):
    pass


class SchemaError(SarnakLabError):
    """A manifest or result record does not match the expected schema."""
