"""Exception hierarchy shared by the library and the command line."""


class QuantileDAError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(QuantileDAError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateSampleError(InvalidArgumentError):
    """A statistic is undefined for the sample (e.g. zero variance)."""


class ConfigError(QuantileDAError):
    """Invalid experiment or fit configuration (CLI exit code 2)."""


class DataError(QuantileDAError):
    """Unreadable or malformed input data (CLI exit code 3)."""
