"""Exception hierarchy shared by all sctrim modules."""


class SctrimError(Exception):
    """Base class for all sctrim errors."""


class DataError(SctrimError):
    """Raised when input data violates a contract (missing cells, duplicates, bad values)."""


class ConfigError(SctrimError):
    """Raised for invalid configuration or unusable option combinations."""


class NumericalError(SctrimError):
    """Raised when a numerical routine cannot produce a usable result."""
