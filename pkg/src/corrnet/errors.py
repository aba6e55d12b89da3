"""Exception types shared across the package."""


class CorrnetError(Exception):
    """Base class for all errors raised by corrnet."""


class ConfigError(CorrnetError, ValueError):
    """Invalid configuration or command-line usage."""


class DataError(CorrnetError, ValueError):
    """Input data violates a precondition of an operation."""


class DegenerateEntropyError(DataError):
    """A link entropy is zero, so the normalized mutual information is undefined.

    The raw (unnormalized) result is still available on ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
