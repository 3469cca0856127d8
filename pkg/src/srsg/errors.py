"""Exception types raised across the package.

The command-line runner maps these onto process exit codes, so every
failure a user can trigger should surface as one of them.
"""


class SRSGError(Exception):
    """Base class for all errors raised by :mod:`srsg`."""


class DatasetIOError(SRSGError):
    """The dataset file could not be opened or read."""


class ParseError(SRSGError):
    """A record in a delimited text file is malformed."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class DimensionError(SRSGError):
    """Records or arrays have inconsistent shapes."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class DegenerateInputError(SRSGError):
    """Input violates a numerical precondition, e.g. a zero column."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ParameterError(SRSGError):
    """A parameter is outside its admissible range."""


class LengthMismatchError(SRSGError):
    """Two label vectors do not have the same length."""


class ConfigError(SRSGError):
    """Malformed configuration file or unknown configuration key."""
