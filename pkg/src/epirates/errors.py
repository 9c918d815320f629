"""Exception classes shared across the package.

Each class maps to one CLI/service failure category so callers can turn
a caught exception into a single-line diagnostic and a stable exit code.
"""


class EpiratesError(Exception):
    """Base class for all domain errors raised by this package."""


class ParseError(EpiratesError):
    """A data file could not be parsed; message carries the line number."""


class DataValidationError(EpiratesError):
    """A value or series violates a structural invariant."""


class EmptyWindowError(EpiratesError):
    """Windowing removed every observation from a required series."""


class EmptyFeasibleRegionError(EpiratesError):
    """No grid cell satisfies the mode-window constraint."""


class NoCommonGridError(EpiratesError):
    """Two series share no time stamps, so they cannot be compared."""
