"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class RlwPinnError(Exception):
    """Base class for package errors."""


class PropagationError(RlwPinnError, FloatingPointError):
    """A jet or tape primitive produced a non-finite value."""


class UsageError(RlwPinnError, ValueError):
    """An operation was called with arguments violating its contract."""


class RegionError(RlwPinnError, ValueError):
    """A solution field was queried outside the region it covers."""


class OptimizerError(RlwPinnError, FloatingPointError):
    """An optimizer received non-finite input."""


class TrainingAborted(RlwPinnError):
    """Training hit a non-finite loss; carries the last good state.

    ``params`` holds the last parameters whose loss was finite and
    ``history`` the entries recorded up to that point.  For causal runs
    ``windows`` lists the windows finished before the failure and
    ``failed_window`` the index that aborted.
    """

    def __init__(self, message, params=None, history=None, windows=None, failed_window=None):
        super().__init__(message)
        self.params = params
        self.history = history if history is not None else []
        self.windows = windows if windows is not None else []
        self.failed_window = failed_window


class InstabilityError(RlwPinnError, FloatingPointError):
    """The finite-difference solver blew up."""

    def __init__(self, message, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


class CheckpointError(RlwPinnError):
    """A checkpoint file could not be parsed."""


class UnsupportedVersionError(CheckpointError):
    """A checkpoint was written with an unknown format version."""


class ConfigError(RlwPinnError, ValueError):
    """A run configuration is missing a key or has an invalid value."""
