"""
Common base classes for lexxfer exceptions.
"""


class LexXferError(Exception):
    """Common base class for lexxfer exceptions."""


class ConfigError(LexXferError):
    """Common base class for run configuration and parameter exceptions."""


class IngestError(LexXferError):
    """Common base class for exceptions occurring while loading a dataset."""


class ReadError(IngestError):
    """A backend could not read the data as the attempted file format."""


class LexXferValueError(LexXferError, ValueError):
    """An operation was given inputs that violate its preconditions."""
