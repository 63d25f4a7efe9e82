"""Exception types shared across the toolkit."""

from __future__ import annotations


class WaclexError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(WaclexError, ValueError):
    """A vector, matrix, or lexicon dimension disagrees with what the operation requires."""


class ValidationError(WaclexError, ValueError):
    """Input data violates a documented precondition (non-finite values, empty example sets, bad ids)."""


class FileFormatError(WaclexError, ValueError):
    """A persisted document could not be parsed or validated.

    ``path`` and ``line`` (1-based, when known) locate the offending input.
    """

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}: "
        if line is not None:
            where = f"{where}line {line}: "
        super().__init__(f"{where}{message}")
        self.path = path
        self.line = line


class VersionMismatchError(FileFormatError):
    """The file's format tag or version is not one this build can read."""


class TruncatedFileError(FileFormatError):
    """The file ended before the number of records its header promised."""


class StoredValueError(FileFormatError):
    """A stored numeric field holds NaN or infinity; the message names the field path."""


class UnknownSessionError(WaclexError, KeyError):
    """No teaching session exists for the given session id."""
