"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations


class BratteliError(Exception):
    """Base class for every error raised on bad input."""


class SpecSyntaxError(BratteliError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        self.message = message
        where = ""
        if line is not None:
            where = f" at line {line}, column {column}"
        super().__init__(message + where)


class DimensionError(BratteliError):
    pass


class NegativeEntryError(BratteliError):
    pass


class InvalidDiagramError(BratteliError):
    def __init__(self, message: str, level: int | None = None, index: int | None = None):
        self.level = level
        self.index = index
        super().__init__(message)


class LevelRangeError(BratteliError):
    pass


class ResourceLimitError(BratteliError):
    pass


class UnseparatedError(BratteliError):
    """Clustering could not produce a separated report where one was required."""


class OrderError(BratteliError):
    pass


class PathError(BratteliError):
    pass


class ToeplitzError(BratteliError):
    pass


class NotDistinguishedError(BratteliError):
    pass
