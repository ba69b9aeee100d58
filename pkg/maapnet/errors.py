"""Exception hierarchy shared by all maapnet modules."""

from typing import Any, List, Optional


class MaapNetError(Exception):
    """Base class for every error raised by maapnet."""


class ArityError(MaapNetError):
    """A size parameter (number of terms, vertices, path length) is out of range."""


class DimensionMismatchError(MaapNetError):
    """An input vector does not match the number of inputs expected."""


class NumericOverflowError(MaapNetError):
    """Exact arithmetic hit an implementation limit."""


class SizeLimitError(MaapNetError):
    """An exhaustive oracle was asked for an instance that is too large."""


class _ReportError(MaapNetError):
    def __init__(self, message: str, violations: Optional[List[Any]] = None):
        super().__init__(message)
        self.violations = list(violations or [])


class ProgramValidationError(_ReportError):
    """A MAAP violates its structural invariants."""


class NetValidationError(_ReportError):
    """A ReLU network violates its structural invariants."""


class DocumentParseError(MaapNetError):
    """A serialized document could not be parsed.

    Carries the position of the problem: line/column for JSON syntax errors,
    a dotted field path for schema errors.
    """

    def __init__(self, message: str, line: Optional[int] = None,
                 column: Optional[int] = None, path: Optional[str] = None):
        where = ""
        if line is not None:
            where = f" (line {line}, column {column})"
        elif path:
            where = f" (at {path})"
        super().__init__(f"{message}{where}")
        self.line = line
        self.column = column
        self.path = path


class GraphFormatError(MaapNetError):
    """An edge-list file is malformed."""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class DisconnectedGraphError(MaapNetError):
    """The graph handed to the MST packer is not connected."""


class BigMTooSmallError(MaapNetError):
    """The weight used for missing edges could enter a minimum spanning tree."""
