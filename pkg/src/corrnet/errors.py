"""Exception types shared across the package."""

from __future__ import annotations


class CorrnetError(Exception):
    """Base class for every error this package raises deliberately."""


class IngestError(CorrnetError):
    """Malformed input data; carries the offending row/column when known."""

    def __init__(self, message: str, *, row: int | None = None, column: str | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column


class AlignmentError(CorrnetError):
    """Input calendars cannot be aligned to a common trading-day grid."""


class DegenerateSeriesError(CorrnetError):
    """A series has no variance where variance is required."""
