"""Exception hierarchy shared across the package."""

from __future__ import annotations


class ConfmotifError(Exception):
    """Base class for all package errors."""


class ParseError(ConfmotifError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, record: int | None = None):
        self.line = line
        self.record = record
        where = []
        if record is not None:
            where.append(f"record {record}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class SerializationError(ConfmotifError):
    pass


class ValenceError(ConfmotifError):
    pass


class GeometryError(ConfmotifError):
    """Degenerate or mismatched geometric input."""


class AttachmentError(ConfmotifError):
    """An attachment could not be realised."""


class ClashError(AttachmentError):
    pass


class MergeConflictError(AttachmentError):
    pass


class PolicyError(ConfmotifError):
    """A policy returned a choice outside the offered candidates."""


class PlacementError(ConfmotifError):
    """No clash-free pose could be found for the first motif."""


class GraphMismatchError(ConfmotifError):
    def __init__(self, message: str, offenders: list[int] | None = None):
        self.offenders = offenders or []
        super().__init__(message)


class DegenerateRangeError(ConfmotifError):
    pass
