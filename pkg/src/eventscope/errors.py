"""Exception types shared across the engine.

Every error surfaced over the HTTP API maps to exactly one machine-readable
code (see ``code`` attributes); library callers get ordinary exceptions.
"""

from __future__ import annotations


class EventscopeError(Exception):
    """Base class for all engine errors."""

    code = "internal"


class IngestError(EventscopeError):
    """Fatal ingest failure (unreadable stream, missing catalog, ...)."""

    code = "ingest_failed"


class SnapshotError(EventscopeError):
    """Snapshot or index directory is missing, malformed, or incompatible."""

    code = "snapshot_invalid"


class UnmappedMemberError(EventscopeError):
    """A member is unknown to the gazetteer, catalog, or calendar hierarchy."""

    code = "unmapped_member"


class NoSuchMemberError(EventscopeError):
    """A cube op names a member that does not exist at the dimension's level."""

    code = "no_such_member"


class LevelBoundError(EventscopeError):
    """DrillUp at the coarsest level or DrillDown at the finest level."""

    code = "level_bound"


class EmptyQueryError(EventscopeError):
    """Query has no present component."""

    code = "empty_query"


class BadParameterError(EventscopeError):
    """A caller-supplied parameter is out of its documented range."""

    code = "bad_parameter"


class PipelineError(EventscopeError):
    """A cube pipeline failed; carries the 0-based index of the failing op."""

    code = "pipeline_failed"

    def __init__(self, op_index: int, message: str, cause: EventscopeError | None = None):
        super().__init__(f"op {op_index}: {message}")
        self.op_index = op_index
        self.message = message
        if cause is not None:
            self.code = cause.code
