"""Exception hierarchy shared across the package.

Every error raised by the library derives from AssemblyError so callers can
catch one base type at API boundaries (CLI, HTTP service).
"""

from __future__ import annotations


class AssemblyError(Exception):
    """Base class for all library errors."""

    #: Index of the edit op that failed, set by the executor when an error
    #: surfaces mid-instruction. None when not applicable.
    op_index: int | None = None

    @property
    def kind(self) -> str:
        """Stable machine-readable error kind (used by the HTTP error envelope)."""
        name = type(self).__name__
        return name[: -len("Error")] if name.endswith("Error") else name


class CapacityError(AssemblyError):
    """Requested more identifiers than the id space holds."""


class UnknownIdError(AssemblyError):
    """An asset id does not exist in the collection at hand."""

    def __init__(self, asset_id: str, message: str | None = None):
        super().__init__(message or f"unknown asset id {asset_id!r}")
        self.asset_id = asset_id


class PositionError(AssemblyError):
    """A 1-based timeline position is out of range or malformed."""


class TemplateError(AssemblyError):
    """Template lookup or rendering failed."""


class ParseError(AssemblyError):
    """Input text (instruction or manifest) does not match the expected grammar."""

    def __init__(self, message: str, position: int | None = None, line: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line})"
        elif position is not None:
            loc = f" (at offset {position})"
        super().__init__(message + loc)
        self.position = position
        self.line = line


class NoMatchError(AssemblyError):
    """A cue matched nothing in its search domain."""


class AmbiguousError(AssemblyError):
    """A semantic cue matched two or more assets."""


class GenerationError(AssemblyError):
    """Sample or dataset generation could not satisfy its constraints."""


class SchemaError(AssemblyError):
    """A persisted dataset or prediction file violates its schema."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"{message} (line {line})" if line is not None else message)
        self.line = line


class EvalError(AssemblyError):
    """Scoring was asked about samples that do not exist."""


class RoutingSpecError(AssemblyError):
    """A routing specification violates its matrix invariants."""


class NoTimelineFoundError(AssemblyError):
    """A model response contains no recognizable timeline object."""


class NonConsecutiveKeysError(AssemblyError):
    """Timeline object keys are not the consecutive integers 1..Q."""


class MissingClipIdError(AssemblyError):
    """A timeline record lacks a clip_id field."""
