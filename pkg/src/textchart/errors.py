"""Exception types shared across the pipeline stages."""

from __future__ import annotations


class TextchartError(Exception):
    """Base class for all library errors."""


class UnparsableNumber(TextchartError):
    """No numeric reading exists for the given token or phrase."""


class AmbiguousPhrase(TextchartError):
    """Multiple conflicting numeric readings; caller should escalate to inference."""


class SchemaViolation(TextchartError):
    """A JSON document does not conform to a published schema.

    ``pointer`` is a JSON-pointer path to the offending location.
    """

    def __init__(self, pointer: str, message: str = ""):
        super().__init__(f"{pointer}: {message}" if message else pointer)
        self.pointer = pointer


class DuplicateRowLabel(TextchartError):
    """A row label being appended already exists in the table."""


class ArityMismatch(TextchartError):
    """A row's cell count does not match the table's column count."""


class EmptyStatement(TextchartError):
    """The selected statement is empty."""


class EmptyExtraction(TextchartError):
    """The statement contains no extractable claims."""


class BackendFailure(TextchartError):
    """The completion backend failed after bounded retries."""


class GroundingFailure(TextchartError):
    """A returned quote is not an exact substring of the source context."""


class ContractViolation(TextchartError):
    """The backend returned a value violating a semantic contract
    (uncertainty out of range, point estimate contradicting an open bound, ...)."""


class DegenerateSchema(TextchartError):
    """No row identifiers could be derived for a topic."""


class InvalidBinding(TextchartError):
    """A chart axis binding does not reference a schema label."""


class NoDataError(TextchartError):
    """The table holds no renderable numeric data."""


class StageError(TextchartError):
    """Wraps an error raised by a pipeline stage, tagged with the stage name."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause


# Exit codes reported by the CLI and in failed run records.
EXIT_PARSE = 2
EXIT_GROUNDING = 3
EXIT_BACKEND = 4
EXIT_RENDER = 5


def stage_exit_code(err: Exception) -> int:
    """Map an error (or its stage-wrapped cause) to the failure class code."""
    cause = err.cause if isinstance(err, StageError) else err
    if isinstance(cause, (EmptyStatement, EmptyExtraction, UnparsableNumber,
                          AmbiguousPhrase, SchemaViolation, DegenerateSchema)):
        return EXIT_PARSE
    if isinstance(cause, GroundingFailure):
        return EXIT_GROUNDING
    if isinstance(cause, (BackendFailure, ContractViolation)):
        return EXIT_BACKEND
    if isinstance(cause, NoDataError):
        return EXIT_RENDER
    return 1
