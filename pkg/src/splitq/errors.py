"""Exception hierarchy shared across splitq."""

from __future__ import annotations


class SplitQError(Exception):
    """Base class for all splitq errors."""


class SchemaError(SplitQError):
    """A schema is malformed, or a value does not conform to its schema."""

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        if path is not None:
            message = f"{message} (at {path or '<root>'!r})"
        super().__init__(message)


class ValidationError(SplitQError):
    """A columnar dataset violates a structural invariant."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations[:8])
        extra = "" if len(self.violations) <= 8 else f" (+{len(self.violations) - 8} more)"
        super().__init__(f"{len(self.violations)} invariant violation(s): {lines}{extra}")


class DatasetFormatError(SplitQError):
    """Base class for on-disk dataset problems."""


class MissingArrayError(DatasetFormatError):
    """A file listed in the manifest is absent."""


class ChecksumError(DatasetFormatError):
    """A file's checksum disagrees with the manifest."""


class LengthMismatchError(DatasetFormatError):
    """A file's length disagrees with the manifest."""


class QueryError(SplitQError):
    """Base class for query diagnostics; carries an optional source span."""

    def __init__(self, message: str, span=None):
        self.span = span
        super().__init__(message)

    def __str__(self) -> str:
        base = super().__str__()
        if self.span is not None:
            return f"line {self.span.line}, col {self.span.col}: {base}"
        return base


class QuerySyntaxError(QueryError):
    """Lexical, indentation, or grammar error in query source."""


class QueryTypeError(QueryError):
    """Type inference rejected the query."""


class ExecutionError(SplitQError):
    """A query job cannot run (schema/program mismatch, bad fill bindings, ...)."""


class AggregationError(SplitQError):
    """Histogram merge with incompatible specs."""


class ProtocolError(SplitQError):
    """Scheduler protocol misuse (unknown query/subtask, bad submit, ...)."""


class ConfigError(SplitQError):
    """Invalid configuration file or simulation config."""
