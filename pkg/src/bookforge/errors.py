"""Exception hierarchy shared across the pipeline.

Grouped by the stage that raises them so the CLI can map each family onto
a stable exit code (config=2, provider=3, validation=4, interruption=5).
"""

from __future__ import annotations


class BookforgeError(Exception):
    """Base class for every error raised by this package."""


# -- configuration -----------------------------------------------------------


class ConfigError(BookforgeError):
    """Bad or missing job configuration; carries the offending field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class TokenizerLoadError(BookforgeError):
    """A tokenizer asset could not be loaded."""


# -- validation --------------------------------------------------------------


class ValidationError(BookforgeError):
    """Structural or bound violations in generated artifacts."""


class IllegalShape(ValidationError):
    """A node nesting that violates the Root/Part/Chapter/Section/Subsection
    hierarchy. Never downgradeable."""


class SchemaShape(ValidationError):
    """Provider JSON has wrong keys or types for the expected artifact."""


class BoundViolation(ValidationError):
    """A count bound (e.g. parts per book) is outside its allowed range.
    Downgradeable to a warning under permissive validation."""


class LocatorError(ValidationError):
    """A section locator does not address a Section node."""


# -- prompt templating -------------------------------------------------------


class MissingBinding(BookforgeError):
    """A template placeholder has no binding; names the placeholder."""

    def __init__(self, placeholder: str, template_id: str):
        self.placeholder = placeholder
        self.template_id = template_id
        super().__init__(
            f"template {template_id!r} requires binding {placeholder!r}"
        )


class UnknownPlaceholder(BookforgeError):
    """Strict rendering received bindings the template does not declare."""

    def __init__(self, placeholders, template_id: str):
        self.placeholders = tuple(sorted(placeholders))
        self.template_id = template_id
        super().__init__(
            f"template {template_id!r} does not declare bindings: "
            f"{', '.join(self.placeholders)}"
        )


# -- provider transport ------------------------------------------------------


class ProviderError(BookforgeError):
    """Base for text/embedding provider failures."""


class AuthError(ProviderError):
    """Credential missing or rejected. Never retried."""


class RateLimited(ProviderError):
    """Provider throttled the request. Retryable."""


class ProviderTimeout(ProviderError):
    """Request timed out. Retryable."""


class TransientProviderError(ProviderError):
    """Server-side failure (5xx). Retryable."""


class ExhaustedRetries(ProviderError):
    """All retry attempts failed; wraps the last cause."""

    def __init__(self, attempts: int, last: Exception):
        self.attempts = attempts
        self.last = last
        super().__init__(f"gave up after {attempts} attempts: {last}")


class EmptyGeneration(ProviderError):
    """Provider returned blank output after retries."""


# -- JSON extraction ---------------------------------------------------------


class NoJsonFound(BookforgeError):
    """No JSON object/array start found in the provider output."""


class MalformedJson(BookforgeError):
    """A JSON candidate was found but failed strict parsing."""

    def __init__(self, message: str, byte_offset: int):
        self.byte_offset = byte_offset
        super().__init__(f"{message} (byte offset {byte_offset})")


# -- embeddings / decontamination -------------------------------------------


class DimMismatch(BookforgeError):
    """Two vectors of different dimensionality were compared."""


class EmptyBenchmark(BookforgeError):
    """Nearest-neighbor search against an empty benchmark set."""


# -- scheduling --------------------------------------------------------------


class OversizeRecord(BookforgeError):
    """A single record exceeds the chunk token target and can never fit."""

    def __init__(self, record_id: str, token_count: int, target: int):
        self.record_id = record_id
        self.token_count = token_count
        self.target = target
        super().__init__(
            f"record {record_id!r} has {token_count} tokens, "
            f"exceeding chunk target {target}"
        )


class InsufficientReplay(BookforgeError):
    """Replay pool too small for the requested mix ratio."""

    def __init__(self, shortfall_tokens: int):
        self.shortfall_tokens = shortfall_tokens
        super().__init__(
            f"replay pool is short by {shortfall_tokens} tokens "
            f"for the requested ratio"
        )


# -- synthesis / checkpointing ----------------------------------------------


class CheckpointMismatch(BookforgeError):
    """An existing checkpoint was produced under a different job fingerprint."""


class QaGenerationInterrupted(BookforgeError):
    """A provider failure occurred mid QA sequence; carries the rank reached
    so a resumed run can pick up from there."""

    def __init__(self, rank: int, cause: Exception):
        self.rank = rank
        super().__init__(f"QA generation failed at rank {rank}: {cause}")
        self.__cause__ = cause
