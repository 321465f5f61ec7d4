"""Exception types shared across the pipeline.

Every error raised by the library derives from ClaimLensError so callers
(service, CLI) can map failures to HTTP codes / exit codes in one place.
"""

from __future__ import annotations


class ClaimLensError(Exception):
    """Base class for all claimlens errors."""


class EmptyDocument(ClaimLensError):
    """Input text contains no sentence-worthy content."""


class OffsetOutOfBounds(ClaimLensError):
    """A character offset falls outside the document text."""


class AlignmentGap(ClaimLensError):
    """A sentence received zero tokens during token alignment."""


class DocumentTooLong(ClaimLensError):
    """Document tokenizes to more tokens than the provider allows."""


class BackendUnavailable(ClaimLensError):
    """A model backend failed to load or run.

    ``diagnostics`` carries backend-specific detail; ``partial`` (when set
    by batch classification) holds results completed before the failure,
    and ``failed_indices`` the candidate indices that never got a verdict.
    """

    def __init__(self, message: str, *, diagnostics: str = "",
                 partial: dict | None = None,
                 failed_indices: list[int] | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics
        self.partial = partial or {}
        self.failed_indices = failed_indices or []


class TextTooLong(ClaimLensError):
    """A sentence pair exceeds the NLI model context; never truncated silently."""


class InfeasiblePattern(ClaimLensError):
    """A scripted attention pattern would violate the causal mask."""


class IOFailure(ClaimLensError):
    """Attention file could not be read or written (bad magic, version, I/O)."""


class DimensionMismatch(ClaimLensError):
    """Attention matrix size does not match the document's token count."""


class IndexOutOfRange(ClaimLensError):
    """Sentence index outside [0, n)."""


class SelfPair(ClaimLensError):
    """Saliency of a sentence with itself was requested."""


class StaleCache(ClaimLensError):
    """Cached stages disagree about the document; signals corruption."""


class PipelineError(ClaimLensError):
    """Wraps a stage failure with the stage name for error reporting."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
