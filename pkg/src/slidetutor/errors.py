"""Exception hierarchy shared across the library.

Every error carries a stable ``code`` string so the HTTP layer can map
exceptions to ``{"error": code, "message": ...}`` bodies without string
matching on class names.
"""

from __future__ import annotations


class SlidetutorError(Exception):
    """Base class for all library errors."""

    code = "error"


# --- embedding ---------------------------------------------------------


class ZeroVectorError(SlidetutorError):
    """Vector has no nonzero entry, so its direction is undefined."""

    code = "zero_vector"


class EmptyTextError(SlidetutorError):
    """No tokens survive tokenization."""

    code = "empty_text"


# --- vector index ------------------------------------------------------


class DuplicateIdError(SlidetutorError):
    code = "duplicate_id"


class DimensionMismatchError(SlidetutorError):
    code = "dimension_mismatch"


class IndexFinalizedError(SlidetutorError):
    """Mutation attempted after the index was finalized."""

    code = "index_finalized"


class IndexNotFinalizedError(SlidetutorError):
    """Search or save attempted before finalization."""

    code = "index_not_finalized"


class EmptyIndexError(SlidetutorError):
    code = "empty_index"


class IoFailureError(SlidetutorError):
    code = "io_failure"


class CorruptManifestError(SlidetutorError):
    """Index files fail validation: version, count, or size mismatch."""

    code = "corrupt_manifest"


# --- rerank ------------------------------------------------------------


class MissingDocumentError(SlidetutorError):
    code = "missing_document"


class ScorerFailureError(SlidetutorError):
    code = "scorer_failure"


# --- pipeline ----------------------------------------------------------


class EmptyQueryError(SlidetutorError):
    code = "empty_query"


class GeneratorFailureError(SlidetutorError):
    code = "generator_failure"


# --- corpus ------------------------------------------------------------


class MissingFileError(SlidetutorError):
    code = "missing_file"


class SchemaViolationError(SlidetutorError):
    """Malformed corpus record; message names the file and line."""

    code = "schema_violation"


class DanglingImageRefError(SlidetutorError):
    code = "dangling_image_ref"


class EmptyCorpusError(SlidetutorError):
    code = "empty_corpus"


class EmbedFailureError(SlidetutorError):
    """Embedding a record failed; message names the record id."""

    code = "embed_failure"


# --- metrics -----------------------------------------------------------


class EmptyReferenceError(SlidetutorError):
    code = "empty_reference"


class LengthMismatchError(SlidetutorError):
    code = "length_mismatch"


# --- users and sessions -------------------------------------------------


class DuplicateUsernameError(SlidetutorError):
    code = "duplicate_username"


class UnknownUserError(SlidetutorError):
    code = "unknown_user"


# --- adapters ----------------------------------------------------------


class TtsFailureError(SlidetutorError):
    """External text-to-speech service unreachable or malformed reply."""

    code = "tts_failure"


class EmbedderFailureError(SlidetutorError):
    """External embedding service unreachable or malformed reply."""

    code = "embedder_failure"
