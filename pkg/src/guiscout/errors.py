"""Exception hierarchy shared across the engine.

Every domain error derives from GuiscoutError so callers (CLI, HTTP layer)
can map the whole family to exit codes / status codes in one place.
"""


class GuiscoutError(Exception):
    """Base class for all engine errors."""


class ValidationError(GuiscoutError):
    """A domain value violates its construction invariants."""


class ZeroVector(GuiscoutError):
    """Vector with (near-)zero L2 norm cannot be normalized."""


class DimensionMismatch(GuiscoutError):
    """Vector length differs from the configured embedding dimension."""


class DuplicateId(GuiscoutError):
    """Record id already present (in an index or a manifest)."""

    def __init__(self, record_id, first_line=None, second_line=None):
        self.record_id = record_id
        self.first_line = first_line
        self.second_line = second_line
        where = ""
        if first_line is not None and second_line is not None:
            where = f" (lines {first_line} and {second_line})"
        super().__init__(f"duplicate id {record_id!r}{where}")


class NotFound(GuiscoutError):
    """Requested record/app id is unknown."""


class CorruptFile(GuiscoutError):
    """Index file failed magic/version/checksum validation."""


class IndexMissing(GuiscoutError):
    """Expected index files are absent from the index directory."""


class EmptyInput(GuiscoutError):
    """Embedding batch (or one of its items) is empty."""


class DecodeFailure(GuiscoutError):
    """One or more images could not be decoded; indices identify them."""

    def __init__(self, failures):
        # failures: list of (index, reason)
        self.failures = list(failures)
        self.indices = [i for i, _ in self.failures]
        detail = "; ".join(f"[{i}] {r}" for i, r in self.failures)
        super().__init__(f"image decode failed: {detail}")


class UpstreamFailure(GuiscoutError):
    """An external model endpoint failed or replied malformed data."""

    def __init__(self, message, indices=None, partial=None, round_index=None):
        self.indices = list(indices) if indices else []
        self.partial = partial
        self.round_index = round_index
        super().__init__(message)


class HandshakeFailure(GuiscoutError):
    """External embedder endpoint unreachable or /info reply malformed."""


class EmbedderUnavailable(GuiscoutError):
    """The serving engine cannot reach its embedder."""


class ParseError(GuiscoutError):
    """Manifest line failed to parse; carries the 1-based line number."""

    def __init__(self, line_no, reason):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class MissingImage(GuiscoutError):
    """Manifest record references an image file that does not exist."""

    def __init__(self, record_id, path):
        self.record_id = record_id
        self.path = str(path)
        super().__init__(f"record {record_id!r}: missing image {path}")


class EmptyQuery(GuiscoutError):
    """Search text is empty after whitespace trim."""


class EmptyLabelSet(GuiscoutError):
    """Zero-shot classification needs at least one label."""


class UnknownSession(GuiscoutError):
    """Session id not present in the session store."""


class UnknownRecord(GuiscoutError):
    """Pin target id not present in the metadata store."""


class UnparseableReply(GuiscoutError):
    """Model reply does not match the required reply schema."""

    def __init__(self, message, raw):
        self.raw = raw
        super().__init__(message)


class EmptyReply(GuiscoutError):
    """Model replied with empty content where output was required."""
