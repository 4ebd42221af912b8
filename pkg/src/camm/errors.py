"""Exception hierarchy shared by all camm modules.

Every domain error carries a stable ``code`` string so the CLI and the
HTTP service can map failures to diagnostics without string-matching
messages.
"""

from __future__ import annotations

from typing import Any, Optional


class CammError(Exception):
    """Base class for all domain errors."""

    code = "CAMM_ERROR"

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = dict(details) if details else {}

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"code": self.code, "message": self.message}
        if self.details:
            doc["details"] = self.details
        return doc


class ModelFormatError(CammError):
    """The model document is not parseable into model objects."""

    code = "MODEL_FORMAT"


class InvalidModelError(CammError):
    """The model parsed but failed semantic validation."""

    code = "INVALID_MODEL"


class UnknownRequirementError(CammError):
    code = "UNKNOWN_REQUIREMENT"


class UnknownSessionError(CammError):
    code = "UNKNOWN_SESSION"


class MissingJustificationError(CammError):
    code = "MISSING_JUSTIFICATION"


class EmptySubjectError(CammError):
    code = "EMPTY_SUBJECT"


class EmptyInputError(CammError):
    code = "EMPTY_INPUT"


class UnknownAlgorithmError(CammError):
    code = "UNKNOWN_ALGORITHM"


class RevisionConflictError(CammError):
    code = "REVISION_CONFLICT"


class SessionFormatError(CammError):
    """A session document is malformed or references the wrong model."""

    code = "SESSION_FORMAT"


class InvalidTargetError(CammError):
    code = "INVALID_TARGET"


class InvalidStatusError(CammError):
    code = "INVALID_STATUS"


class InvalidEvidenceError(CammError):
    code = "INVALID_EVIDENCE"


class ScanError(CammError):
    code = "SCAN_ERROR"


class DataFormatError(CammError):
    """A data file (ruleset, knowledge base, policy, inventory, findings)
    is malformed."""

    code = "DATA_FORMAT"


class InvalidAnnotationError(CammError):
    code = "INVALID_ANNOTATION"


class UnsupportedFormatError(CammError):
    code = "UNSUPPORTED_FORMAT"
