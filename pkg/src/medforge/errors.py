"""Shared exception taxonomy for the medforge pipeline."""

from __future__ import annotations


class MedforgeError(Exception):
    """Base class for all medforge errors."""

    code = "error"

    def to_json_obj(self) -> dict:
        return {"error": self.code, "message": str(self)}


# --- gateway ---------------------------------------------------------------


class BackendError(MedforgeError):
    code = "backend_error"


class TransientBackendError(BackendError):
    """Retryable backend failure (timeouts, 5xx, scripted flakes)."""

    code = "transient_backend_error"


class AuthError(BackendError):
    """Missing or rejected credentials. Never retried."""

    code = "auth_error"


class ExhaustedRetries(BackendError):
    """All retry attempts failed."""

    code = "exhausted_retries"


class ScriptMiss(BackendError):
    """Mock or replay backend has no scripted response for a request."""

    code = "script_miss"


# --- translate loop --------------------------------------------------------


class AlignmentError(MedforgeError):
    """Field lists do not line up (count or name sequence mismatch)."""

    code = "alignment_error"


class ScoreParseError(MedforgeError):
    """Scorer response contains no integer in [0, 100]."""

    code = "score_parse_error"


# --- chat forge ------------------------------------------------------------


class TemplateError(MedforgeError):
    code = "template_error"


class NoMarkersError(MedforgeError):
    """Raw transcript contains no speaker markers at all."""

    code = "no_markers"


class RoleOrderError(MedforgeError):
    """Speakers do not alternate, or the wrong speaker opens the dialogue."""

    code = "role_order"


class EmptyTurnError(MedforgeError):
    code = "empty_turn"


class SynthesisExhausted(MedforgeError):
    """Every generation attempt produced an invalid transcript."""

    code = "synthesis_exhausted"


# --- corpus compiler -------------------------------------------------------


class SchemaError(MedforgeError):
    """Input line does not match the declared schema."""

    code = "schema_error"

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class RatioUnreachable(MedforgeError):
    code = "ratio_unreachable"


class UnknownTokenizer(MedforgeError):
    code = "unknown_tokenizer"


class MissingField(MedforgeError):
    code = "missing_field"


# --- eval harness ----------------------------------------------------------


class CountMismatch(MedforgeError):
    """Strict-mode benchmark loader found an unexpected suite size."""

    code = "count_mismatch"

    def __init__(self, dataset: str, expected: int, got: int):
        super().__init__(f"{dataset}: expected {expected} items, got {got}")
        self.dataset = dataset
        self.expected = expected
        self.got = got


# --- review service --------------------------------------------------------


class UnknownUnit(MedforgeError):
    code = "unknown_unit"


class UnknownTask(MedforgeError):
    code = "unknown_task"


class InvalidState(MedforgeError):
    """Unit is not in a state that permits the requested transition."""

    code = "invalid_state"


class DuplicateTask(MedforgeError):
    code = "duplicate_task"


class AlreadyDecided(MedforgeError):
    code = "already_decided"


class ClaimHeld(MedforgeError):
    """Task is claimed by another reviewer and the claim has not expired."""

    code = "claim_held"


# --- cli -------------------------------------------------------------------


class ConfigError(MedforgeError):
    code = "config_error"
