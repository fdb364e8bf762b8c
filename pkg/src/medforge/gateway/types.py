"""Request/response shapes shared by every chat-completion backend."""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import jsonio

ROLES = ("system", "user", "assistant")

FINISH_COMPLETE = "complete"
FINISH_TRUNCATED = "truncated"
FINISH_BACKEND_ERROR = "backend_error"
FINISH_REASONS = (FINISH_COMPLETE, FINISH_TRUNCATED, FINISH_BACKEND_ERROR)


@dataclass(frozen=True)
class ChatMessage:
    role: str
    text: str

    def to_dict(self) -> dict:
        return {"role": self.role, "text": self.text}


@dataclass
class CompletionRequest:
    """One chat-completion call.

    request_tag is an opaque caller-chosen id; it keys the replay log and
    the scripted mock, so pipeline stages assign stable, content-independent
    tags (e.g. "score:unit-7:r2").
    """

    messages: list[ChatMessage]
    max_output_tokens: int = 1024
    temperature: float = 0.0
    request_tag: str = ""

    def validate(self) -> None:
        if not self.messages:
            raise ValueError("messages must be non-empty")
        if self.messages[0].role not in ("system", "user"):
            raise ValueError(f"first message role must be system or user, got {self.messages[0].role!r}")
        for msg in self.messages:
            if msg.role not in ROLES:
                raise ValueError(f"unknown role {msg.role!r}")
            if not isinstance(msg.text, str):
                raise ValueError("message text must be a unicode string")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    def messages_as_dicts(self) -> list[dict]:
        return [m.to_dict() for m in self.messages]


@dataclass
class CompletionResult:
    text: str
    finish_reason: str
    backend_id: str
    latency_ms: int = 0

    def __post_init__(self) -> None:
        if self.finish_reason not in FINISH_REASONS:
            raise ValueError(f"unknown finish_reason {self.finish_reason!r}")
        if self.finish_reason == FINISH_COMPLETE and not self.text:
            raise ValueError("complete results must carry non-empty text")
        if self.latency_ms < 0:
            raise ValueError("latency_ms must be non-negative")


@dataclass
class BackendConfig:
    endpoint: str = "mock:"
    auth_token_env_var: str = "MEDFORGE_API_TOKEN"
    max_retries: int = 2
    min_retry_backoff_ms: int = 50
    max_inflight: int = 4
    model: str = "default"
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.max_inflight < 1:
            raise ValueError("max_inflight must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be non-negative")
        if self.min_retry_backoff_ms <= 0:
            raise ValueError("min_retry_backoff_ms must be positive")


def message_hash(messages: list[ChatMessage]) -> str:
    """Stable content key for mock scripts when no request_tag is set."""
    payload = [[m.role, m.text] for m in messages]
    return jsonio.sha256_obj(payload)[:16]
