"""Uniform chat-completion interface: HTTP, scripted mock, and replay backends."""

from .types import (
    FINISH_BACKEND_ERROR,
    FINISH_COMPLETE,
    FINISH_TRUNCATED,
    BackendConfig,
    ChatMessage,
    CompletionRequest,
    CompletionResult,
    message_hash,
)
from .backends import FunctionBackend, HttpBackend, MockBackend, ReplayBackend, load_script
from .gateway import Gateway

__all__ = [
    "BackendConfig",
    "ChatMessage",
    "CompletionRequest",
    "CompletionResult",
    "FINISH_BACKEND_ERROR",
    "FINISH_COMPLETE",
    "FINISH_TRUNCATED",
    "FunctionBackend",
    "Gateway",
    "HttpBackend",
    "MockBackend",
    "ReplayBackend",
    "load_script",
    "message_hash",
]
