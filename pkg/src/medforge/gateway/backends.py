"""Backend implementations: live HTTP service, scripted mock, computed mock, replay.

A backend only knows how to execute one attempt; retries, rate limiting, and
logging live in the Gateway wrapper. Backends advertise ``deterministic`` so
the gateway can stamp reproducible timestamps into the replay log.
"""

from __future__ import annotations

import os
import threading
import time
from collections import deque
from pathlib import Path
from typing import Callable

import httpx

from .. import jsonio
from ..errors import AuthError, ScriptMiss, TransientBackendError
from .types import (
    FINISH_BACKEND_ERROR,
    FINISH_COMPLETE,
    FINISH_TRUNCATED,
    BackendConfig,
    CompletionRequest,
    CompletionResult,
    message_hash,
)


class MockBackend:
    """Deterministic scripted backend for tests and the offline demo.

    The script maps a key (request_tag, or message-content hash as fallback)
    to a response sequence consumed in order. Entries:

        "some text"                               -> complete response
        {"text": "...", "finish_reason": "truncated"}
        {"error": "reason"}                       -> raises TransientBackendError

    Exhausted or missing keys raise ScriptMiss. Per-key sequencing is locked,
    so the handle is safe to share across worker threads.
    """

    backend_id = "mock"
    deterministic = True

    def __init__(self, script: dict[str, list], delay_s: float = 0.0):
        self._lock = threading.Lock()
        self._queues: dict[str, deque] = {}
        for key, entries in script.items():
            if key in self._queues:
                raise ValueError(f"duplicate script key {key!r}")
            self._queues[key] = deque(self._normalize(e) for e in entries)
        self.delay_s = delay_s
        self.calls = 0
        self.max_concurrent = 0
        self._inflight = 0

    @staticmethod
    def _normalize(entry) -> dict:
        if isinstance(entry, str):
            return {"text": entry, "finish_reason": FINISH_COMPLETE}
        if isinstance(entry, dict) and "error" in entry:
            return {"error": str(entry["error"])}
        if isinstance(entry, dict) and "text" in entry:
            return {"text": entry["text"], "finish_reason": entry.get("finish_reason", FINISH_COMPLETE)}
        raise ValueError(f"bad script entry: {entry!r}")

    @classmethod
    def from_file(cls, path: str | Path) -> "MockBackend":
        return cls(jsonio.read_json(path))

    def invoke(self, req: CompletionRequest) -> CompletionResult:
        with self._lock:
            self.calls += 1
            self._inflight += 1
            self.max_concurrent = max(self.max_concurrent, self._inflight)
            key = req.request_tag if req.request_tag in self._queues else message_hash(req.messages)
            queue = self._queues.get(key)
            entry = queue.popleft() if queue else None
        try:
            if self.delay_s:
                time.sleep(self.delay_s)
            if entry is None:
                raise ScriptMiss(f"no scripted response for tag={req.request_tag!r} (key {key!r})")
            if "error" in entry:
                raise TransientBackendError(entry["error"])
            return CompletionResult(
                text=entry["text"],
                finish_reason=entry["finish_reason"],
                backend_id=self.backend_id,
                latency_ms=0,
            )
        finally:
            with self._lock:
                self._inflight -= 1


class FunctionBackend:
    """Backend computed by a plain function; used for oracle mocks in eval tests."""

    deterministic = True

    def __init__(self, fn: Callable[[CompletionRequest], str], backend_id: str = "function"):
        self._fn = fn
        self.backend_id = backend_id
        self.calls = 0
        self._lock = threading.Lock()

    def invoke(self, req: CompletionRequest) -> CompletionResult:
        with self._lock:
            self.calls += 1
        return CompletionResult(
            text=self._fn(req),
            finish_reason=FINISH_COMPLETE,
            backend_id=self.backend_id,
            latency_ms=0,
        )


class ReplayBackend:
    """Serves recorded gateway attempts back, keyed by request_tag.

    Failed attempts replay as failures so the retry loop re-executes
    identically; the whole pipeline can therefore be re-run with no
    network access and reproduce its artifacts byte-for-byte.
    """

    backend_id = "replay"
    deterministic = True

    def __init__(self, log_path: str | Path):
        self._lock = threading.Lock()
        self._queues: dict[str, deque] = {}
        for _, rec in jsonio.read_jsonl(log_path):
            self._queues.setdefault(rec["request_tag"], deque()).append(rec)

    def invoke(self, req: CompletionRequest) -> CompletionResult:
        with self._lock:
            queue = self._queues.get(req.request_tag)
            rec = queue.popleft() if queue else None
        if rec is None:
            raise ScriptMiss(f"replay log has no attempt left for tag={req.request_tag!r}")
        if rec["finish_reason"] == FINISH_BACKEND_ERROR:
            raise TransientBackendError(f"replayed failure for tag={req.request_tag!r}")
        return CompletionResult(
            text=rec["response_text"],
            finish_reason=rec["finish_reason"],
            backend_id=rec.get("backend_id", self.backend_id),
            latency_ms=rec.get("latency_ms", 0),
        )


class HttpBackend:
    """OpenAI-style chat-completion endpoint over HTTP with bearer auth."""

    deterministic = False

    def __init__(self, cfg: BackendConfig, client: httpx.Client | None = None):
        self.cfg = cfg
        self.backend_id = cfg.endpoint
        self._client = client or httpx.Client(timeout=60.0)

    def _token(self) -> str:
        token = os.environ.get(self.cfg.auth_token_env_var, "")
        if not token:
            raise AuthError(f"environment variable {self.cfg.auth_token_env_var} is not set")
        return token

    def invoke(self, req: CompletionRequest) -> CompletionResult:
        payload = {
            "model": self.cfg.model,
            "messages": [
                {"role": m.role, "content": m.text} for m in req.messages
            ],
            "max_tokens": req.max_output_tokens,
            "temperature": req.temperature,
        }
        started = time.monotonic()
        try:
            resp = self._client.post(
                self.cfg.endpoint,
                json=payload,
                headers={"Authorization": f"Bearer {self._token()}"},
            )
        except httpx.HTTPError as exc:
            raise TransientBackendError(f"transport error: {exc}") from exc
        latency_ms = int((time.monotonic() - started) * 1000)
        if resp.status_code in (401, 403):
            raise AuthError(f"backend rejected credentials (HTTP {resp.status_code})")
        if resp.status_code >= 400:
            raise TransientBackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        body = resp.json()
        try:
            choice = body["choices"][0]
            text = choice["message"]["content"] or ""
            native_reason = choice.get("finish_reason", "stop")
        except (KeyError, IndexError, TypeError) as exc:
            raise TransientBackendError(f"malformed completion payload: {body!r:.200}") from exc
        finish = FINISH_TRUNCATED if native_reason == "length" else FINISH_COMPLETE
        if finish == FINISH_COMPLETE and not text:
            finish = FINISH_TRUNCATED
        return CompletionResult(
            text=text, finish_reason=finish, backend_id=self.backend_id, latency_ms=latency_ms
        )


def load_script(path: str | Path) -> dict[str, list]:
    """Load a mock script file: {"tag": ["response", {"error": "..."}, ...]}."""
    script = jsonio.read_json(path)
    if not isinstance(script, dict):
        raise ValueError("mock script must be a JSON object keyed by request tag")
    return script
