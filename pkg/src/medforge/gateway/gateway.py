"""Gateway: retries, bounded concurrency, and the append-only replay log.

Every attempt (success or failure) is appended to the replay log as one
JSONL record: {request_tag, messages, response_text, finish_reason,
latency_ms, timestamp}. Deterministic backends get sequence-number
timestamps so repeated runs produce byte-identical logs.
"""

from __future__ import annotations

import threading
import time
from pathlib import Path

from .. import jsonio
from ..errors import AuthError, ExhaustedRetries, ScriptMiss, TransientBackendError
from .types import (
    FINISH_BACKEND_ERROR,
    BackendConfig,
    CompletionRequest,
    CompletionResult,
)


class Gateway:
    """Wraps any backend with retry, admission control, and logging.

    One gateway (or several sharing a log file) can serve many worker
    threads; a semaphore keeps at most cfg.max_inflight requests in the
    backend at any moment.
    """

    def __init__(self, backend, cfg: BackendConfig | None = None, log_path: str | Path | None = None):
        self.backend = backend
        self.cfg = cfg or BackendConfig()
        self.cfg.validate()
        self.log_path = Path(log_path) if log_path else None
        self._admission = threading.BoundedSemaphore(self.cfg.max_inflight)
        self._log_lock = threading.Lock()
        self._seq = 0

    def _timestamp(self) -> float:
        if getattr(self.backend, "deterministic", False):
            return float(self._seq)
        return round(time.time(), 3)

    def _log_attempt(self, req: CompletionRequest, text: str, finish_reason: str, latency_ms: int) -> None:
        if self.log_path is None:
            return
        with self._log_lock:
            record = {
                "request_tag": req.request_tag,
                "messages": req.messages_as_dicts(),
                "response_text": text,
                "finish_reason": finish_reason,
                "latency_ms": latency_ms,
                "timestamp": self._timestamp(),
                "backend_id": getattr(self.backend, "backend_id", "unknown"),
            }
            self._seq += 1
            jsonio.append_jsonl(self.log_path, record)

    def complete(self, req: CompletionRequest) -> CompletionResult:
        """Execute with retries. Truncated completions are returned, not retried.

        Raises AuthError / ScriptMiss immediately (retrying cannot help) and
        ExhaustedRetries once the retry budget is spent on transient failures.
        """
        req.validate()
        attempts = self.cfg.max_retries + 1
        last_error: Exception | None = None
        for attempt in range(1, attempts + 1):
            with self._admission:
                try:
                    result = self.backend.invoke(req)
                except TransientBackendError as exc:
                    self._log_attempt(req, "", FINISH_BACKEND_ERROR, 0)
                    last_error = exc
                except (AuthError, ScriptMiss):
                    self._log_attempt(req, "", FINISH_BACKEND_ERROR, 0)
                    raise
                else:
                    self._log_attempt(req, result.text, result.finish_reason, result.latency_ms)
                    return result
            if attempt < attempts:
                backoff_s = self.cfg.min_retry_backoff_ms * (2 ** (attempt - 1)) / 1000.0
                time.sleep(backoff_s)
        raise ExhaustedRetries(
            f"{attempts} attempt(s) failed for tag={req.request_tag!r}: {last_error}"
        )
