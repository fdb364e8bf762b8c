"""File-backed review queue with an append-only event log.

State of record is (initial units.jsonl) + (events.jsonl); the in-memory
view is always a pure fold of the two, so replaying the log over the
initial unit store reproduces the final state exactly. No database needed;
a directory travels with the dataset it audits.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .. import jsonio
from ..errors import (
    AlignmentError,
    AlreadyDecided,
    ClaimHeld,
    DuplicateTask,
    InvalidState,
    UnknownTask,
    UnknownUnit,
)
from ..translate.types import (
    STATUS_AUTO_ACCEPTED,
    STATUS_HUMAN_APPROVED,
    STATUS_HUMAN_CORRECTED,
    STATUS_NEEDS_REVIEW,
    STATUS_REJECTED,
    TranslationUnit,
    fields_from_json,
    fields_to_json,
)

REASON_BELOW_THRESHOLD = "below_threshold"
REASON_AUDIT = "random_audit"
REASONS = (REASON_BELOW_THRESHOLD, REASON_AUDIT)

VERDICTS = ("approve", "edit", "reject")
_VERDICT_STATUS = {
    "approve": STATUS_HUMAN_APPROVED,
    "edit": STATUS_HUMAN_CORRECTED,
    "reject": STATUS_REJECTED,
}

UNITS_FILE = "units.jsonl"
EVENTS_FILE = "events.jsonl"
SNAPSHOT_FILE = "snapshot.json"
AUDIT_FILE = "audit.json"


@dataclass
class ReviewTask:
    task_id: str
    unit_id: str
    reason: str
    created_at: float
    state: str = "open"
    claimed_by: str | None = None
    claim_expires_at: float | None = None
    decision: dict | None = None
    version: int = 0

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "unit_id": self.unit_id,
            "reason": self.reason,
            "created_at": self.created_at,
            "state": self.state,
            "claimed_by": self.claimed_by,
            "claim_expires_at": self.claim_expires_at,
            "decision": self.decision,
            "version": self.version,
        }


class ReviewStore:
    """Queue of review tasks over a translation-unit store.

    Mutations are serialized under one lock and appended to events.jsonl
    before taking effect in memory, which makes every decision exactly-once:
    concurrent submissions produce one winner and AlreadyDecided for the rest.
    """

    def __init__(self, store_dir: str | Path, clock=time.time, claim_timeout_s: float = 900.0):
        self.store_dir = Path(store_dir)
        self.clock = clock
        self.claim_timeout_s = claim_timeout_s
        self._lock = threading.RLock()
        self.units: dict[str, TranslationUnit] = {}
        self.tasks: dict[str, ReviewTask] = {}
        units_path = self.store_dir / UNITS_FILE
        if units_path.exists():
            for _, obj in jsonio.read_jsonl(units_path):
                unit = TranslationUnit.from_dict(obj)
                self.units[unit.unit_id] = unit
        events_path = self.store_dir / EVENTS_FILE
        if events_path.exists():
            for _, event in jsonio.read_jsonl(events_path):
                self._apply(event)

    # -- construction -------------------------------------------------------

    @classmethod
    def initialize(
        cls,
        store_dir: str | Path,
        units: list[TranslationUnit],
        audit_unit_ids: list[str] | None = None,
        clock=time.time,
    ) -> "ReviewStore":
        """Create a store dir from translate-stage outputs and fill the queue."""
        store_dir = Path(store_dir)
        store_dir.mkdir(parents=True, exist_ok=True)
        jsonio.write_jsonl(store_dir / UNITS_FILE, [u.to_dict() for u in units])
        if audit_unit_ids is not None:
            jsonio.write_json(store_dir / AUDIT_FILE, {"unit_ids": sorted(audit_unit_ids)})
        store = cls(store_dir, clock=clock)
        store.fill_queue()
        return store

    def fill_queue(self) -> int:
        """Enqueue all review-needing units plus audit selections; idempotent."""
        before = len(self.tasks)
        for unit in sorted(self.units.values(), key=lambda u: u.unit_id):
            if unit.status == STATUS_NEEDS_REVIEW:
                self._ensure_task(unit.unit_id, REASON_BELOW_THRESHOLD)
        audit_path = self.store_dir / AUDIT_FILE
        if audit_path.exists():
            for unit_id in jsonio.read_json(audit_path).get("unit_ids", []):
                unit = self.units.get(unit_id)
                if unit is not None and unit.status == STATUS_AUTO_ACCEPTED:
                    self._ensure_task(unit_id, REASON_AUDIT)
        return len(self.tasks) - before

    def _ensure_task(self, unit_id: str, reason: str) -> None:
        try:
            self.enqueue(unit_id, reason)
        except DuplicateTask:
            pass

    # -- event machinery ----------------------------------------------------

    def _append(self, event: dict) -> None:
        jsonio.append_jsonl(self.store_dir / EVENTS_FILE, event)
        self._apply(event)

    def _apply(self, event: dict) -> None:
        kind = event["event"]
        if kind == "enqueue":
            task = ReviewTask(
                task_id=event["task_id"],
                unit_id=event["unit_id"],
                reason=event["reason"],
                created_at=event["at"],
            )
            self.tasks[task.task_id] = task
        elif kind == "claim":
            task = self.tasks[event["task_id"]]
            task.state = "claimed"
            task.claimed_by = event["reviewer_tag"]
            task.claim_expires_at = event["expires_at"]
            task.version += 1
        elif kind == "decision":
            task = self.tasks[event["task_id"]]
            task.state = "decided"
            task.decision = {
                "verdict": event["verdict"],
                "edited_arabic_fields": event.get("edited_arabic_fields"),
                "reviewer_tag": event["reviewer_tag"],
                "decided_at": event["at"],
            }
            task.version += 1
            unit = self.units[task.unit_id]
            if event["verdict"] == "edit":
                unit.arabic_fields = fields_from_json(event["edited_arabic_fields"])
            unit.transition(_VERDICT_STATUS[event["verdict"]])
            unit.meta["review"] = {
                "task_id": task.task_id,
                "verdict": event["verdict"],
                "reviewer_tag": event["reviewer_tag"],
            }
        else:
            raise ValueError(f"unknown event kind {kind!r}")

    # -- operations ---------------------------------------------------------

    def enqueue(self, unit_id: str, reason: str) -> ReviewTask:
        if reason not in REASONS:
            raise ValueError(f"unknown reason {reason!r}")
        with self._lock:
            unit = self.units.get(unit_id)
            if unit is None:
                raise UnknownUnit(f"no unit {unit_id!r}")
            task_id = f"{unit_id}:{reason}"
            existing = self.tasks.get(task_id)
            if existing is not None:
                if existing.state == "decided":
                    raise AlreadyDecided(f"task {task_id} was already decided")
                return existing
            for other in self.tasks.values():
                if other.unit_id == unit_id and other.state != "decided":
                    raise DuplicateTask(f"unit {unit_id} already has open task {other.task_id}")
            expected = STATUS_NEEDS_REVIEW if reason == REASON_BELOW_THRESHOLD else STATUS_AUTO_ACCEPTED
            if unit.status != expected:
                raise InvalidState(
                    f"unit {unit_id} is {unit.status}; {reason} tasks require {expected}"
                )
            self._append(
                {
                    "event": "enqueue",
                    "task_id": task_id,
                    "unit_id": unit_id,
                    "reason": reason,
                    "at": self.clock(),
                }
            )
            return self.tasks[task_id]

    def list_tasks(
        self,
        state: str | None = None,
        reason: str | None = None,
        page: int = 1,
        page_size: int = 50,
    ) -> tuple[list[ReviewTask], int]:
        page_size = max(1, min(page_size, 200))
        with self._lock:
            selected = [
                t
                for t in self.tasks.values()
                if (state is None or t.state == state) and (reason is None or t.reason == reason)
            ]
        selected.sort(key=lambda t: (t.created_at, t.task_id))
        start = (max(1, page) - 1) * page_size
        return selected[start : start + page_size], len(selected)

    def get_task(self, task_id: str) -> dict:
        """Task joined with its unit's texts and score history."""
        with self._lock:
            task = self.tasks.get(task_id)
            if task is None:
                raise UnknownTask(f"no task {task_id!r}")
            unit = self.units[task.unit_id]
            return {
                "task": task.to_dict(),
                "unit": {
                    "unit_id": unit.unit_id,
                    "status": unit.status,
                    "english_fields": fields_to_json(unit.english_fields),
                    "arabic_fields": fields_to_json(unit.arabic_fields),
                    "score_history": [
                        {"round_index": r.round_index, "value": r.score.value, "rationale": r.score.rationale}
                        for r in unit.rounds
                    ],
                    "meta": unit.meta,
                },
            }

    def _check_claimable(self, task: ReviewTask, reviewer_tag: str) -> None:
        if task.state == "decided":
            raise AlreadyDecided(f"task {task.task_id} already decided")
        if (
            task.state == "claimed"
            and task.claimed_by not in (None, reviewer_tag)
            and task.claim_expires_at is not None
            and task.claim_expires_at > self.clock()
        ):
            raise ClaimHeld(f"task {task.task_id} is claimed by {task.claimed_by}")

    def claim(self, task_id: str, reviewer_tag: str) -> ReviewTask:
        """Soft-lock a task for one reviewer; expired claims are reclaimable."""
        with self._lock:
            task = self.tasks.get(task_id)
            if task is None:
                raise UnknownTask(f"no task {task_id!r}")
            self._check_claimable(task, reviewer_tag)
            self._append(
                {
                    "event": "claim",
                    "task_id": task_id,
                    "reviewer_tag": reviewer_tag,
                    "expires_at": self.clock() + self.claim_timeout_s,
                    "at": self.clock(),
                }
            )
            return task

    def submit_decision(
        self,
        task_id: str,
        verdict: str,
        reviewer_tag: str,
        edited_arabic_fields: list | None = None,
    ) -> TranslationUnit:
        """Record one reviewer verdict and merge it into the unit store."""
        if verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {verdict!r}")
        with self._lock:
            task = self.tasks.get(task_id)
            if task is None:
                raise UnknownTask(f"no task {task_id!r}")
            self._check_claimable(task, reviewer_tag)
            unit = self.units[task.unit_id]
            event = {
                "event": "decision",
                "task_id": task_id,
                "verdict": verdict,
                "reviewer_tag": reviewer_tag,
                "at": self.clock(),
            }
            if verdict == "edit":
                if edited_arabic_fields is None:
                    raise AlignmentError("edit decisions must carry edited_arabic_fields")
                edited = fields_from_json(edited_arabic_fields)
                en_names = [n for n, _ in unit.english_fields]
                ar_names = [n for n, _ in edited]
                if en_names != ar_names:
                    raise AlignmentError(
                        f"edited fields do not align: expected names {en_names}, got {ar_names}"
                    )
                if any(not text.strip() for _, text in edited):
                    raise AlignmentError("edited fields must be non-empty")
                event["edited_arabic_fields"] = fields_to_json(edited)
            elif edited_arabic_fields is not None:
                raise ValueError(f"{verdict} decisions must not carry edited fields")
            self._append(event)
            return unit

    def stats(self) -> dict:
        with self._lock:
            by_state = {"open": 0, "claimed": 0, "decided": 0}
            by_reason = {r: 0 for r in REASONS}
            by_verdict = {v: 0 for v in VERDICTS}
            for task in self.tasks.values():
                by_state[task.state] += 1
                by_reason[task.reason] += 1
                if task.decision:
                    by_verdict[task.decision["verdict"]] += 1
            return {
                "tasks": by_state,
                "by_reason": by_reason,
                "decisions_by_verdict": by_verdict,
                "queue_depth": by_state["open"] + by_state["claimed"],
                "units": len(self.units),
            }

    def corpus_eligible_units(self) -> list[TranslationUnit]:
        from ..translate.types import CORPUS_ELIGIBLE_STATUSES

        with self._lock:
            return [
                u for u in sorted(self.units.values(), key=lambda u: u.unit_id)
                if u.status in CORPUS_ELIGIBLE_STATUSES
            ]

    def write_snapshot(self) -> Path:
        """Materialized view for fast inspection; the logs stay authoritative."""
        with self._lock:
            path = self.store_dir / SNAPSHOT_FILE
            jsonio.write_json(
                path,
                {
                    "units": [u.to_dict() for u in sorted(self.units.values(), key=lambda u: u.unit_id)],
                    "tasks": [self.tasks[k].to_dict() for k in sorted(self.tasks)],
                },
            )
            return path
