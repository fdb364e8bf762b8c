"""Translation unit lifecycle types.

A unit bundles the English fields of one source record (question, options,
answer, chat turns...) with its evolving Arabic rendering and the full round
history, so acceptance decisions stay auditable after the fact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

STATUS_PENDING = "pending"
STATUS_AUTO_ACCEPTED = "auto_accepted"
STATUS_NEEDS_REVIEW = "needs_review"
STATUS_HUMAN_APPROVED = "human_approved"
STATUS_HUMAN_CORRECTED = "human_corrected"
STATUS_REJECTED = "rejected"

ALL_STATUSES = (
    STATUS_PENDING,
    STATUS_AUTO_ACCEPTED,
    STATUS_NEEDS_REVIEW,
    STATUS_HUMAN_APPROVED,
    STATUS_HUMAN_CORRECTED,
    STATUS_REJECTED,
)

# Legal lifecycle edges; review states are reachable only through the queue.
STATUS_TRANSITIONS: dict[str, set[str]] = {
    STATUS_PENDING: {STATUS_AUTO_ACCEPTED, STATUS_NEEDS_REVIEW},
    STATUS_AUTO_ACCEPTED: {STATUS_HUMAN_APPROVED, STATUS_HUMAN_CORRECTED, STATUS_REJECTED},
    STATUS_NEEDS_REVIEW: {STATUS_HUMAN_APPROVED, STATUS_HUMAN_CORRECTED, STATUS_REJECTED},
    STATUS_HUMAN_APPROVED: set(),
    STATUS_HUMAN_CORRECTED: set(),
    STATUS_REJECTED: set(),
}

# Units allowed into a compiled corpus; rejected/pending/in-review never ship.
CORPUS_ELIGIBLE_STATUSES = frozenset(
    {STATUS_AUTO_ACCEPTED, STATUS_HUMAN_APPROVED, STATUS_HUMAN_CORRECTED}
)

Field = tuple[str, str]


def fields_to_json(fields: list[Field] | None) -> list[list[str]] | None:
    if fields is None:
        return None
    return [[name, text] for name, text in fields]


def fields_from_json(raw) -> list[Field] | None:
    if raw is None:
        return None
    return [(str(name), str(text)) for name, text in raw]


@dataclass
class QualityScore:
    value: int
    rationale: str = ""
    scorer_tag: str = ""

    def __post_init__(self) -> None:
        if not 0 <= self.value <= 100:
            raise ValueError(f"score must be in [0, 100], got {self.value}")

    def to_dict(self) -> dict:
        return {"value": self.value, "rationale": self.rationale, "scorer_tag": self.scorer_tag}

    @classmethod
    def from_dict(cls, d: dict) -> "QualityScore":
        return cls(value=int(d["value"]), rationale=d.get("rationale", ""), scorer_tag=d.get("scorer_tag", ""))


@dataclass
class RoundRecord:
    round_index: int
    arabic_snapshot: list[Field]
    score: QualityScore

    def to_dict(self) -> dict:
        return {
            "round_index": self.round_index,
            "arabic_snapshot": fields_to_json(self.arabic_snapshot),
            "score": self.score.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RoundRecord":
        return cls(
            round_index=int(d["round_index"]),
            arabic_snapshot=fields_from_json(d["arabic_snapshot"]) or [],
            score=QualityScore.from_dict(d["score"]),
        )


@dataclass
class LoopConfig:
    """Knobs for the translate/score/refine loop.

    The paper-style gate is "refine while score < threshold"; equality
    accepts. Threshold and seed are stamped into each unit's metadata so
    accepted corpora stay reproducible.
    """

    threshold: int = 80
    max_rounds: int = 3
    audit_rate: float = 0.0
    rng_seed: int = 0

    def validate(self) -> None:
        if not 0 <= self.threshold <= 100:
            raise ValueError("threshold must be in [0, 100]")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if not 0.0 <= self.audit_rate <= 1.0:
            raise ValueError("audit_rate must be in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "max_rounds": self.max_rounds,
            "audit_rate": self.audit_rate,
            "rng_seed": self.rng_seed,
        }


@dataclass
class TranslationUnit:
    unit_id: str
    source_id: str
    english_fields: list[Field]
    arabic_fields: list[Field] | None = None
    rounds: list[RoundRecord] = field(default_factory=list)
    status: str = STATUS_PENDING
    meta: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.status not in ALL_STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if not self.english_fields:
            raise ValueError("english_fields must be non-empty")
        if self.arabic_fields is not None:
            en_names = [name for name, _ in self.english_fields]
            ar_names = [name for name, _ in self.arabic_fields]
            if en_names != ar_names:
                raise ValueError(f"field name sequences differ: {en_names} vs {ar_names}")
        if self.status in (STATUS_AUTO_ACCEPTED, STATUS_NEEDS_REVIEW) and not self.rounds:
            raise ValueError(f"status {self.status} requires at least one recorded round")

    def transition(self, new_status: str) -> None:
        if new_status not in STATUS_TRANSITIONS.get(self.status, set()):
            raise ValueError(f"illegal status transition {self.status} -> {new_status}")
        self.status = new_status

    def latest_score(self) -> QualityScore | None:
        return self.rounds[-1].score if self.rounds else None

    def to_dict(self) -> dict:
        return {
            "unit_id": self.unit_id,
            "source_id": self.source_id,
            "english_fields": fields_to_json(self.english_fields),
            "arabic_fields": fields_to_json(self.arabic_fields),
            "rounds": [r.to_dict() for r in self.rounds],
            "status": self.status,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TranslationUnit":
        unit = cls(
            unit_id=d["unit_id"],
            source_id=d.get("source_id", ""),
            english_fields=fields_from_json(d["english_fields"]) or [],
            arabic_fields=fields_from_json(d.get("arabic_fields")),
            rounds=[RoundRecord.from_dict(r) for r in d.get("rounds", [])],
            status=d.get("status", STATUS_PENDING),
            meta=d.get("meta", {}),
        )
        unit.validate()
        return unit
