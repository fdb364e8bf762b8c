"""Normalized source records, rendered instruction samples, and manifests."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..chat.types import ChatTranscript, McqaItem

KIND_MCQA = "MCQA"
KIND_QA = "QA"
KIND_CHAT = "Chat"
KINDS = (KIND_MCQA, KIND_QA, KIND_CHAT)

LANG_EN = "en"
LANG_AR = "ar"
LANGS = (LANG_EN, LANG_AR)

ORIGINS = (
    "PubMedQA",
    "MedMCQA",
    "MedQA",
    "HealthCareMagic",
    "iCliniq",
    "MedicalMeadow",
    "UMLS",
    "LiveQA",
    "MedicationQA",
    "synthesized",
)

ROLE_HUMAN = "human"
ROLE_AI = "AI"


@dataclass
class SourceRecord:
    """One normalized instruction item from a known origin.

    payload shape depends on kind: MCQA -> McqaItem, QA -> {"question",
    "answer"}, Chat -> ChatTranscript.
    """

    record_id: str
    kind: str
    language: str
    payload: object
    origin: str
    source_id: str = ""

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.language not in LANGS:
            raise ValueError(f"unknown language {self.language!r}")
        if self.origin not in ORIGINS:
            raise ValueError(f"unknown origin {self.origin!r}")
        if self.kind == KIND_MCQA:
            if not isinstance(self.payload, McqaItem):
                raise ValueError("MCQA payload must be an McqaItem")
            self.payload.validate()
        elif self.kind == KIND_QA:
            if not (isinstance(self.payload, dict) and {"question", "answer"} <= set(self.payload)):
                raise ValueError("QA payload must carry question and answer")
        elif self.kind == KIND_CHAT:
            if not isinstance(self.payload, ChatTranscript):
                raise ValueError("Chat payload must be a ChatTranscript")
            self.payload.validate()

    def payload_to_json(self):
        if self.kind == KIND_MCQA:
            return self.payload.to_dict()
        if self.kind == KIND_CHAT:
            return self.payload.to_dict()
        return {"question": self.payload["question"], "answer": self.payload["answer"]}

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "kind": self.kind,
            "language": self.language,
            "payload": self.payload_to_json(),
            "origin": self.origin,
            "source_id": self.source_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SourceRecord":
        kind = d["kind"]
        raw = d["payload"]
        if kind == KIND_MCQA:
            payload: object = McqaItem.from_dict(raw)
        elif kind == KIND_CHAT:
            payload = ChatTranscript.from_dict(raw)
        else:
            payload = {"question": raw["question"], "answer": raw["answer"]}
        record = cls(
            record_id=d["record_id"],
            kind=kind,
            language=d["language"],
            payload=payload,
            origin=d["origin"],
            source_id=d.get("source_id", ""),
        )
        record.validate()
        return record


@dataclass
class InstructionSample:
    """Language-tagged conversation in the training render format.

    conversations alternate human/AI starting with human; loss_mask[i] is
    True exactly on AI turns (only those contribute to training loss).
    """

    record_id: str
    language: str
    kind: str
    conversations: list[dict]
    loss_mask: list[bool]

    def validate(self) -> None:
        if len(self.conversations) != len(self.loss_mask):
            raise ValueError("loss_mask length must match conversations")
        if not self.conversations:
            raise ValueError("conversations must be non-empty")
        for i, turn in enumerate(self.conversations):
            expected_role = ROLE_HUMAN if i % 2 == 0 else ROLE_AI
            if turn["from"] != expected_role:
                raise ValueError(f"turn {i} should be {expected_role}, got {turn['from']!r}")
            if self.loss_mask[i] != (turn["from"] == ROLE_AI):
                raise ValueError(f"loss_mask[{i}] must equal (from == AI)")


@dataclass
class DatasetManifest:
    """Per-(kind x language) sample/turn/token statistics plus totals."""

    slices: dict
    totals: dict
    ar_to_en_ratio: float | None
    rng_seed: int
    tokenizer_id: str
    config_hash: str = ""
    sampling: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "slices": self.slices,
            "totals": self.totals,
            "ar_to_en_ratio": self.ar_to_en_ratio,
            "rng_seed": self.rng_seed,
            "tokenizer_id": self.tokenizer_id,
            "config_hash": self.config_hash,
            "sampling": self.sampling,
        }
