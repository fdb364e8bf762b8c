"""MCQA items and the chat transcripts grounded in them."""

from __future__ import annotations

from dataclasses import dataclass, field

SOURCE_DATASETS = ("PubMedQA", "MedQA", "MedMCQA", "other")


@dataclass
class McqaItem:
    item_id: str
    question: str
    options: list[tuple[str, str]]
    gold_label: str
    context: str | None = None
    source_dataset: str = "other"

    def validate(self) -> None:
        if not 2 <= len(self.options) <= 5:
            raise ValueError(f"expected 2-5 options, got {len(self.options)}")
        labels = [label for label, _ in self.options]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate option labels: {labels}")
        if self.gold_label not in labels:
            raise ValueError(f"gold label {self.gold_label!r} not among {labels}")
        if not self.question.strip():
            raise ValueError("question must be non-empty")

    def gold_text(self) -> str:
        return dict(self.options)[self.gold_label]

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "question": self.question,
            "options": [[label, text] for label, text in self.options],
            "gold_label": self.gold_label,
            "context": self.context,
            "source_dataset": self.source_dataset,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "McqaItem":
        item = cls(
            item_id=d["item_id"],
            question=d["question"],
            options=[(str(a), str(b)) for a, b in d["options"]],
            gold_label=d["gold_label"],
            context=d.get("context"),
            source_dataset=d.get("source_dataset", "other"),
        )
        item.validate()
        return item


@dataclass
class ChatTranscript:
    """Alternating patient/doctor dialogue; patient opens, doctor closes."""

    grounding_id: str
    turns: list[tuple[str, str]]
    token_count: int = 0
    attempts: int = 1

    def validate(self) -> None:
        from .forge import validate_turns  # avoids a module cycle

        validate_turns(self.turns)
        if self.token_count < 0:
            raise ValueError("token_count must be non-negative")

    def to_dict(self) -> dict:
        return {
            "grounding_id": self.grounding_id,
            "turns": [{"speaker": speaker, "text": text} for speaker, text in self.turns],
            "token_count": self.token_count,
            "attempts": self.attempts,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChatTranscript":
        transcript = cls(
            grounding_id=d["grounding_id"],
            turns=[(t["speaker"], t["text"]) for t in d["turns"]],
            token_count=d.get("token_count", 0),
            attempts=d.get("attempts", 1),
        )
        transcript.validate()
        return transcript
