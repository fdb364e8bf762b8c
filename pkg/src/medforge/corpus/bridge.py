"""Conversion between source records and translation units.

Going in, a record's structured content is flattened into named fields
(question, option_A..., answer, turn_00...); coming back, an accepted
unit plus the metadata stamped on it is enough to rebuild an Arabic
counterpart record without the original file.
"""

from __future__ import annotations

from ..chat.types import ChatTranscript, McqaItem
from ..errors import SchemaError
from ..translate.types import TranslationUnit
from .records import KIND_CHAT, KIND_MCQA, KIND_QA, LANG_AR, SourceRecord


def unit_from_record(record: SourceRecord) -> TranslationUnit:
    """Flatten one English record into an alignable field list."""
    record.validate()
    fields: list[tuple[str, str]] = []
    meta: dict = {"kind": record.kind, "origin": record.origin, "source_record_id": record.record_id}
    if record.kind == KIND_MCQA:
        item = record.payload
        fields.append(("question", item.question))
        for label, text in item.options:
            fields.append((f"option_{label}", text))
        fields.append(("answer", item.gold_text()))
        meta["gold_label"] = item.gold_label
        meta["labels"] = [label for label, _ in item.options]
        if item.context:
            fields.insert(0, ("context", item.context))
        meta["source_dataset"] = item.source_dataset
    elif record.kind == KIND_QA:
        fields.append(("question", record.payload["question"]))
        fields.append(("answer", record.payload["answer"]))
    else:
        for i, (speaker, text) in enumerate(record.payload.turns):
            fields.append((f"turn_{i:02d}_{speaker}", text))
    return TranslationUnit(
        unit_id=f"tu-{record.record_id}",
        source_id=record.record_id,
        english_fields=fields,
        meta=meta,
    )


def arabic_record_from_unit(unit: TranslationUnit) -> SourceRecord:
    """Rebuild an Arabic record from an accepted/corrected unit."""
    if unit.arabic_fields is None:
        raise SchemaError(f"unit {unit.unit_id} carries no Arabic fields")
    kind = unit.meta.get("kind")
    if kind not in (KIND_MCQA, KIND_QA, KIND_CHAT):
        raise SchemaError(f"unit {unit.unit_id} has no usable kind metadata ({kind!r})")
    arabic = dict(unit.arabic_fields)
    record_id = f"{unit.source_id}-ar"
    if kind == KIND_MCQA:
        labels = unit.meta["labels"]
        item = McqaItem(
            item_id=record_id,
            question=arabic["question"],
            options=[(label, arabic[f"option_{label}"]) for label in labels],
            gold_label=unit.meta["gold_label"],
            context=arabic.get("context"),
            source_dataset=unit.meta.get("source_dataset", "other"),
        )
        payload: object = item
    elif kind == KIND_QA:
        payload = {"question": arabic["question"], "answer": arabic["answer"]}
    else:
        turns = []
        for name, text in unit.arabic_fields:
            speaker = name.rsplit("_", 1)[-1]
            turns.append((speaker, text))
        payload = ChatTranscript(grounding_id=record_id, turns=turns, token_count=0)
    record = SourceRecord(
        record_id=record_id,
        kind=kind,
        language=LANG_AR,
        payload=payload,
        origin=unit.meta.get("origin", "synthesized"),
        source_id=unit.source_id,
    )
    record.validate()
    return record
