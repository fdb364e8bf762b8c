"""Origin-specific JSONL adapters that normalize raw files into SourceRecords.

Each supported origin declares the line schema it expects; anything that
does not parse raises SchemaError with the offending line number. Records
get stable ids (origin + content hash) and exact-duplicate lines are
dropped with a count.
"""

from __future__ import annotations

from pathlib import Path
from typing import Callable

from .. import jsonio
from ..chat.types import ChatTranscript, McqaItem
from ..errors import SchemaError
from .records import KIND_CHAT, KIND_MCQA, KIND_QA, LANG_EN, SourceRecord

_OPTION_LABELS = ("A", "B", "C", "D", "E")


def _require(obj: dict, keys: tuple[str, ...], line: int) -> None:
    missing = [k for k in keys if k not in obj]
    if missing:
        raise SchemaError(f"missing field(s) {missing}", line=line)


def _parse_medmcqa(obj: dict, line: int) -> tuple[str, object]:
    _require(obj, ("question", "opa", "opb", "opc", "opd", "cop"), line)
    options = [(label, str(obj[key])) for label, key in zip(_OPTION_LABELS, ("opa", "opb", "opc", "opd"))]
    cop = obj["cop"]
    if not isinstance(cop, int) or not 0 <= cop <= 3:
        raise SchemaError(f"cop must be an integer in [0, 3], got {cop!r}", line=line)
    item = McqaItem(
        item_id="",
        question=str(obj["question"]),
        options=options,
        gold_label=_OPTION_LABELS[cop],
        source_dataset="MedMCQA",
    )
    return KIND_MCQA, item


def _parse_medqa(obj: dict, line: int) -> tuple[str, object]:
    _require(obj, ("question", "options", "answer_idx"), line)
    raw_options = obj["options"]
    if not isinstance(raw_options, dict) or not raw_options:
        raise SchemaError("options must be a non-empty object", line=line)
    options = [(label, str(raw_options[label])) for label in sorted(raw_options)]
    gold = str(obj["answer_idx"])
    if gold not in dict(options):
        raise SchemaError(f"answer_idx {gold!r} not among options", line=line)
    item = McqaItem(
        item_id="",
        question=str(obj["question"]),
        options=options,
        gold_label=gold,
        source_dataset="MedQA",
    )
    return KIND_MCQA, item


def _parse_pubmedqa(obj: dict, line: int) -> tuple[str, object]:
    _require(obj, ("question", "final_decision"), line)
    decision = str(obj["final_decision"]).strip().lower()
    if decision not in ("yes", "no", "maybe"):
        raise SchemaError(f"final_decision must be yes/no/maybe, got {decision!r}", line=line)
    options = [("A", "yes"), ("B", "no"), ("C", "maybe")]
    gold = {"yes": "A", "no": "B", "maybe": "C"}[decision]
    context = obj.get("context")
    if isinstance(context, list):
        context = " ".join(str(c) for c in context)
    item = McqaItem(
        item_id="",
        question=str(obj["question"]),
        options=options,
        gold_label=gold,
        context=str(context) if context else None,
        source_dataset="PubMedQA",
    )
    return KIND_MCQA, item


def _parse_qa(obj: dict, line: int) -> tuple[str, object]:
    question = obj.get("question") or obj.get("input") or obj.get("instruction")
    answer = obj.get("answer") or obj.get("output") or obj.get("response")
    if not question or not answer:
        raise SchemaError("QA line needs question/input and answer/output", line=line)
    return KIND_QA, {"question": str(question), "answer": str(answer)}


def _parse_chat(obj: dict, line: int) -> tuple[str, object]:
    _require(obj, ("grounding_id", "turns"), line)
    try:
        transcript = ChatTranscript.from_dict(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad transcript: {exc}", line=line) from exc
    return KIND_CHAT, transcript


_ADAPTERS: dict[str, Callable[[dict, int], tuple[str, object]]] = {
    "MedMCQA": _parse_medmcqa,
    "MedQA": _parse_medqa,
    "PubMedQA": _parse_pubmedqa,
    "HealthCareMagic": _parse_qa,
    "iCliniq": _parse_qa,
    "MedicalMeadow": _parse_qa,
    "UMLS": _parse_qa,
    "LiveQA": _parse_qa,
    "MedicationQA": _parse_qa,
    "synthesized": _parse_chat,
}


def ingest(source_file: str | Path, origin: str, language: str = LANG_EN) -> tuple[list[SourceRecord], int]:
    """Parse one origin file. Returns (records, dropped_duplicate_count)."""
    if origin not in _ADAPTERS:
        raise SchemaError(f"no adapter for origin {origin!r}")
    adapter = _ADAPTERS[origin]
    records: list[SourceRecord] = []
    seen: set[str] = set()
    duplicates = 0
    for line, obj in jsonio.read_jsonl(source_file):
        if not isinstance(obj, dict):
            raise SchemaError("line is not a JSON object", line=line)
        kind, payload = adapter(obj, line)
        content_hash = jsonio.sha256_obj(
            payload.to_dict() if hasattr(payload, "to_dict") else payload
        )[:12]
        if content_hash in seen:
            duplicates += 1
            continue
        seen.add(content_hash)
        record_id = f"{origin.lower()}-{content_hash}"
        if kind == KIND_MCQA:
            payload.item_id = record_id
        elif kind == KIND_CHAT:
            record_id = f"{origin.lower()}-{payload.grounding_id}-{content_hash}"
        record = SourceRecord(
            record_id=record_id,
            kind=kind,
            language=language,
            payload=payload,
            origin=origin,
        )
        record.validate()
        records.append(record)
    return records, duplicates
