"""Benchmark file loading with optional strict size checking.

Suites live in a directory of per-dataset, per-language JSONL files named
``<dataset>.<lang>.jsonl`` (e.g. medqa.en.jsonl, mmlu_ana.ar.jsonl). A line
is {"item_id", "question", "options", "gold_index", "context"?}. Strict
mode enforces the reference test-set sizes and the MMLU family total;
Arabic files are expected to be translation outputs that preserve item ids
so the two languages join one-to-one.
"""

from __future__ import annotations

from pathlib import Path

from .. import jsonio
from ..errors import CountMismatch, SchemaError
from .types import (
    DATASET_COLUMNS,
    EXPECTED_COUNTS,
    MMLU_DATASETS,
    MMLU_EXPECTED_TOTAL,
    PUBMEDQA_OPTIONS,
    BenchmarkItem,
    dataset_file_stem,
)


def load_benchmark(
    path: str | Path, dataset: str, language: str, strict: bool = False
) -> list[BenchmarkItem]:
    """Load and validate one dataset file; strict mode also checks its size."""
    items: list[BenchmarkItem] = []
    seen_ids: set[str] = set()
    for line, obj in jsonio.read_jsonl(path):
        if not isinstance(obj, dict):
            raise SchemaError("line is not a JSON object", line=line)
        missing = [k for k in ("item_id", "question", "options", "gold_index") if k not in obj]
        if missing:
            raise SchemaError(f"missing field(s) {missing}", line=line)
        item = BenchmarkItem(
            dataset=dataset,
            language=language,
            item_id=str(obj["item_id"]),
            question=str(obj["question"]),
            options=[str(o) for o in obj["options"]],
            gold_index=int(obj["gold_index"]),
            context=obj.get("context"),
        )
        try:
            item.validate()
            if dataset == "PubMedQA" and [o.lower() for o in item.options] != list(PUBMEDQA_OPTIONS):
                raise ValueError(f"PubMedQA options must be {PUBMEDQA_OPTIONS}, got {item.options}")
        except ValueError as exc:
            raise SchemaError(str(exc), line=line) from exc
        if item.item_id in seen_ids:
            raise SchemaError(f"duplicate item_id {item.item_id!r}", line=line)
        seen_ids.add(item.item_id)
        items.append(item)
    if strict and dataset in EXPECTED_COUNTS and len(items) != EXPECTED_COUNTS[dataset]:
        raise CountMismatch(dataset, EXPECTED_COUNTS[dataset], len(items))
    return items


def load_suite(
    suite_dir: str | Path, languages: tuple[str, ...] = ("en", "ar"), strict: bool = False
) -> list[BenchmarkItem]:
    """Load every present dataset/language file under suite_dir.

    Strict mode applies the per-dataset reference counts per language and
    requires each present MMLU family (per language) to total 1,089.
    """
    suite_dir = Path(suite_dir)
    items: list[BenchmarkItem] = []
    for language in languages:
        mmlu_seen = 0
        mmlu_present = False
        for dataset in DATASET_COLUMNS:
            path = suite_dir / f"{dataset_file_stem(dataset)}.{language}.jsonl"
            if not path.exists():
                continue
            loaded = load_benchmark(path, dataset, language, strict=strict)
            if dataset in MMLU_DATASETS:
                mmlu_present = True
                mmlu_seen += len(loaded)
            items.extend(loaded)
        if strict and mmlu_present and mmlu_seen != MMLU_EXPECTED_TOTAL:
            raise CountMismatch(f"MMLU[{language}]", MMLU_EXPECTED_TOTAL, mmlu_seen)
    return items


def write_benchmark(path: str | Path, items: list[BenchmarkItem]) -> int:
    """Serialize items to the suite file format (used by fixtures and demo)."""
    return jsonio.write_jsonl(path, [item.to_dict() for item in items])
