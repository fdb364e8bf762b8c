"""Zero-shot prompting, answer extraction, and accuracy aggregation."""

from __future__ import annotations

import re
import string
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .. import jsonio
from ..errors import BackendError
from ..gateway import ChatMessage, CompletionRequest, Gateway
from .types import DATASET_COLUMNS, BenchmarkItem, EvalReport

_LETTERS = string.ascii_uppercase

# Rule 1: a standalone letter opens the reply ("B", "(c)", "B.", "B) ...").
_LEADING_LETTER_RE = re.compile(r"^\s*\(?([A-Za-z])\)?(?:[.):,]|\s|$)")
# Rule 2: an "answer is X" phrase anywhere.
_ANSWER_IS_RE = re.compile(r"answer\s+is\s*:?\s*\(?([A-Za-z])\)?", re.IGNORECASE)


def _load_template(name: str) -> str:
    return resources.files("medforge.templates").joinpath(name).read_text(encoding="utf-8").strip()


@dataclass
class EvalTemplates:
    instruction_en: str
    instruction_ar: str

    @classmethod
    def default(cls) -> "EvalTemplates":
        return cls(
            instruction_en=_load_template("eval_instruction_en.txt"),
            instruction_ar=_load_template("eval_instruction_ar.txt"),
        )

    @classmethod
    def from_dir(cls, template_dir: str | Path) -> "EvalTemplates":
        template_dir = Path(template_dir)
        return cls(
            instruction_en=(template_dir / "eval_instruction_en.txt").read_text(encoding="utf-8").strip(),
            instruction_ar=(template_dir / "eval_instruction_ar.txt").read_text(encoding="utf-8").strip(),
        )


def _item_block(item: BenchmarkItem) -> list[str]:
    parts = []
    if item.context:
        parts.append(item.context)
    parts.append(item.question)
    parts.append("\n".join(f"{_LETTERS[i]}) {text}" for i, text in enumerate(item.options)))
    return parts


def format_mcqa_prompt(
    item: BenchmarkItem,
    templates: EvalTemplates | None = None,
    tag: str = "",
    exemplars: list[BenchmarkItem] | None = None,
) -> CompletionRequest:
    """Prompt: optional solved exemplars, context, question, options, instruction.

    Zero-shot by default; passing exemplars prepends each as a solved block
    ending in its gold letter.
    """
    item.validate()
    templates = templates or EvalTemplates.default()
    parts: list[str] = []
    for exemplar in exemplars or []:
        parts.extend(_item_block(exemplar))
        parts.append(f"Answer: {_LETTERS[exemplar.gold_index]}")
    parts.extend(_item_block(item))
    parts.append(templates.instruction_ar if item.language == "ar" else templates.instruction_en)
    return CompletionRequest(
        messages=[ChatMessage("user", "\n\n".join(parts))],
        max_output_tokens=32,
        temperature=0.0,
        request_tag=tag or f"eval:{item.dataset}:{item.language}:{item.item_id}",
    )


def extract_answer(completion_text: str, options: list[str]) -> int | None:
    """Map a free-text completion onto an option index; None means unparsed.

    First matching rule wins: (1) leading standalone letter, (2) an
    "answer is X" phrase, (3) a unique case-insensitive option-text match.
    """
    if not options:
        raise ValueError("options must be non-empty")
    n = len(options)

    match = _LEADING_LETTER_RE.match(completion_text or "")
    if match:
        index = _LETTERS.find(match.group(1).upper())
        if 0 <= index < n:
            return index

    match = _ANSWER_IS_RE.search(completion_text or "")
    if match:
        index = _LETTERS.find(match.group(1).upper())
        if 0 <= index < n:
            return index

    lowered = (completion_text or "").lower()
    hits = [i for i, option in enumerate(options) if option.lower() in lowered]
    if len(hits) == 1:
        return hits[0]
    return None


def _blank_cell() -> dict:
    return {"correct": 0, "scored": 0, "total": 0, "accuracy": None}


def _pick_exemplars(
    item: BenchmarkItem, pool: list[BenchmarkItem], shots: int
) -> list[BenchmarkItem]:
    if shots <= 0 or not pool:
        return []
    matching = [
        p
        for p in pool
        if p.dataset == item.dataset and p.language == item.language and p.item_id != item.item_id
    ]
    return matching[:shots]


def evaluate(
    items: list[BenchmarkItem],
    gateway: Gateway,
    model_tag: str = "model",
    mode: str = "extract",
    strict: bool = False,
    templates: EvalTemplates | None = None,
    predictions_path: str | Path | None = None,
    config_hash: str = "",
    shots: int = 0,
    exemplar_pool: list[BenchmarkItem] | None = None,
    workers: int = 1,
) -> EvalReport:
    """Query every item and aggregate per-column and bilingual accuracies.

    Unparsed answers count as incorrect. Backend failures mark items
    unscored and drop them from the denominator with a warning count
    (strict mode aborts instead). Accuracy is order-independent, so items
    may arrive in any permutation. workers > 1 queries item-parallel,
    bounded by the gateway's admission limit; aggregation stays
    deterministic either way.
    """
    if mode not in ("extract", "logprob"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "logprob" and not hasattr(gateway.backend, "score_options"):
        raise ValueError("backend does not expose option scores; use mode='extract'")
    templates = templates or EvalTemplates.default()

    ordered = sorted(items, key=lambda i: (i.dataset, i.language, i.item_id))

    def query(item: BenchmarkItem) -> dict:
        request = format_mcqa_prompt(
            item, templates, exemplars=_pick_exemplars(item, exemplar_pool or [], shots)
        )
        raw_text = ""
        predicted: int | None = None
        error: str | None = None
        latency_ms = 0
        if mode == "logprob":
            scores = gateway.backend.score_options(request, item.options)
            predicted = max(range(len(scores)), key=scores.__getitem__)
            raw_text = f"logprob:{[round(s, 4) for s in scores]}"
        else:
            try:
                result = gateway.complete(request)
                raw_text = result.text
                latency_ms = result.latency_ms
                predicted = extract_answer(raw_text, item.options)
            except BackendError as exc:
                if strict:
                    raise
                error = str(exc)
        return {
            "item_id": item.item_id,
            "dataset": item.dataset,
            "language": item.language,
            "raw_completion": raw_text,
            "extracted_index": predicted,
            "correct": predicted == item.gold_index if error is None else None,
            "latency_ms": latency_ms if error is None else None,
            "error": error,
        }

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            predictions = list(pool.map(query, ordered))
    else:
        predictions = [query(item) for item in ordered]

    cells: dict[tuple[str, str], dict] = {}
    unparsed = 0
    unscored = 0
    latency_total = 0
    for item, prediction in zip(ordered, predictions):
        cell = cells.setdefault((item.dataset, item.language), _blank_cell())
        cell["total"] += 1
        if prediction["error"] is not None:
            unscored += 1
            continue
        latency_total += prediction["latency_ms"]
        cell["scored"] += 1
        if prediction["extracted_index"] is None:
            unparsed += 1
        elif prediction["correct"]:
            cell["correct"] += 1

    if predictions_path is not None:
        jsonio.write_jsonl(predictions_path, predictions)

    columns: dict[str, dict] = {}
    for dataset in DATASET_COLUMNS:
        scopes: dict[str, dict] = {}
        for language in ("en", "ar"):
            cell = cells.get((dataset, language))
            if cell is None:
                continue
            cell["accuracy"] = cell["correct"] / cell["scored"] if cell["scored"] else None
            scopes[language] = cell
        if not scopes:
            continue
        bilingual = _blank_cell()
        for cell in scopes.values():
            bilingual["correct"] += cell["correct"]
            bilingual["scored"] += cell["scored"]
            bilingual["total"] += cell["total"]
        bilingual["accuracy"] = (
            bilingual["correct"] / bilingual["scored"] if bilingual["scored"] else None
        )
        scopes["bilingual"] = bilingual
        columns[dataset] = scopes

    avg: dict[str, float | None] = {}
    for scope in ("en", "ar", "bilingual"):
        values = [
            columns[d][scope]["accuracy"]
            for d in columns
            if scope in columns[d] and columns[d][scope]["accuracy"] is not None
        ]
        avg[scope] = sum(values) / len(values) if values else None

    return EvalReport(
        model_tag=model_tag,
        mode=mode,
        columns=columns,
        avg=avg,
        unparsed=unparsed,
        unscored=unscored,
        config_hash=config_hash,
        latency_ms_total=latency_total,
        shots=shots,
    )
