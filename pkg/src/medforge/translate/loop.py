"""The translate -> score -> refine loop and its routing decisions.

Round 1 translates the whole unit in a single call (full-document context),
every round is scored 0-100, and sub-threshold rounds feed the score back
into a refinement prompt. A unit leaves the loop as auto_accepted (some
round scored at or above the threshold; equality accepts) or needs_review
(round cap reached while still below threshold). Accepted units can still be
pulled into review by seeded audit sampling.
"""

from __future__ import annotations

import csv
import random
import re
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from ..errors import MedforgeError, ScoreParseError
from ..gateway import ChatMessage, CompletionRequest, Gateway
from .prompts import PromptSet, parse_delimited_fields, render_fields
from .types import (
    STATUS_AUTO_ACCEPTED,
    STATUS_NEEDS_REVIEW,
    STATUS_PENDING,
    Field,
    LoopConfig,
    QualityScore,
    RoundRecord,
    TranslationUnit,
)

_INT_RE = re.compile(r"(?<!\d)(\d{1,3})(?!\d)")


def _request(prompt: str, tag: str, max_tokens: int = 2048) -> CompletionRequest:
    return CompletionRequest(
        messages=[ChatMessage("user", prompt)],
        max_output_tokens=max_tokens,
        temperature=0.0,
        request_tag=tag,
    )


def translate(english_fields: list[Field], gateway: Gateway, prompts: PromptSet, tag: str) -> list[Field]:
    """Translate all fields in one call; alignment enforced on the way back."""
    if any(not text for _, text in english_fields):
        raise ValueError("english field texts must be non-empty")
    prompt = prompts.translate.format(english=render_fields(english_fields))
    result = gateway.complete(_request(prompt, tag))
    return parse_delimited_fields(result.text, [name for name, _ in english_fields])


def score_translation(
    english_fields: list[Field],
    arabic_fields: list[Field],
    gateway: Gateway,
    prompts: PromptSet,
    tag: str,
) -> QualityScore:
    """Ask the backend to grade the Arabic against the English, 0-100."""
    if [n for n, _ in english_fields] != [n for n, _ in arabic_fields]:
        raise ValueError("field lists must be aligned before scoring")
    prompt = prompts.score.format(
        english=render_fields(english_fields),
        arabic=render_fields(arabic_fields),
    )
    result = gateway.complete(_request(prompt, tag, max_tokens=512))
    for match in _INT_RE.finditer(result.text):
        value = int(match.group(1))
        if 0 <= value <= 100:
            return QualityScore(value=value, rationale=result.text.strip(), scorer_tag=result.backend_id)
    raise ScoreParseError(f"no integer in [0, 100] in scorer response: {result.text[:120]!r}")


def refine(
    english_fields: list[Field],
    arabic_fields: list[Field],
    prior_score: QualityScore,
    gateway: Gateway,
    prompts: PromptSet,
    tag: str,
) -> list[Field]:
    """One feedback revision: English + current Arabic + numeric score."""
    prompt = prompts.refine.format(
        english=render_fields(english_fields),
        arabic=render_fields(arabic_fields),
        score=prior_score.value,
    )
    result = gateway.complete(_request(prompt, tag))
    return parse_delimited_fields(result.text, [name for name, _ in english_fields])


def run_iterative(
    unit: TranslationUnit,
    cfg: LoopConfig,
    gateway: Gateway,
    prompts: PromptSet | None = None,
) -> TranslationUnit:
    """Drive one unit to auto_accepted or needs_review.

    Resumable: a unit interrupted after k rounds (status still pending,
    rounds recorded) picks up at round k+1 and, given the same script,
    finishes exactly like an uninterrupted run. On backend or parse errors
    the unit is left pending with all completed rounds intact.
    """
    cfg.validate()
    prompts = prompts or PromptSet.default()
    if unit.status != STATUS_PENDING:
        raise ValueError(f"unit {unit.unit_id} is {unit.status}, expected pending")

    unit.meta.setdefault("threshold", cfg.threshold)
    unit.meta.setdefault("max_rounds", cfg.max_rounds)

    while True:
        last = unit.rounds[-1] if unit.rounds else None
        if last is not None and last.score.value >= cfg.threshold:
            unit.arabic_fields = last.arabic_snapshot
            unit.transition(STATUS_AUTO_ACCEPTED)
            return unit
        if len(unit.rounds) >= cfg.max_rounds:
            unit.arabic_fields = unit.rounds[-1].arabic_snapshot
            unit.transition(STATUS_NEEDS_REVIEW)
            return unit

        round_index = len(unit.rounds) + 1
        if last is None:
            arabic = translate(unit.english_fields, gateway, prompts, tag=f"translate:{unit.unit_id}")
        else:
            arabic = refine(
                unit.english_fields,
                last.arabic_snapshot,
                last.score,
                gateway,
                prompts,
                tag=f"refine:{unit.unit_id}:r{round_index}",
            )
        score = score_translation(
            unit.english_fields, arabic, gateway, prompts, tag=f"score:{unit.unit_id}:r{round_index}"
        )
        unit.rounds.append(RoundRecord(round_index=round_index, arabic_snapshot=arabic, score=score))


def run_units(
    units: list[TranslationUnit],
    cfg: LoopConfig,
    gateway: Gateway,
    prompts: PromptSet | None = None,
    workers: int = 1,
) -> tuple[list[TranslationUnit], list[tuple[str, str]]]:
    """Run the loop over many units; failures leave units pending.

    Returns (units, failures) where failures is a list of (unit_id, error).
    Units are independent: with workers > 1 they run in parallel threads
    (rounds within a unit stay sequential; the gateway bounds admission),
    and a failed unit never blocks the rest. Output list order is input
    order regardless of worker count.
    """
    prompts = prompts or PromptSet.default()
    pending = [u for u in units if u.status == STATUS_PENDING]

    def drive(unit: TranslationUnit) -> tuple[str, str] | None:
        try:
            run_iterative(unit, cfg, gateway, prompts)
            return None
        except MedforgeError as exc:
            return (unit.unit_id, str(exc))

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(drive, pending))
    else:
        outcomes = [drive(unit) for unit in pending]
    failures = [outcome for outcome in outcomes if outcome is not None]
    return units, failures


def _round_half_up(value: Decimal) -> int:
    return int(value.quantize(Decimal("1"), rounding=ROUND_HALF_UP))


def audit_sample(accepted_units: list[TranslationUnit], cfg: LoopConfig) -> list[str]:
    """Seeded random pick of accepted units for professional spot review.

    Pure function of (sorted unit ids, audit_rate, rng_seed): input order
    never changes the selection. Selection size is round-half-up of
    rate * count.
    """
    for unit in accepted_units:
        if unit.status != STATUS_AUTO_ACCEPTED:
            raise ValueError(f"unit {unit.unit_id} is {unit.status}, expected auto_accepted")
    ids = sorted(unit.unit_id for unit in accepted_units)
    k = _round_half_up(Decimal(str(cfg.audit_rate)) * len(ids))
    if k == 0:
        return []
    rng = random.Random(cfg.rng_seed)
    return sorted(rng.sample(ids, k))


def export_calibration_csv(units: list[TranslationUnit], path: str | Path) -> int:
    """Dump (score, unit_id, english, arabic) rows for offline human-alignment checks."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["score", "unit_id", "english", "arabic"])
        for unit in units:
            score = unit.latest_score()
            if score is None or unit.arabic_fields is None:
                continue
            english = " | ".join(text for _, text in unit.english_fields)
            arabic = " | ".join(text for _, text in unit.arabic_fields)
            writer.writerow([score.value, unit.unit_id, english, arabic])
            rows += 1
    return rows
