"""Conversation rendering, bilingual mixing, and corpus statistics.

Rendering follows the training-format convention: turns alternate
"human"/"AI" starting with the human, and the loss mask flags exactly the
AI turns. "Avg. Turns" counts exchange rounds (human+AI pairs), so a
plain QA pair is 1.00 turns.
"""

from __future__ import annotations

import random
from decimal import ROUND_HALF_UP, Decimal

from ..errors import RatioUnreachable
from .records import (
    KIND_CHAT,
    KIND_MCQA,
    KIND_QA,
    KINDS,
    LANG_AR,
    LANG_EN,
    ROLE_AI,
    ROLE_HUMAN,
    DatasetManifest,
    InstructionSample,
    SourceRecord,
)
from .tokens import DEFAULT_TOKENIZER, count_tokens

_OPTIONS_HEADER = "Options:"


def render_conversation(record: SourceRecord) -> InstructionSample:
    """Render one source record into the two-role conversation format."""
    record.validate()
    if record.kind == KIND_MCQA:
        item = record.payload
        options_block = "\n".join(f"{label}. {text}" for label, text in item.options)
        human = f"{item.question}\n\n{_OPTIONS_HEADER}\n{options_block}"
        ai = f"{item.gold_label}. {item.gold_text()}"
        conversations = [
            {"from": ROLE_HUMAN, "value": human},
            {"from": ROLE_AI, "value": ai},
        ]
    elif record.kind == KIND_QA:
        conversations = [
            {"from": ROLE_HUMAN, "value": record.payload["question"]},
            {"from": ROLE_AI, "value": record.payload["answer"]},
        ]
    else:
        conversations = [
            {"from": ROLE_HUMAN if speaker == "patient" else ROLE_AI, "value": text}
            for speaker, text in record.payload.turns
        ]
    sample = InstructionSample(
        record_id=record.record_id,
        language=record.language,
        kind=record.kind,
        conversations=conversations,
        loss_mask=[turn["from"] == ROLE_AI for turn in conversations],
    )
    sample.validate()
    return sample


def parse_conversation(sample: InstructionSample) -> dict:
    """Invert render_conversation back to the record's conversational content.

    Used as the independent round-trip check that rendering loses nothing.
    """
    sample.validate()
    if sample.kind == KIND_MCQA:
        human = sample.conversations[0]["value"]
        ai = sample.conversations[1]["value"]
        question, _, options_block = human.rpartition(f"\n\n{_OPTIONS_HEADER}\n")
        options = []
        for line in options_block.splitlines():
            label, _, text = line.partition(". ")
            options.append((label, text))
        gold_label, _, gold_text = ai.partition(". ")
        return {
            "question": question,
            "options": options,
            "gold_label": gold_label,
            "gold_text": gold_text,
        }
    if sample.kind == KIND_QA:
        return {
            "question": sample.conversations[0]["value"],
            "answer": sample.conversations[1]["value"],
        }
    return {
        "turns": [
            ("patient" if turn["from"] == ROLE_HUMAN else "doctor", turn["value"])
            for turn in sample.conversations
        ]
    }


def sample_to_json(sample: InstructionSample, assistant_role: str = ROLE_AI) -> dict:
    """Serialize one sample; assistant_role="gpt" emits the alternate
    assistant label some fine-tuning toolchains expect."""
    if assistant_role == ROLE_AI:
        conversations = sample.conversations
    else:
        conversations = [
            {"from": assistant_role if t["from"] == ROLE_AI else t["from"], "value": t["value"]}
            for t in sample.conversations
        ]
    return {
        "record_id": sample.record_id,
        "language": sample.language,
        "kind": sample.kind,
        "conversations": conversations,
        "loss_mask": sample.loss_mask,
    }


def sample_from_json(obj: dict) -> InstructionSample:
    sample = InstructionSample(
        record_id=obj["record_id"],
        language=obj["language"],
        kind=obj["kind"],
        conversations=[
            {"from": ROLE_AI if t["from"] == "gpt" else t["from"], "value": t["value"]}
            for t in obj["conversations"]
        ],
        loss_mask=[bool(b) for b in obj["loss_mask"]],
    )
    sample.validate()
    return sample


def _round_half_up(value: Decimal) -> int:
    return int(value.quantize(Decimal("1"), rounding=ROUND_HALF_UP))


def _measure(samples: list[InstructionSample], by_tokens: bool, tokenizer_id: str) -> int:
    if not by_tokens:
        return len(samples)
    return sum(
        count_tokens(turn["value"], tokenizer_id) for s in samples for turn in s.conversations
    )


def _keep_subset(samples: list[InstructionSample], k: int, rng: random.Random) -> list[InstructionSample]:
    indices = sorted(rng.sample(range(len(samples)), k))
    return [samples[i] for i in indices]


def mix_bilingual(
    en_samples: list[InstructionSample],
    ar_samples: list[InstructionSample],
    seed: int,
    target_ratio: float = 0.5,
    tolerance: float = 0.01,
    downsample: bool = True,
    by_tokens: bool = False,
    tokenizer_id: str = DEFAULT_TOKENIZER,
) -> tuple[list[InstructionSample], dict]:
    """Combine the two languages at the target ar:en ratio (default 1:2).

    When the supplied ratio deviates beyond tolerance, the over-represented
    language is randomly downsampled (seeded, order-preserving); with
    downsampling disabled the deviation is an error. Returns the shuffled
    corpus plus a sampling report for the manifest.
    """
    rng = random.Random(seed)
    en_kept, ar_kept = list(en_samples), list(ar_samples)
    m_en = _measure(en_kept, by_tokens, tokenizer_id)
    m_ar = _measure(ar_kept, by_tokens, tokenizer_id)

    if m_en == 0 and m_ar == 0:
        info = _sampling_info(target_ratio, None, tolerance, en_samples, ar_samples, en_kept, ar_kept, by_tokens, seed)
        return [], info

    def ratio_of(en_m: int, ar_m: int) -> float | None:
        return None if en_m == 0 else ar_m / en_m

    achieved = ratio_of(m_en, m_ar)
    if achieved is None or abs(achieved - target_ratio) > tolerance:
        if not downsample:
            raise RatioUnreachable(
                f"supplied ar:en ratio {achieved if achieved is not None else 'undefined'} "
                f"deviates from target {target_ratio} by more than {tolerance} and downsampling is off"
            )
        if achieved is None:
            raise RatioUnreachable("no English samples; cannot reach a finite ar:en ratio")
        if achieved > target_ratio:
            if by_tokens:
                ar_kept = _downsample_to_tokens(ar_kept, _round_half_up(Decimal(str(target_ratio)) * m_en), rng, tokenizer_id)
            else:
                k = _round_half_up(Decimal(str(target_ratio)) * m_en)
                ar_kept = _keep_subset(ar_kept, min(k, len(ar_kept)), rng)
        else:
            if by_tokens:
                en_kept = _downsample_to_tokens(en_kept, _round_half_up(Decimal(str(m_ar)) / Decimal(str(target_ratio))), rng, tokenizer_id)
            else:
                k = _round_half_up(Decimal(str(m_ar)) / Decimal(str(target_ratio)))
                en_kept = _keep_subset(en_kept, min(k, len(en_kept)), rng)
        m_en = _measure(en_kept, by_tokens, tokenizer_id)
        m_ar = _measure(ar_kept, by_tokens, tokenizer_id)
        achieved = ratio_of(m_en, m_ar)
        if achieved is None or abs(achieved - target_ratio) > tolerance:
            raise RatioUnreachable(
                f"ar:en ratio {achieved} still outside {target_ratio} +/- {tolerance} after downsampling"
            )

    corpus = en_kept + ar_kept
    rng.shuffle(corpus)
    info = _sampling_info(target_ratio, achieved, tolerance, en_samples, ar_samples, en_kept, ar_kept, by_tokens, seed)
    return corpus, info


def _downsample_to_tokens(
    samples: list[InstructionSample], target_tokens: int, rng: random.Random, tokenizer_id: str
) -> list[InstructionSample]:
    order = list(range(len(samples)))
    rng.shuffle(order)
    kept_idx: list[int] = []
    total = 0
    for i in order:
        if total >= target_tokens:
            break
        kept_idx.append(i)
        total += sum(count_tokens(t["value"], tokenizer_id) for t in samples[i].conversations)
    return [samples[i] for i in sorted(kept_idx)]


def _sampling_info(target, achieved, tolerance, en_all, ar_all, en_kept, ar_kept, by_tokens, seed) -> dict:
    return {
        "target_ratio": target,
        "achieved_ratio": round(achieved, 6) if achieved is not None else None,
        "tolerance": tolerance,
        "mode": "tokens" if by_tokens else "samples",
        "en_supplied": len(en_all),
        "ar_supplied": len(ar_all),
        "en_kept": len(en_kept),
        "ar_kept": len(ar_kept),
        "seed": seed,
    }


def compute_stats(
    samples: list[InstructionSample],
    tokenizer_id: str = DEFAULT_TOKENIZER,
    rng_seed: int = 0,
    config_hash: str = "",
    sampling: dict | None = None,
) -> DatasetManifest:
    """Per-slice counts, exchange-round means, and token totals.

    Recomputing over the emitted corpus file reproduces the manifest
    bit-exactly given the same seed/tokenizer arguments.
    """
    slices: dict[str, dict] = {}
    for kind in KINDS:
        for lang in (LANG_EN, LANG_AR):
            slices[f"{kind}/{lang}"] = {"samples": 0, "turn_pairs": 0, "tokens": 0}
    for sample in samples:
        sample.validate()
        cell = slices[f"{sample.kind}/{sample.language}"]
        cell["samples"] += 1
        cell["turn_pairs"] += len(sample.conversations) / 2
        cell["tokens"] += sum(count_tokens(t["value"], tokenizer_id) for t in sample.conversations)

    total_samples = sum(c["samples"] for c in slices.values())
    total_pairs = sum(c["turn_pairs"] for c in slices.values())
    total_tokens = sum(c["tokens"] for c in slices.values())
    for cell in slices.values():
        n = cell["samples"]
        cell["avg_turns"] = round(cell.pop("turn_pairs") / n, 2) if n else 0.0
        if isinstance(cell["avg_turns"], float) and cell["avg_turns"].is_integer():
            cell["avg_turns"] = float(cell["avg_turns"])

    en_count = sum(slices[f"{k}/{LANG_EN}"]["samples"] for k in KINDS)
    ar_count = sum(slices[f"{k}/{LANG_AR}"]["samples"] for k in KINDS)
    return DatasetManifest(
        slices=slices,
        totals={
            "samples": total_samples,
            "avg_turns": round(total_pairs / total_samples, 2) if total_samples else 0.0,
            "tokens": total_tokens,
        },
        ar_to_en_ratio=round(ar_count / en_count, 6) if en_count else None,
        rng_seed=rng_seed,
        tokenizer_id=tokenizer_id,
        config_hash=config_hash,
        sampling=sampling or {},
    )
