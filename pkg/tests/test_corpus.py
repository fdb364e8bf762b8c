"""Corpus compiler: ingestion, rendering, mixing, statistics, tuning manifest."""

from __future__ import annotations

import json
import random

import pytest

from medforge import jsonio
from medforge.chat import ChatTranscript, McqaItem
from medforge.corpus import (
    InstructionSample,
    SourceRecord,
    compute_stats,
    count_tokens,
    default_tuning_config,
    emit_tuning_manifest,
    ingest,
    mix_bilingual,
    parse_conversation,
    render_conversation,
    sample_from_json,
    sample_to_json,
)
from medforge.errors import MissingField, RatioUnreachable, SchemaError, UnknownTokenizer


def mcqa_record(record_id: str = "r1", language: str = "en") -> SourceRecord:
    return SourceRecord(
        record_id=record_id,
        kind="MCQA",
        language=language,
        payload=McqaItem(
            item_id=record_id,
            question="Which vitamin deficiency causes scurvy?",
            options=[("A", "Vitamin A"), ("B", "Vitamin B12"), ("C", "Vitamin C"), ("D", "Vitamin D")],
            gold_label="C",
            source_dataset="MedMCQA",
        ),
        origin="MedMCQA",
    )


def qa_record(record_id: str = "r2", language: str = "en") -> SourceRecord:
    return SourceRecord(
        record_id=record_id,
        kind="QA",
        language=language,
        payload={"question": "What is X?", "answer": "X is a placeholder in examples."},
        origin="iCliniq",
    )


def chat_record(record_id: str = "r3", n_turns: int = 4, language: str = "en") -> SourceRecord:
    turns = []
    for i in range(n_turns):
        speaker = "patient" if i % 2 == 0 else "doctor"
        turns.append((speaker, f"turn {i}"))
    return SourceRecord(
        record_id=record_id,
        kind="Chat",
        language=language,
        payload=ChatTranscript(grounding_id=record_id, turns=turns, token_count=n_turns * 2),
        origin="synthesized",
    )


class TestIngest:
    def medmcqa_line(self, q: str) -> dict:
        return {"question": q, "opa": "one", "opb": "two", "opc": "three", "opd": "four", "cop": 2}

    def test_three_line_medmcqa_file(self, tmp_path):
        path = tmp_path / "medmcqa.jsonl"
        jsonio.write_jsonl(path, [self.medmcqa_line(f"q{i}") for i in range(3)])
        records, dups = ingest(path, "MedMCQA")
        assert len(records) == 3 and dups == 0
        assert all(r.kind == "MCQA" and len(r.payload.options) == 4 for r in records)
        assert all(r.payload.gold_label == "C" for r in records)

    def test_duplicate_line_dropped_with_count(self, tmp_path):
        path = tmp_path / "dup.jsonl"
        jsonio.write_jsonl(path, [self.medmcqa_line("same"), self.medmcqa_line("same")])
        records, dups = ingest(path, "MedMCQA")
        assert len(records) == 1 and dups == 1

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(
            json.dumps(self.medmcqa_line("ok")) + "\n" + '{"question": "missing options"}\n',
            encoding="utf-8",
        )
        with pytest.raises(SchemaError) as err:
            ingest(path, "MedMCQA")
        assert err.value.line == 2

    def test_medqa_shape(self, tmp_path):
        path = tmp_path / "medqa.jsonl"
        jsonio.write_jsonl(
            path,
            [{"question": "q", "options": {"A": "w", "B": "x", "C": "y", "D": "z"}, "answer_idx": "B"}],
        )
        records, _ = ingest(path, "MedQA")
        assert records[0].payload.gold_label == "B"

    def test_pubmedqa_shape(self, tmp_path):
        path = tmp_path / "pubmedqa.jsonl"
        jsonio.write_jsonl(
            path,
            [{"question": "Does it work?", "context": ["an abstract"], "final_decision": "maybe"}],
        )
        records, _ = ingest(path, "PubMedQA")
        assert records[0].payload.options == [("A", "yes"), ("B", "no"), ("C", "maybe")]
        assert records[0].payload.gold_label == "C"

    def test_qa_alias_keys(self, tmp_path):
        path = tmp_path / "qa.jsonl"
        jsonio.write_jsonl(path, [{"input": "q?", "output": "a."}])
        records, _ = ingest(path, "HealthCareMagic")
        assert records[0].payload == {"question": "q?", "answer": "a."}


class TestRenderConversation:
    def test_qa_two_turns_masked(self):
        sample = render_conversation(qa_record())
        assert len(sample.conversations) == 2
        assert sample.loss_mask == [False, True]
        assert sample.conversations[0]["from"] == "human"
        assert sample.conversations[1]["from"] == "AI"

    def test_four_turn_chat_mask(self):
        sample = render_conversation(chat_record(n_turns=4))
        assert [t["from"] for t in sample.conversations] == ["human", "AI", "human", "AI"]
        assert sample.loss_mask == [False, True, False, True]

    def test_mcqa_option_letters_once_each(self):
        sample = render_conversation(mcqa_record())
        human = sample.conversations[0]["value"]
        for letter in ("A.", "B.", "C.", "D."):
            assert human.count(letter) == 1
        assert sample.conversations[1]["value"] == "C. Vitamin C"

    @pytest.mark.parametrize("maker", [mcqa_record, qa_record, chat_record])
    def test_round_trip_reconstructs_content(self, maker):
        record = maker()
        content = parse_conversation(render_conversation(record))
        if record.kind == "MCQA":
            assert content["question"] == record.payload.question
            assert content["options"] == record.payload.options
            assert content["gold_label"] == record.payload.gold_label
            assert content["gold_text"] == record.payload.gold_text()
        elif record.kind == "QA":
            assert content == record.payload
        else:
            assert content["turns"] == record.payload.turns

    def test_serialized_sample_shape_and_round_trip(self):
        sample = render_conversation(qa_record())
        text = jsonio.dumps(sample_to_json(sample))
        assert '"conversations": [{"from": ' in text
        assert sample_from_json(json.loads(text)) == sample

    def test_gpt_compat_role_emission_and_reparse(self):
        sample = render_conversation(qa_record())
        obj = sample_to_json(sample, assistant_role="gpt")
        assert [t["from"] for t in obj["conversations"]] == ["human", "gpt"]
        # loss mask semantics survive the alternate label
        assert sample_from_json(obj) == sample

    def test_record_serialization_round_trip(self):
        for record in (mcqa_record(), qa_record(), chat_record()):
            assert SourceRecord.from_dict(record.to_dict()) == record


def en_corpus(n: int) -> list[InstructionSample]:
    return [render_conversation(qa_record(f"en{i:04d}", "en")) for i in range(n)]


def ar_corpus(n: int) -> list[InstructionSample]:
    samples = []
    for i in range(n):
        rec = SourceRecord(
            record_id=f"ar{i:04d}",
            kind="QA",
            language="ar",
            payload={"question": "ما هو س؟", "answer": "س عنصر نائب في الأمثلة."},
            origin="iCliniq",
            source_id=f"en{i:04d}",
        )
        samples.append(render_conversation(rec))
    return samples


class TestMixBilingual:
    def test_exact_target_no_sampling(self):
        corpus, info = mix_bilingual(en_corpus(1000), ar_corpus(500), seed=7)
        assert info["achieved_ratio"] == 0.5
        assert info["en_kept"] == 1000 and info["ar_kept"] == 500
        assert len(corpus) == 1500

    def test_downsamples_overrepresented_arabic(self):
        corpus, info = mix_bilingual(en_corpus(1000), ar_corpus(800), seed=7)
        assert info["ar_kept"] == 500
        assert info["achieved_ratio"] == pytest.approx(0.5, abs=0.01)
        rerun, rerun_info = mix_bilingual(en_corpus(1000), ar_corpus(800), seed=7)
        assert [s.record_id for s in corpus] == [s.record_id for s in rerun]
        other_seed, _ = mix_bilingual(en_corpus(1000), ar_corpus(800), seed=8)
        assert [s.record_id for s in corpus] != [s.record_id for s in other_seed]

    def test_downsamples_overrepresented_english(self):
        _, info = mix_bilingual(en_corpus(1000), ar_corpus(100), seed=7)
        assert info["en_kept"] == 200 and info["ar_kept"] == 100

    def test_unreachable_when_downsampling_off(self):
        with pytest.raises(RatioUnreachable):
            mix_bilingual(en_corpus(1000), ar_corpus(100), seed=7, downsample=False)

    def test_no_english_is_unreachable(self):
        with pytest.raises(RatioUnreachable):
            mix_bilingual([], ar_corpus(10), seed=7)

    def test_empty_both_is_empty_corpus(self):
        corpus, info = mix_bilingual([], [], seed=7)
        assert corpus == [] and info["achieved_ratio"] is None


class TestComputeStats:
    def test_qa_slice_single_turn(self):
        manifest = compute_stats([render_conversation(qa_record(f"q{i}")) for i in range(2)])
        cell = manifest.slices["QA/en"]
        assert cell["samples"] == 2
        assert cell["avg_turns"] == 1.0

    def test_chat_exchange_rounds(self):
        samples = [
            render_conversation(chat_record("c1", n_turns=4)),
            render_conversation(chat_record("c2", n_turns=6)),
        ]
        manifest = compute_stats(samples)
        assert manifest.slices["Chat/en"]["avg_turns"] == 2.5

    def test_empty_corpus(self):
        manifest = compute_stats([])
        assert manifest.totals == {"samples": 0, "avg_turns": 0.0, "tokens": 0}
        assert manifest.ar_to_en_ratio is None

    def test_additivity_and_recompute_bit_exact(self):
        corpus, info = mix_bilingual(en_corpus(40), ar_corpus(20), seed=3)
        manifest = compute_stats(corpus, rng_seed=3, sampling=info)
        assert sum(c["samples"] for c in manifest.slices.values()) == manifest.totals["samples"]
        assert sum(c["tokens"] for c in manifest.slices.values()) == manifest.totals["tokens"]
        # Round-trip through serialized JSONL and recompute: identical manifest.
        rows = [sample_to_json(s) for s in corpus]
        reparsed = [sample_from_json(r) for r in rows]
        again = compute_stats(reparsed, rng_seed=3, sampling=info)
        assert jsonio.dumps(again.to_dict()) == jsonio.dumps(manifest.to_dict())

    def test_ratio_reported(self):
        corpus, _ = mix_bilingual(en_corpus(10), ar_corpus(5), seed=1)
        manifest = compute_stats(corpus)
        assert manifest.ar_to_en_ratio == 0.5


class TestCountTokens:
    def test_word_and_number_segments(self):
        assert count_tokens("aspirin 81 mg") == 3

    def test_empty_string(self):
        assert count_tokens("") == 0

    def test_arabic_segments(self):
        assert count_tokens("ألم في الرأس") == 3

    def test_punctuation_counts(self):
        assert count_tokens("Dr. Smith, MD") == 5

    def test_unknown_tokenizer(self):
        with pytest.raises(UnknownTokenizer):
            count_tokens("text", "no-such-tokenizer")


class TestMaskLaw:
    def test_property_over_randomized_corpus(self):
        rng = random.Random(20240501)
        makers = [mcqa_record, qa_record, chat_record]
        violations = 0
        for i in range(300):
            maker = rng.choice(makers)
            record = maker(f"rnd{i}") if maker is not chat_record else chat_record(f"rnd{i}", rng.choice([2, 4, 6, 8]))
            sample = render_conversation(record)
            for masked, turn in zip(sample.loss_mask, sample.conversations):
                if masked != (turn["from"] == "AI"):
                    violations += 1
        assert violations == 0


class TestTuningManifest:
    def test_reference_defaults(self, tmp_path):
        manifest = emit_tuning_manifest(default_tuning_config(), tmp_path / "tuning.json")
        assert manifest["adapter_rank"] == 128
        assert manifest["adapter_alpha"] == 64
        assert manifest["learning_rate"] == 0.0002
        assert manifest["schedule"] == "cosine"
        assert manifest["warmup_steps"] == 10
        assert manifest["epochs"] == 2
        assert manifest["batch_size"] == 16
        assert manifest["grad_accum_steps"] == 2
        assert manifest["optimizer"] == "AdamW"
        assert set(manifest["adapter_targets"]) == {"q", "k", "v", "experts", "router"}

    def test_missing_field(self, tmp_path):
        cfg = default_tuning_config()
        del cfg["learning_rate"]
        with pytest.raises(MissingField):
            emit_tuning_manifest(cfg, tmp_path / "tuning.json")

    def test_override_recorded(self, tmp_path):
        cfg = default_tuning_config()
        cfg["adapter_rank"] = 8
        manifest = emit_tuning_manifest(cfg, tmp_path / "tuning.json")
        assert manifest["adapter_rank"] == 8

    def test_fraction_computed_from_architecture(self, tmp_path):
        arch = {
            "total_params": 1_000_000,
            "adapter_targets": [{"name": "q", "d_in": 100, "d_out": 100, "count": 10}],
        }
        manifest = emit_tuning_manifest(default_tuning_config(), tmp_path / "t.json", architecture=arch)
        # 10 matrices * rank 128 * (100 + 100) = 256_000 of 1_000_000
        assert manifest["adapter_param_fraction"] == pytest.approx(0.256)
