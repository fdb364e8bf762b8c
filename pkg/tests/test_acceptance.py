"""Acceptance criteria, one test (or parametrized group) per criterion.

Each criterion runs at its stated tolerance; the conftest terminal hook
prints a one-line verdict per criterion at the end of the run.
"""

from __future__ import annotations

import filecmp
import json
import random
import shutil
import string
import time
from pathlib import Path

import pytest

from medforge import jsonio
from medforge.chat import ChatTranscript, McqaItem, validate_turns
from medforge.corpus import (
    SourceRecord,
    mix_bilingual,
    render_conversation,
    sample_from_json,
    sample_to_json,
)
from medforge.demo import run_demo
from medforge.errors import CountMismatch
from medforge.evalharness import (
    BenchmarkItem,
    DATASET_COLUMNS,
    dataset_file_stem,
    evaluate,
    load_suite,
    row_average,
)
from medforge.evalharness.loader import write_benchmark
from medforge.gateway import BackendConfig, FunctionBackend, Gateway, MockBackend
from medforge.translate import LoopConfig, TranslationUnit, audit_sample, run_iterative


def fast_gateway(script: dict) -> Gateway:
    return Gateway(MockBackend(script), BackendConfig(max_retries=0, min_retry_backoff_ms=1))


def scripted_unit(unit_id: str, scores: list[int]) -> tuple[TranslationUnit, dict]:
    unit = TranslationUnit(
        unit_id=unit_id,
        source_id=f"src-{unit_id}",
        english_fields=[("question", "english question"), ("answer", "english answer")],
    )
    script = {
        f"translate:{unit_id}": ["[[F1]]\nسؤال\n[[F2]]\nجواب"],
        f"score:{unit_id}:r1": [f"Score: {scores[0]}"],
    }
    for r, s in enumerate(scores[1:], start=2):
        script[f"refine:{unit_id}:r{r}"] = [f"[[F1]]\nسؤال {r}\n[[F2]]\nجواب {r}"]
        script[f"score:{unit_id}:r{r}"] = [f"Score: {s}"]
    return unit, script


# -- criterion 1: loop semantics ------------------------------------------------


def test_criterion_01_loop_semantics():
    started = time.monotonic()

    unit, script = scripted_unit("c1a", [60, 75, 90])
    run_iterative(unit, LoopConfig(threshold=80, max_rounds=5), fast_gateway(script))
    assert unit.status == "auto_accepted"
    assert len(unit.rounds) == 3
    assert [r.score.value for r in unit.rounds] == [60, 75, 90]

    unit2, script2 = scripted_unit("c1b", [60, 70])
    run_iterative(unit2, LoopConfig(threshold=80, max_rounds=2), fast_gateway(script2))
    assert unit2.status == "needs_review"
    assert len(unit2.rounds) == 2

    assert time.monotonic() - started < 1.0


# -- criterion 2: boundary rule -------------------------------------------------


def test_criterion_02_boundary_rule():
    unit, script = scripted_unit("c2", [80])
    run_iterative(unit, LoopConfig(threshold=80, max_rounds=5), fast_gateway(script))
    assert unit.status == "auto_accepted"
    assert len(unit.rounds) == 1


# -- criterion 3: audit determinism ---------------------------------------------


def test_criterion_03_audit_determinism():
    units = []
    for i in range(100):
        unit, script = scripted_unit(f"c3-{i:03d}", [95])
        run_iterative(unit, LoopConfig(threshold=80, max_rounds=1), fast_gateway(script))
        units.append(unit)
    cfg = LoopConfig(audit_rate=0.05, rng_seed=424242)
    first = audit_sample(units, cfg)
    assert len(first) == 5
    for _ in range(10):
        assert audit_sample(units, cfg) == first


# -- criterion 4: ratio law ------------------------------------------------------


def _qa_samples(n: int, language: str):
    samples = []
    for i in range(n):
        record = SourceRecord(
            record_id=f"{language}-{i:04d}",
            kind="QA",
            language=language,
            payload={
                "question": f"question {i}?" if language == "en" else f"سؤال {i}؟",
                "answer": f"answer {i}." if language == "en" else f"جواب {i}.",
            },
            origin="iCliniq",
        )
        samples.append(render_conversation(record))
    return samples


def test_criterion_04_ratio_law():
    corpus, info = mix_bilingual(_qa_samples(1000, "en"), _qa_samples(800, "ar"), seed=99)
    assert info["ar_kept"] == 500
    assert abs(info["achieved_ratio"] - 0.5) <= 0.01
    rerun, rerun_info = mix_bilingual(_qa_samples(1000, "en"), _qa_samples(800, "ar"), seed=99)
    assert [s.record_id for s in rerun] == [s.record_id for s in corpus]
    assert rerun_info == info


# -- criterion 5: mask law -------------------------------------------------------


def test_criterion_05_mask_law():
    rng = random.Random(1337)
    violations = 0
    checked = 0
    for i in range(1000):
        kind = rng.choice(["MCQA", "QA", "Chat"])
        rid = f"m{i:04d}"
        if kind == "MCQA":
            n_opt = rng.randint(2, 5)
            labels = list(string.ascii_uppercase[:n_opt])
            payload: object = McqaItem(
                item_id=rid,
                question=f"random question {i}?",
                options=[(lb, f"choice {lb}{i}") for lb in labels],
                gold_label=rng.choice(labels),
            )
            origin = "MedMCQA"
        elif kind == "QA":
            payload = {"question": f"q{i}", "answer": f"a{i}"}
            origin = "LiveQA"
        else:
            n_turns = rng.choice([2, 4, 6, 8, 10, 12])
            turns = [
                ("patient" if t % 2 == 0 else "doctor", f"utterance {t} of {i}")
                for t in range(n_turns)
            ]
            payload = ChatTranscript(grounding_id=rid, turns=turns, token_count=0)
            origin = "synthesized"
        record = SourceRecord(record_id=rid, kind=kind, language=rng.choice(["en", "ar"]), payload=payload, origin=origin)
        sample = render_conversation(record)
        for masked, turn in zip(sample.loss_mask, sample.conversations):
            checked += 1
            if masked != (turn["from"] == "AI"):
                violations += 1
    assert checked >= 1000
    assert violations == 0


# -- criterion 6: conversation format fixture ------------------------------------


def test_criterion_06_format_fixture():
    record = SourceRecord(
        record_id="fmt-1",
        kind="QA",
        language="en",
        payload={"question": "What is the recommended dose?", "answer": "81 mg daily."},
        origin="MedicationQA",
    )
    sample = render_conversation(record)
    serialized = jsonio.dumps(sample_to_json(sample))
    assert '"conversations": [{"from": ' in serialized
    assert '"from": "human"' in serialized and '"from": "AI"' in serialized
    round_tripped = sample_from_json(json.loads(serialized))
    assert round_tripped == sample


# -- criterion 7: AVG reproduction ------------------------------------------------

# Reference accuracy rows (percent) from published model comparisons on this
# nine-column suite, with the AVG each source printed alongside.
REFERENCE_ROWS = [
    ("bilingual-suite/jais-30b", [57.4, 55.2, 46.2, 55.0, 46.0, 48.9, 40.2, 31.0, 75.5], 50.6),
    ("bilingual-suite/mixtral-8x7b", [59.1, 57.6, 52.6, 59.5, 53.3, 54.4, 43.2, 40.6, 74.7], 55.0),
    ("bilingual-suite/bimedix", [70.6, 72.2, 59.3, 74.0, 64.2, 59.6, 55.8, 54.0, 78.6], 65.4),
    ("arabic-suite/jais-30b", [52.1, 50.7, 40.5, 49.0, 39.3, 43.0, 37.0, 28.8, 74.6], 46.1),
    ("arabic-suite/bimedix-arabic", [60.0, 54.9, 55.5, 58.0, 58.1, 49.6, 46.0, 40.2, 76.6], 55.4),
    ("english-suite/pmc-llama-13b", [63.0, 59.7, 52.6, 70.0, 64.3, 61.5, 50.5, 47.2, 75.6], 60.5),
    ("english-suite/med42-70b", [75.9, 84.0, 69.9, 83.0, 78.7, 64.4, 61.9, 61.3, 77.2], 72.9),
    ("english-suite/clinical-camel-70b", [69.8, 79.2, 67.0, 69.0, 71.3, 62.2, 47.0, 53.4, 74.3], 65.9),
    ("english-suite/meditron-70b", [72.3, 82.5, 62.8, 77.8, 77.9, 62.7, 65.1, 60.7, 80.0], 71.3),
    ("english-suite/bimedix", [78.9, 86.1, 68.2, 85.0, 80.5, 74.1, 62.7, 62.8, 80.2], 75.4),
]

# One source row prints an AVG (56.5) that disagrees with the mean of its own
# printed columns (57.34): an upstream-data inconsistency, kept visible here
# as an expected failure rather than silently patched.
DISCREPANT_ROW = ("arabic-suite/bimedix-bilingual", [63.8, 57.6, 52.6, 64.0, 52.9, 50.4, 49.1, 47.3, 78.4], 56.5)


@pytest.mark.parametrize("name,columns,printed_avg", REFERENCE_ROWS, ids=[r[0] for r in REFERENCE_ROWS])
def test_criterion_07_avg_reproduction(name, columns, printed_avg):
    started = time.monotonic()
    assert len(columns) == 9
    assert row_average(columns) == pytest.approx(printed_avg, abs=0.1)
    assert time.monotonic() - started < 1.0


@pytest.mark.xfail(
    strict=True,
    reason="source row's printed AVG (56.5) is inconsistent with the mean of its printed columns (57.3)",
)
def test_criterion_07_avg_reproduction_discrepant_row():
    name, columns, printed_avg = DISCREPANT_ROW
    assert row_average(columns) == pytest.approx(printed_avg, abs=0.1)


# -- criterion 8: oracle accuracy --------------------------------------------------


def _bench_fixture(per_dataset: int, languages=("en",)) -> list[BenchmarkItem]:
    items = []
    for dataset in DATASET_COLUMNS:
        n_options = 3 if dataset == "PubMedQA" else 4
        options = ["yes", "no", "maybe"] if dataset == "PubMedQA" else [f"opt {j}" for j in range(4)]
        for language in languages:
            for i in range(per_dataset):
                items.append(
                    BenchmarkItem(
                        dataset=dataset,
                        language=language,
                        item_id=f"{dataset_file_stem(dataset)}-{i:04d}",
                        question=f"{dataset} question {i}?",
                        options=list(options),
                        gold_index=i % n_options,
                    )
                )
    return items


def _oracle_gateway(items: list[BenchmarkItem]) -> Gateway:
    by_tag = {f"eval:{i.dataset}:{i.language}:{i.item_id}": i for i in items}
    return Gateway(
        FunctionBackend(lambda req: string.ascii_uppercase[by_tag[req.request_tag].gold_index]),
        BackendConfig(),
    )


def test_criterion_08_oracle_accuracy():
    started = time.monotonic()

    items = _bench_fixture(per_dataset=8, languages=("en", "ar"))
    report = evaluate(items, _oracle_gateway(items), model_tag="gold")
    for dataset in DATASET_COLUMNS:
        for scope in ("en", "ar", "bilingual"):
            assert report.accuracy(dataset, scope) == 1.0
    assert report.avg == {"en": 1.0, "ar": 1.0, "bilingual": 1.0}

    balanced = [
        BenchmarkItem("MedQA", "en", f"b{k}", f"q{k}?", [f"opt {j}" for j in range(4)], k % 4)
        for k in range(400)
    ]
    constant = Gateway(FunctionBackend(lambda req: "A"), BackendConfig())
    assert evaluate(balanced, constant).accuracy("MedQA", "en") == 0.25

    rng = random.Random(31415)
    big = [
        BenchmarkItem("MedMCQA", "en", f"r{k}", f"q{k}?", [f"opt {j}" for j in range(4)], k % 4)
        for k in range(4000)
    ]
    uniform = Gateway(FunctionBackend(lambda req: rng.choice("ABCD")), BackendConfig())
    accuracy = evaluate(big, uniform).accuracy("MedMCQA", "en")
    assert accuracy == pytest.approx(0.25, abs=0.02)

    assert time.monotonic() - started < 30.0


# -- criterion 9: benchmark counts --------------------------------------------------


def test_criterion_09_benchmark_counts(tmp_path):
    reference_sizes = {"MedQA": 1273, "MedMCQA": 4183, "PubMedQA": 500}
    mmlu_split = {
        "MMLU_CliKG": 265, "MMLU_CBio": 144, "MMLU_CMed": 173,
        "MMLU_MedGen": 100, "MMLU_ProMed": 272, "MMLU_Ana": 135,
    }
    assert sum(mmlu_split.values()) == 1089
    assert sum(reference_sizes.values()) + 1089 == 7045

    good = tmp_path / "good"
    good.mkdir()
    for dataset, n in {**reference_sizes, **mmlu_split}.items():
        options = ["yes", "no", "maybe"] if dataset == "PubMedQA" else ["a", "b", "c", "d"]
        items = [
            BenchmarkItem(dataset, "en", f"{dataset}-{k}", f"q{k}?", list(options), k % len(options))
            for k in range(n)
        ]
        write_benchmark(good / f"{dataset_file_stem(dataset)}.en.jsonl", items)
    suite = load_suite(good, languages=("en",), strict=True)
    assert len(suite) == 7045

    # any other size must be rejected
    bad = tmp_path / "bad"
    bad.mkdir()
    items = [
        BenchmarkItem("MedQA", "en", f"x{k}", f"q{k}?", ["a", "b", "c", "d"], 0) for k in range(1272)
    ]
    write_benchmark(bad / "medqa.en.jsonl", items)
    with pytest.raises(CountMismatch) as err:
        load_suite(bad, languages=("en",), strict=True)
    assert err.value.expected == 1273 and err.value.got == 1272

    short_mmlu = tmp_path / "short_mmlu"
    short_mmlu.mkdir()
    write_benchmark(
        short_mmlu / "mmlu_ana.en.jsonl",
        [BenchmarkItem("MMLU_Ana", "en", f"a{k}", f"q{k}?", ["a", "b", "c", "d"], 0) for k in range(135)],
    )
    with pytest.raises(CountMismatch):
        load_suite(short_mmlu, languages=("en",), strict=True)


# -- criterion 10: end-to-end demo ----------------------------------------------------


def test_criterion_10_demo_end_to_end(tmp_path):
    started = time.monotonic()
    out_a = tmp_path / "run_a"
    out_b = tmp_path / "run_b"
    summary = run_demo(out_a, seed=7)
    summary_b = run_demo(out_b, seed=7)
    elapsed = time.monotonic() - started
    assert elapsed < 60.0

    assert summary["chats"] >= 50
    transcripts = [
        ChatTranscript.from_dict(obj)
        for _, obj in jsonio.read_jsonl(out_a / "artifacts" / "chats.jsonl")
    ]
    for transcript in transcripts:
        validate_turns(transcript.turns)

    assert summary["units"] >= 30
    manifest = jsonio.read_json(out_a / "artifacts" / "corpus" / "manifest.json")
    assert abs(manifest["ar_to_en_ratio"] - 0.5) <= 0.01
    assert summary["avg"] == {"en": 1.0, "ar": 1.0, "bilingual": 1.0}

    assert {k: v for k, v in summary.items() if k != "out_dir"} == {
        k: v for k, v in summary_b.items() if k != "out_dir"
    }
    comparison = filecmp.dircmp(out_a, out_b)

    def assert_identical(cmp: filecmp.dircmp) -> None:
        assert not cmp.left_only and not cmp.right_only, (cmp.left_only, cmp.right_only)
        mismatched = [
            name
            for name in cmp.common_files
            if (Path(cmp.left) / name).read_bytes() != (Path(cmp.right) / name).read_bytes()
        ]
        assert not mismatched, mismatched
        for sub in cmp.subdirs.values():
            assert_identical(sub)

    assert_identical(comparison)


# -- criterion 11: replay ---------------------------------------------------------------


def test_criterion_11_replay_reproduces_artifacts(tmp_path):
    out = tmp_path / "run"
    run_demo(out, seed=7)
    hashes_before = {
        str(p.relative_to(out)): jsonio.sha256_file(p) for p in sorted(out.rglob("*")) if p.is_file()
    }
    shutil.rmtree(out / "artifacts")
    run_demo(out, seed=7, replay=True)
    hashes_after = {
        str(p.relative_to(out)): jsonio.sha256_file(p) for p in sorted(out.rglob("*")) if p.is_file()
    }
    assert hashes_after == hashes_before
