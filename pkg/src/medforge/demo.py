"""Offline end-to-end pipeline run against a fully scripted backend.

The demo forges chats, drives translation units through the scoring loop,
compiles a ratio-conformant bilingual corpus, and evaluates a gold-oracle
benchmark suite, writing every artifact plus the replay log and a hash
manifest. Two runs with the same seed are byte-identical, and a replay run
(artifacts deleted, backend gone) rebuilds everything from the log alone.
"""

from __future__ import annotations

import hashlib
import random
from pathlib import Path

from . import jsonio
from .chat import McqaItem, synthesize_chat
from .corpus import (
    SourceRecord,
    compute_stats,
    default_tuning_config,
    emit_tuning_manifest,
    mix_bilingual,
    render_conversation,
    sample_to_json,
)
from .corpus.bridge import arabic_record_from_unit, unit_from_record
from .evalharness import BenchmarkItem, DATASET_COLUMNS, dataset_file_stem, evaluate, load_suite, render_report
from .evalharness.loader import write_benchmark
from .gateway import BackendConfig, Gateway, MockBackend, ReplayBackend
from .provenance import RunManifest
from .review import ReviewStore
from .translate import LoopConfig, audit_sample, export_calibration_csv, run_units

REPLAY_LOG_NAME = "replay.jsonl"
ARTIFACTS_DIR = "artifacts"

_CONDITIONS = [
    ("migraine", "throbbing headache worsened by light", "sumatriptan", "ibuprofen overuse", "daily caffeine", "warm compresses"),
    ("type 2 diabetes", "increased thirst and frequent urination", "metformin", "insulin detemir first-line", "sulfonylurea monotherapy", "watchful waiting"),
    ("iron deficiency anemia", "fatigue and pallor", "oral ferrous sulfate", "vitamin B12 injections", "folate supplementation", "erythropoietin"),
    ("community acquired pneumonia", "productive cough and fever", "amoxicillin", "oseltamivir", "inhaled salbutamol", "oral dexamethasone"),
    ("hypertension", "persistently elevated blood pressure readings", "lisinopril", "loop diuretic first-line", "alpha blocker first-line", "salt tablets"),
    ("asthma", "episodic wheeze and night cough", "inhaled corticosteroid", "long-acting beta agonist alone", "oral antibiotics", "antihistamines"),
    ("GERD", "burning chest pain after meals", "proton pump inhibitor", "calcium channel blocker", "nitrates", "opioid analgesia"),
    ("urinary tract infection", "dysuria and frequency", "nitrofurantoin", "topical antifungal", "oral acyclovir", "loperamide"),
    ("hypothyroidism", "weight gain and cold intolerance", "levothyroxine", "methimazole", "radioiodine ablation", "propranolol alone"),
    ("gout", "acute painful swollen first toe", "colchicine", "allopurinol during the acute flare", "ice and fasting", "penicillin"),
    ("depression", "low mood and anhedonia for six weeks", "an SSRI", "benzodiazepine monotherapy", "stimulant therapy", "no treatment"),
    ("osteoarthritis", "knee pain worse with activity", "topical NSAIDs", "systemic steroids", "bed rest", "joint immobilization"),
]

_AR_SENTENCES = [
    "يعاني المريض من صداع نابض يزداد مع الضوء",
    "يشكو المريض من عطش متزايد وكثرة التبول",
    "تعاني المريضة من تعب عام وشحوب في الوجه",
    "يعاني المريض من سعال منتج وحمى منذ ثلاثة أيام",
    "قراءات ضغط الدم مرتفعة باستمرار لدى المريض",
    "يعاني المريض من أزيز متكرر وسعال ليلي",
    "يشكو المريض من حرقة في الصدر بعد الوجبات",
    "تشكو المريضة من حرقة أثناء التبول مع كثرة التبول",
    "تعاني المريضة من زيادة الوزن وعدم تحمل البرد",
    "يعاني المريض من ألم حاد وتورم في إصبع القدم الكبير",
    "يعاني المريض من مزاج منخفض وفقدان المتعة منذ ستة أسابيع",
    "يشكو المريض من ألم في الركبة يزداد مع الحركة",
]


def arabic_of(text: str) -> str:
    """Deterministic pseudo-translation used for scripting the mock backend."""
    index = int(hashlib.sha256(text.encode("utf-8")).hexdigest(), 16) % len(_AR_SENTENCES)
    return f"{_AR_SENTENCES[index]} [{text[:48]}]"


def _segments(texts: list[str]) -> str:
    return "\n".join(f"[[F{i}]]\n{text}" for i, text in enumerate(texts, start=1))


class DemoFixtures:
    """Deterministic synthetic inputs plus the mock script that serves them."""

    def __init__(self, seed: int, n_mcqa: int = 60, n_qa: int = 20, n_units: int = 36, bench_per_dataset: int = 12):
        self.seed = seed
        self.n_mcqa = n_mcqa
        self.n_qa = n_qa
        self.n_units = min(n_units, n_mcqa)
        self.bench_per_dataset = bench_per_dataset
        rng = random.Random(seed)
        self.mcqa_records = [self._mcqa_record(i, rng) for i in range(n_mcqa)]
        self.qa_records = [self._qa_record(i) for i in range(n_qa)]
        self.units = [unit_from_record(r) for r in self.mcqa_records[: self.n_units]]
        self.bench_items = self._bench_items()

    def _mcqa_record(self, i: int, rng: random.Random) -> SourceRecord:
        condition, symptom, best, *wrong = _CONDITIONS[i % len(_CONDITIONS)]
        age = 25 + (i * 7) % 50
        question = (
            f"A {age}-year-old patient presents with {symptom}. "
            f"Which management is most appropriate for suspected {condition}?"
        )
        texts = [best] + wrong
        rng.shuffle(texts)
        labels = ["A", "B", "C", "D"]
        options = list(zip(labels, texts))
        gold_label = labels[texts.index(best)]
        record_id = f"mcqa-{i:04d}"
        return SourceRecord(
            record_id=record_id,
            kind="MCQA",
            language="en",
            payload=McqaItem(
                item_id=record_id,
                question=question,
                options=options,
                gold_label=gold_label,
                source_dataset="MedMCQA",
            ),
            origin="MedMCQA",
        )

    def _qa_record(self, i: int) -> SourceRecord:
        condition, symptom, best, *_ = _CONDITIONS[i % len(_CONDITIONS)]
        return SourceRecord(
            record_id=f"qa-{i:04d}",
            kind="QA",
            language="en",
            payload={
                "question": f"I have {symptom}. What usually helps with {condition}?",
                "answer": f"First-line management of {condition} typically involves {best}; "
                f"see a clinician to confirm the diagnosis.",
            },
            origin="iCliniq",
        )

    def _bench_items(self) -> list[BenchmarkItem]:
        items = []
        for dataset in DATASET_COLUMNS:
            n_options = 3 if dataset == "PubMedQA" else 4
            stem = dataset_file_stem(dataset)
            for i in range(self.bench_per_dataset):
                condition, symptom, best, *wrong = _CONDITIONS[i % len(_CONDITIONS)]
                item_id = f"{stem}-{i:03d}"
                if dataset == "PubMedQA":
                    options = ["yes", "no", "maybe"]
                    en_question = f"Does early treatment with {best} improve outcomes in {condition}?"
                    context = f"A cohort with {symptom} was followed for twelve months."
                else:
                    options = [best] + wrong
                    en_question = f"Preferred management for {condition} presenting with {symptom}?"
                    context = None
                gold_index = i % n_options if dataset == "PubMedQA" else 0
                for language in ("en", "ar"):
                    question = en_question if language == "en" else arabic_of(en_question)
                    items.append(
                        BenchmarkItem(
                            dataset=dataset,
                            language=language,
                            item_id=item_id,
                            question=question,
                            options=list(options),
                            gold_index=gold_index,
                            context=context if language == "en" or context is None else arabic_of(context),
                        )
                    )
        return items

    # -- scripting -----------------------------------------------------------

    def unit_scores(self, index: int) -> list[int]:
        if index % 9 == 0:
            return [55, 65, 70]  # stalls below threshold -> needs_review
        if index % 5 == 0:
            return [62, 84]  # one refinement then accepted
        return [88]  # first-round accept

    def _dialogue(self, record: SourceRecord, rng: random.Random) -> str:
        item = record.payload
        condition, symptom, best, *_ = _CONDITIONS[
            int(record.record_id.split("-")[1]) % len(_CONDITIONS)
        ]
        days = rng.randint(2, 14)
        lines = [
            f"Patient: I have had {symptom} for about {days} days. Should I be worried?",
            f"Doctor: Possibly. Have you noticed anything that makes it better or worse?",
            f"Patient: It gets worse in the evening, and rest only helps a little.",
            f"Doctor: That picture fits {condition}. The appropriate next step is {best}.",
        ]
        if rng.random() < 0.4:
            lines.extend(
                [
                    "Patient: Is there anything I should avoid in the meantime?",
                    f"Doctor: Avoid self-medicating; {item.gold_text()} is what I recommend, and follow up in two weeks.",
                ]
            )
        lines.append("[END]")
        return "\n".join(lines)

    def build_script(self) -> dict[str, list]:
        rng = random.Random(self.seed + 1)
        script: dict[str, list] = {}
        # chat stage: every ninth item needs a second attempt
        for i, record in enumerate(self.mcqa_records):
            item_id = record.payload.item_id
            text = self._dialogue(record, rng)
            if i % 9 == 4:
                script[f"chat:{item_id}:a1"] = ["Doctor: I will start, which is invalid.\nPatient: oops"]
                script[f"chat:{item_id}:a2"] = [text]
            else:
                script[f"chat:{item_id}:a1"] = [text]
        # translate stage
        for index, unit in enumerate(self.units):
            scores = self.unit_scores(index)
            names = [name for name, _ in unit.english_fields]
            texts = [text for _, text in unit.english_fields]
            arabic_r1 = [arabic_of(t) for t in texts]
            translate_entries: list = [_segments(arabic_r1)]
            if index % 7 == 3:
                # one transient flake to exercise the retry loop end to end
                translate_entries.insert(0, {"error": "scripted transient failure"})
            script[f"translate:{unit.unit_id}"] = translate_entries
            script[f"score:{unit.unit_id}:r1"] = [f"Score: {scores[0]}. Automated rubric."]
            previous = arabic_r1
            for r, score in enumerate(scores[1:], start=2):
                revised = [f"{t} — مراجعة {r}" for t in previous]
                script[f"refine:{unit.unit_id}:r{r}"] = [_segments(revised)]
                script[f"score:{unit.unit_id}:r{r}"] = [f"Score: {score}. After revision {r}."]
                previous = revised
        # eval stage: gold oracle
        for item in self.bench_items:
            letter = "ABCDE"[item.gold_index]
            script[f"eval:{item.dataset}:{item.language}:{item.item_id}"] = [letter]
        return script


def run_demo(out_dir: str | Path, seed: int = 7, replay: bool = False) -> dict:
    """Execute the full pipeline; returns a summary of what was produced."""
    out_dir = Path(out_dir)
    artifacts = out_dir / ARTIFACTS_DIR
    artifacts.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / REPLAY_LOG_NAME

    fixtures = DemoFixtures(seed)
    loop_cfg = LoopConfig(threshold=80, max_rounds=3, audit_rate=0.1, rng_seed=seed)
    resolved_config = {
        "pipeline": "demo",
        "seed": seed,
        "n_mcqa": fixtures.n_mcqa,
        "n_qa": fixtures.n_qa,
        "n_units": fixtures.n_units,
        "bench_per_dataset": fixtures.bench_per_dataset,
        "loop": loop_cfg.to_dict(),
        "corpus": {"target_ratio": 0.5, "tolerance": 0.01, "tokenizer_id": "unicode-words-v1"},
    }
    manifest = RunManifest(out_dir, resolved_config)

    if replay:
        if not log_path.exists():
            raise FileNotFoundError(f"replay log not found: {log_path}")
        backend = ReplayBackend(log_path)
        gateway = Gateway(backend, BackendConfig(max_retries=1, min_retry_backoff_ms=1), log_path=None)
    else:
        if log_path.exists():
            log_path.unlink()
        backend = MockBackend(fixtures.build_script())
        gateway = Gateway(backend, BackendConfig(max_retries=1, min_retry_backoff_ms=1), log_path=log_path)

    # --- stage 1: chat forging ---------------------------------------------
    transcripts = [
        synthesize_chat(record.payload, gateway, max_regen=2) for record in fixtures.mcqa_records
    ]
    chats_path = artifacts / "chats.jsonl"
    jsonio.write_jsonl(chats_path, [t.to_dict() for t in transcripts])

    # --- stage 2: translation loop -------------------------------------------
    units, failures = run_units(fixtures.units, loop_cfg, gateway)
    if failures:
        raise RuntimeError(f"demo translation failures: {failures}")
    units_path = artifacts / "units.jsonl"
    jsonio.write_jsonl(units_path, [u.to_dict() for u in units])
    accepted = [u for u in units if u.status == "auto_accepted"]
    audit_ids = audit_sample(accepted, loop_cfg)
    audit_path = artifacts / "audit.json"
    jsonio.write_json(audit_path, {"audit_rate": loop_cfg.audit_rate, "unit_ids": audit_ids})
    calibration_path = artifacts / "calibration.csv"
    export_calibration_csv(units, calibration_path)
    store = ReviewStore.initialize(
        artifacts / "review_store", units, audit_unit_ids=audit_ids, clock=lambda: 0.0
    )

    # --- stage 3: corpus compilation ----------------------------------------
    chat_records = [
        SourceRecord(
            record_id=f"chat-{t.grounding_id}",
            kind="Chat",
            language="en",
            payload=t,
            origin="synthesized",
            source_id=t.grounding_id,
        )
        for t in transcripts
    ]
    en_samples = [
        render_conversation(r) for r in fixtures.mcqa_records + fixtures.qa_records + chat_records
    ]
    ar_samples = [
        render_conversation(arabic_record_from_unit(u)) for u in store.corpus_eligible_units()
    ]
    corpus, sampling_info = mix_bilingual(
        en_samples, ar_samples, seed=seed, target_ratio=0.5, tolerance=0.01
    )
    corpus_dir = artifacts / "corpus"
    corpus_path = corpus_dir / "corpus.jsonl"
    jsonio.write_jsonl(corpus_path, [sample_to_json(s) for s in corpus])
    stats = compute_stats(
        corpus, rng_seed=seed, config_hash=manifest.config_hash, sampling=sampling_info
    )
    manifest_path = corpus_dir / "manifest.json"
    jsonio.write_json(manifest_path, stats.to_dict())
    tuning_path = corpus_dir / "tuning_manifest.json"
    emit_tuning_manifest(default_tuning_config(), tuning_path, config_hash=manifest.config_hash)

    # --- stage 4: evaluation --------------------------------------------------
    bench_dir = artifacts / "bench"
    bench_dir.mkdir(parents=True, exist_ok=True)
    by_file: dict[str, list[BenchmarkItem]] = {}
    for item in fixtures.bench_items:
        by_file.setdefault(f"{dataset_file_stem(item.dataset)}.{item.language}.jsonl", []).append(item)
    for name, items in sorted(by_file.items()):
        write_benchmark(bench_dir / name, items)
    suite = load_suite(bench_dir, strict=False)
    eval_dir = artifacts / "eval"
    report = evaluate(
        suite,
        gateway,
        model_tag="demo-gold-oracle",
        mode="extract",
        predictions_path=eval_dir / "predictions.jsonl",
        config_hash=manifest.config_hash,
    )
    jsonio.write_json(eval_dir / "report.json", report.to_dict())
    jsonio.atomic_write_text(eval_dir / "report.md", render_report(report))

    # --- provenance -----------------------------------------------------------
    for path in sorted(artifacts.rglob("*")):
        if path.is_file():
            manifest.track(path)
    if log_path.exists():
        manifest.track(log_path)
    manifest.write()

    return {
        "out_dir": str(out_dir),
        "chats": len(transcripts),
        "units": len(units),
        "accepted": len(accepted),
        "needs_review": sum(1 for u in units if u.status == "needs_review"),
        "audited": len(audit_ids),
        "corpus_samples": len(corpus),
        "ar_to_en_ratio": stats.ar_to_en_ratio,
        "eval_items": len(suite),
        "avg": report.avg,
        "config_hash": manifest.config_hash,
    }
