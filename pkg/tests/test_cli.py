"""CLI wiring: subcommands, exit codes, provenance verification."""

from __future__ import annotations

import json

import pytest

from medforge import jsonio
from medforge.chat import McqaItem
from medforge.cli import main
from medforge.corpus import SourceRecord
from medforge.corpus.bridge import unit_from_record
from medforge.translate import TranslationUnit


def mcqa_item(i: int) -> McqaItem:
    return McqaItem(
        item_id=f"it{i}",
        question=f"Question number {i}?",
        options=[("A", "alpha"), ("B", "beta"), ("C", "gamma"), ("D", "delta")],
        gold_label="B",
        source_dataset="MedMCQA",
    )


def unit_for(i: int) -> TranslationUnit:
    record = SourceRecord(
        record_id=f"rec{i}", kind="MCQA", language="en", payload=mcqa_item(i), origin="MedMCQA"
    )
    return unit_from_record(record)


def loop_script_for(unit: TranslationUnit, scores: list[int]) -> dict:
    n = len(unit.english_fields)

    def seg(tagmark: str) -> str:
        return "\n".join(f"[[F{k}]]\nنص عربي {tagmark} {k}" for k in range(1, n + 1))

    script = {
        f"translate:{unit.unit_id}": [seg("t")],
        f"score:{unit.unit_id}:r1": [f"Score: {scores[0]}"],
    }
    for r, s in enumerate(scores[1:], start=2):
        script[f"refine:{unit.unit_id}:r{r}"] = [seg(f"r{r}")]
        script[f"score:{unit.unit_id}:r{r}"] = [f"Score: {s}"]
    return script


class TestTranslateCommand:
    def test_translate_roundtrip_and_verify(self, tmp_path, capsys):
        units = [unit_for(0), unit_for(1)]
        infile = tmp_path / "units_in.jsonl"
        jsonio.write_jsonl(infile, [u.to_dict() for u in units])
        script = {}
        script.update(loop_script_for(units[0], [90]))
        script.update(loop_script_for(units[1], [60, 85]))
        script_path = tmp_path / "script.json"
        jsonio.write_json(script_path, script)
        out = tmp_path / "run" / "units_out.jsonl"

        code = main(
            [
                "translate",
                "--in", str(infile),
                "--out", str(out),
                "--threshold", "80",
                "--max-rounds", "3",
                "--audit-rate", "0.5",
                "--seed", "11",
                "--backend", "mock",
                "--script", str(script_path),
            ]
        )
        assert code == 0
        summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert summary["auto_accepted"] == 2
        loaded = [TranslationUnit.from_dict(obj) for _, obj in jsonio.read_jsonl(out)]
        assert {u.status for u in loaded} == {"auto_accepted"}
        assert main(["verify", str(tmp_path / "run")]) == 0

    def test_unknown_flag_exits_2(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["translate", "--in", "x", "--out", "y", "--bogus-flag"])
        assert exc.value.code == 2
        err = capsys.readouterr().err
        assert json.loads(err.strip().splitlines()[-1])["error"] == "config_error"

    def test_missing_script_for_mock_backend(self, tmp_path, capsys):
        infile = tmp_path / "units.jsonl"
        jsonio.write_jsonl(infile, [unit_for(0).to_dict()])
        code = main(["translate", "--in", str(infile), "--out", str(tmp_path / "o.jsonl")])
        assert code == 2


class TestChatCommand:
    def test_chat_outputs_transcripts(self, tmp_path, capsys):
        items = [mcqa_item(0), mcqa_item(1)]
        infile = tmp_path / "mcqa.jsonl"
        jsonio.write_jsonl(infile, [i.to_dict() for i in items])
        script = {
            f"chat:{i.item_id}:a1": ["Patient: I feel unwell.\nDoctor: Tell me more.\nPatient: It started yesterday.\nDoctor: Rest and hydrate.\n[END]"]
            for i in items
        }
        script_path = tmp_path / "script.json"
        jsonio.write_json(script_path, script)
        out = tmp_path / "chat" / "transcripts.jsonl"
        code = main(
            ["chat", "--in", str(infile), "--out", str(out), "--backend", "mock", "--script", str(script_path)]
        )
        assert code == 0
        rows = [obj for _, obj in jsonio.read_jsonl(out)]
        assert len(rows) == 2
        assert all(len(r["turns"]) == 4 for r in rows)


class TestCompileCommand:
    def test_compile_from_dirs(self, tmp_path, capsys):
        en_dir = tmp_path / "en"
        ar_dir = tmp_path / "ar"
        en_dir.mkdir()
        ar_dir.mkdir()
        jsonio.write_jsonl(
            en_dir / "medmcqa.jsonl",
            [
                {"question": f"q{i}", "opa": "a", "opb": "b", "opc": "c", "opd": "d", "cop": 1}
                for i in range(8)
            ],
        )
        # translated counterparts: accepted units carrying Arabic fields
        units = []
        for i in range(4):
            unit = unit_for(i)
            unit.rounds = []
            unit.arabic_fields = [(name, f"عربي {name}") for name, _ in unit.english_fields]
            from medforge.translate import QualityScore, RoundRecord

            unit.rounds.append(RoundRecord(1, unit.arabic_fields, QualityScore(90)))
            unit.status = "auto_accepted"
            units.append(unit)
        jsonio.write_jsonl(ar_dir / "units.jsonl", [u.to_dict() for u in units])

        out_dir = tmp_path / "corpus"
        code = main(
            ["compile", "--en", str(en_dir), "--ar", str(ar_dir), "--ratio", "1:2", "--seed", "3", "--out", str(out_dir)]
        )
        assert code == 0
        manifest = jsonio.read_json(out_dir / "manifest.json")
        assert manifest["ar_to_en_ratio"] == 0.5
        tuning = jsonio.read_json(out_dir / "tuning_manifest.json")
        assert tuning["adapter_rank"] == 128
        assert main(["verify", str(out_dir)]) == 0


class TestEvalCommand:
    def test_eval_strict_count_mismatch_exits_1(self, tmp_path, capsys):
        from medforge.evalharness import BenchmarkItem
        from medforge.evalharness.loader import write_benchmark

        suite = tmp_path / "suite"
        suite.mkdir()
        items = [
            BenchmarkItem("MedQA", "en", f"i{k}", f"q{k}?", ["w", "x", "y", "z"], 0)
            for k in range(10)
        ]
        write_benchmark(suite / "medqa.en.jsonl", items)
        script = {f"eval:MedQA:en:i{k}": ["A"] for k in range(10)}
        script_path = tmp_path / "script.json"
        jsonio.write_json(script_path, script)

        code = main(
            ["eval", "--suite", str(suite), "--out", str(tmp_path / "ev"), "--strict",
             "--backend", "mock", "--script", str(script_path)]
        )
        assert code == 1
        err = capsys.readouterr().err
        assert "count_mismatch" in err

        code = main(
            ["eval", "--suite", str(suite), "--out", str(tmp_path / "ev"),
             "--backend", "mock", "--script", str(script_path)]
        )
        assert code == 0
        report = jsonio.read_json(tmp_path / "ev" / "report.json")
        assert report["avg"]["en"] == 1.0


class TestDemoCommand:
    def test_demo_and_verify(self, tmp_path, capsys):
        out = tmp_path / "demo"
        assert main(["demo", "--out", str(out), "--seed", "7"]) == 0
        summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert summary["chats"] >= 50
        assert summary["units"] >= 30
        assert summary["avg"] == {"en": 1.0, "ar": 1.0, "bilingual": 1.0}
        assert main(["verify", str(out)]) == 0

    def test_verify_detects_tampering(self, tmp_path, capsys):
        out = tmp_path / "demo"
        main(["demo", "--out", str(out), "--seed", "7"])
        capsys.readouterr()
        corpus = out / "artifacts" / "corpus" / "corpus.jsonl"
        corpus.write_text(corpus.read_text(encoding="utf-8") + "\n", encoding="utf-8")
        assert main(["verify", str(out)]) == 1
