"""medforge command line: translate, chat, compile, eval, review, demo, verify.

Config precedence is flags > config file > defaults; every run prints its
resolved configuration as one JSON line on stderr and stamps the config
hash into its run manifest. Errors leave as machine-readable JSON on
stderr: exit 2 for usage/config problems, 1 for pipeline failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import jsonio
from .chat import McqaItem, load_chat_template, synthesize_chat
from .corpus import (
    compute_stats,
    default_tuning_config,
    emit_tuning_manifest,
    ingest,
    mix_bilingual,
    render_conversation,
    sample_to_json,
)
from .corpus.bridge import arabic_record_from_unit
from .corpus.records import SourceRecord
from .errors import ConfigError, MedforgeError
from .evalharness import EvalTemplates, evaluate, load_suite, render_report
from .gateway import BackendConfig, Gateway, HttpBackend, MockBackend, ReplayBackend
from .provenance import RunManifest, verify_dir
from .review import ReviewStore, create_app
from .translate import (
    LoopConfig,
    PromptSet,
    TranslationUnit,
    audit_sample,
    export_calibration_csv,
    run_units,
)


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage errors as JSON instead of plain text."""

    def error(self, message):
        print(json.dumps({"error": "config_error", "message": message}), file=sys.stderr)
        raise SystemExit(2)


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    if p.suffix == ".json":
        return jsonio.read_json(p)
    raise ConfigError(f"unsupported config format {p.suffix!r} (use .json)")


def _setting(args, cfg_file: dict, name: str, default):
    """flags > config file > default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in cfg_file:
        return cfg_file[name]
    return default


def _build_gateway(args, cfg_file: dict, log_path: Path | None) -> Gateway:
    backend_name = _setting(args, cfg_file, "backend", "mock")
    bcfg = BackendConfig(
        endpoint=_setting(args, cfg_file, "endpoint", "mock:"),
        auth_token_env_var=_setting(args, cfg_file, "auth_env", "MEDFORGE_API_TOKEN"),
        max_retries=int(_setting(args, cfg_file, "max_retries", 2)),
        min_retry_backoff_ms=int(_setting(args, cfg_file, "min_retry_backoff_ms", 50)),
        max_inflight=int(_setting(args, cfg_file, "max_inflight", 4)),
        model=_setting(args, cfg_file, "model", "default"),
    )
    if backend_name == "mock":
        script_path = _setting(args, cfg_file, "script", None)
        if not script_path:
            raise ConfigError("backend 'mock' needs --script <file.json>")
        backend = MockBackend.from_file(script_path)
    elif backend_name == "replay":
        replay_log = _setting(args, cfg_file, "replay_log", None)
        if not replay_log:
            raise ConfigError("backend 'replay' needs --replay-log <file.jsonl>")
        backend = ReplayBackend(replay_log)
        log_path = None
    elif backend_name == "http":
        if bcfg.endpoint.startswith("mock:"):
            raise ConfigError("backend 'http' needs --endpoint <url>")
        backend = HttpBackend(bcfg)
    else:
        raise ConfigError(f"unknown backend {backend_name!r} (expected mock, replay, or http)")
    return Gateway(backend, bcfg, log_path=log_path)


def _echo_config(resolved: dict) -> None:
    print(json.dumps({"resolved_config": resolved}, ensure_ascii=False), file=sys.stderr)


def _read_units(path: str | Path) -> list[TranslationUnit]:
    return [TranslationUnit.from_dict(obj) for _, obj in jsonio.read_jsonl(path)]


# --- subcommand handlers -----------------------------------------------------


def cmd_translate(args) -> int:
    cfg_file = _load_config_file(args.config)
    out_path = Path(args.out)
    out_dir = out_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    loop_cfg = LoopConfig(
        threshold=int(_setting(args, cfg_file, "threshold", 80)),
        max_rounds=int(_setting(args, cfg_file, "max_rounds", 3)),
        audit_rate=float(_setting(args, cfg_file, "audit_rate", 0.0)),
        rng_seed=int(_setting(args, cfg_file, "seed", 0)),
    )
    loop_cfg.validate()
    workers = int(_setting(args, cfg_file, "workers", 1))
    resolved = {
        "command": "translate",
        "in": str(args.infile),
        "out": str(args.out),
        "loop": loop_cfg.to_dict(),
        "workers": workers,
        "backend": _setting(args, cfg_file, "backend", "mock"),
    }
    _echo_config(resolved)
    manifest = RunManifest(out_dir, resolved)
    gateway = _build_gateway(args, cfg_file, log_path=out_dir / "replay.jsonl")
    prompts = PromptSet.from_dir(args.templates) if args.templates else PromptSet.default()

    units = _read_units(args.infile)
    units, failures = run_units(units, loop_cfg, gateway, prompts, workers=workers)
    jsonio.write_jsonl(out_path, [u.to_dict() for u in units])
    manifest.track(out_path)

    accepted = [u for u in units if u.status == "auto_accepted"]
    audit_ids = audit_sample(accepted, loop_cfg)
    audit_path = out_dir / "audit.json"
    jsonio.write_json(audit_path, {"audit_rate": loop_cfg.audit_rate, "unit_ids": audit_ids})
    manifest.track(audit_path)
    if args.calibration_csv:
        export_calibration_csv(units, args.calibration_csv)
    if (out_dir / "replay.jsonl").exists():
        manifest.track(out_dir / "replay.jsonl")
    manifest.write()

    summary = {
        "units": len(units),
        "auto_accepted": len(accepted),
        "needs_review": sum(1 for u in units if u.status == "needs_review"),
        "pending": sum(1 for u in units if u.status == "pending"),
        "audited": len(audit_ids),
        "failures": failures,
    }
    print(json.dumps(summary, ensure_ascii=False))
    return 1 if failures else 0


def cmd_chat(args) -> int:
    cfg_file = _load_config_file(args.config)
    out_path = Path(args.out)
    out_dir = out_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    max_regen = int(_setting(args, cfg_file, "max_regen", 2))
    resolved = {
        "command": "chat",
        "in": str(args.infile),
        "out": str(args.out),
        "max_regen": max_regen,
        "template": str(args.template) if args.template else "builtin",
        "backend": _setting(args, cfg_file, "backend", "mock"),
    }
    _echo_config(resolved)
    manifest = RunManifest(out_dir, resolved)
    gateway = _build_gateway(args, cfg_file, log_path=out_dir / "replay.jsonl")
    template = load_chat_template(args.template)

    items = [McqaItem.from_dict(obj) for _, obj in jsonio.read_jsonl(args.infile)]
    transcripts = []
    failures = []
    for item in items:
        try:
            transcripts.append(synthesize_chat(item, gateway, template, max_regen=max_regen))
        except MedforgeError as exc:
            failures.append({"item_id": item.item_id, "error": str(exc)})
    jsonio.write_jsonl(out_path, [t.to_dict() for t in transcripts])
    manifest.track(out_path)
    if (out_dir / "replay.jsonl").exists():
        manifest.track(out_dir / "replay.jsonl")
    manifest.write()
    print(json.dumps({"transcripts": len(transcripts), "failures": failures}, ensure_ascii=False))
    return 1 if failures else 0


def _load_en_dir(en_dir: Path) -> list[SourceRecord]:
    """Origin files named <origin>.jsonl (case-insensitive match on origin)."""
    from .corpus.records import ORIGINS

    by_stem = {o.lower(): o for o in ORIGINS}
    records: list[SourceRecord] = []
    for path in sorted(en_dir.glob("*.jsonl")):
        origin = by_stem.get(path.stem.lower())
        if origin is None:
            raise ConfigError(
                f"{path.name}: unknown origin stem {path.stem!r}; expected one of {sorted(by_stem)}"
            )
        loaded, dups = ingest(path, origin)
        if dups:
            print(json.dumps({"file": path.name, "duplicates_dropped": dups}), file=sys.stderr)
        records.extend(loaded)
    return records


def _load_ar_dir(ar_dir: Path) -> list[SourceRecord]:
    """Unit files (translate output) and/or native Arabic record files."""
    records: list[SourceRecord] = []
    for path in sorted(ar_dir.glob("*.jsonl")):
        rows = list(jsonio.read_jsonl(path))
        if not rows:
            continue
        first = rows[0][1]
        if "unit_id" in first:
            from .translate.types import CORPUS_ELIGIBLE_STATUSES

            for _, obj in rows:
                unit = TranslationUnit.from_dict(obj)
                if unit.status in CORPUS_ELIGIBLE_STATUSES:
                    records.append(arabic_record_from_unit(unit))
        else:
            for _, obj in rows:
                records.append(SourceRecord.from_dict(obj))
    return records


def _parse_ratio(text: str) -> float:
    """'1:2' (ar:en) -> 0.5; plain floats pass through."""
    if ":" in text:
        ar, en = text.split(":", 1)
        try:
            return float(ar) / float(en)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad ratio {text!r}") from exc
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"bad ratio {text!r}") from exc


def cmd_compile(args) -> int:
    cfg_file = _load_config_file(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = int(_setting(args, cfg_file, "seed", 0))
    ratio = _parse_ratio(str(_setting(args, cfg_file, "ratio", "1:2")))
    tolerance = float(_setting(args, cfg_file, "tolerance", 0.01))
    tokenizer_id = _setting(args, cfg_file, "tokenizer", "unicode-words-v1")
    resolved = {
        "command": "compile",
        "en": str(args.en),
        "ar": str(args.ar),
        "out": str(args.out),
        "seed": seed,
        "target_ratio": ratio,
        "tolerance": tolerance,
        "downsample": not args.no_downsample,
        "by_tokens": bool(args.by_tokens),
        "tokenizer_id": tokenizer_id,
    }
    _echo_config(resolved)
    manifest = RunManifest(out_dir, resolved)

    en_records = _load_en_dir(Path(args.en))
    ar_records = _load_ar_dir(Path(args.ar))
    en_samples = [render_conversation(r) for r in en_records]
    ar_samples = [render_conversation(r) for r in ar_records]
    corpus, sampling_info = mix_bilingual(
        en_samples,
        ar_samples,
        seed=seed,
        target_ratio=ratio,
        tolerance=tolerance,
        downsample=not args.no_downsample,
        by_tokens=bool(args.by_tokens),
        tokenizer_id=tokenizer_id,
    )
    corpus_path = out_dir / "corpus.jsonl"
    assistant_role = _setting(args, cfg_file, "assistant_role", "AI")
    jsonio.write_jsonl(corpus_path, [sample_to_json(s, assistant_role=assistant_role) for s in corpus])
    stats = compute_stats(
        corpus, tokenizer_id=tokenizer_id, rng_seed=seed,
        config_hash=manifest.config_hash, sampling=sampling_info,
    )
    stats_path = out_dir / "manifest.json"
    jsonio.write_json(stats_path, stats.to_dict())
    tuning_cfg = default_tuning_config()
    tuning_cfg.update(cfg_file.get("tuning", {}))
    tuning_path = out_dir / "tuning_manifest.json"
    emit_tuning_manifest(
        tuning_cfg, tuning_path,
        architecture=cfg_file.get("architecture"),
        config_hash=manifest.config_hash,
    )
    for p in (corpus_path, stats_path, tuning_path):
        manifest.track(p)
    manifest.write()
    print(
        json.dumps(
            {
                "corpus_samples": len(corpus),
                "ar_to_en_ratio": stats.ar_to_en_ratio,
                "sampling": sampling_info,
            },
            ensure_ascii=False,
        )
    )
    return 0


def cmd_eval(args) -> int:
    cfg_file = _load_config_file(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    mode = _setting(args, cfg_file, "mode", "extract")
    workers = int(_setting(args, cfg_file, "workers", 1))
    resolved = {
        "command": "eval",
        "suite": str(args.suite),
        "out": str(args.out),
        "mode": mode,
        "strict": bool(args.strict),
        "workers": workers,
        "model_tag": _setting(args, cfg_file, "model_tag", "model"),
        "backend": _setting(args, cfg_file, "backend", "mock"),
    }
    _echo_config(resolved)
    manifest = RunManifest(out_dir, resolved)
    gateway = _build_gateway(args, cfg_file, log_path=out_dir / "replay.jsonl")
    templates = EvalTemplates.from_dir(args.templates) if args.templates else EvalTemplates.default()

    items = load_suite(args.suite, strict=bool(args.strict))
    report = evaluate(
        items,
        gateway,
        model_tag=resolved["model_tag"],
        mode=mode,
        strict=bool(args.strict),
        templates=templates,
        predictions_path=out_dir / "predictions.jsonl",
        config_hash=manifest.config_hash,
        workers=workers,
    )
    jsonio.write_json(out_dir / "report.json", report.to_dict())
    jsonio.atomic_write_text(out_dir / "report.md", render_report(report))
    for name in ("predictions.jsonl", "report.json", "report.md"):
        manifest.track(out_dir / name)
    if (out_dir / "replay.jsonl").exists():
        manifest.track(out_dir / "replay.jsonl")
    manifest.write()
    print(json.dumps({"items": len(items), "avg": report.avg, "unparsed": report.unparsed}))
    return 0


def cmd_review_serve(args) -> int:
    import uvicorn

    store = ReviewStore(args.store)
    created = store.fill_queue()
    print(json.dumps({"store": str(args.store), "tasks_created": created}), file=sys.stderr)
    app = create_app(store)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_review_tasks(args) -> int:
    import httpx

    params = {k: v for k, v in (("state", args.state), ("reason", args.reason)) if v}
    resp = httpx.get(f"{args.url.rstrip('/')}/tasks", params=params, timeout=10.0)
    resp.raise_for_status()
    print(json.dumps(resp.json(), ensure_ascii=False, indent=2))
    return 0


def cmd_review_stats(args) -> int:
    import httpx

    resp = httpx.get(f"{args.url.rstrip('/')}/stats", timeout=10.0)
    resp.raise_for_status()
    print(json.dumps(resp.json(), ensure_ascii=False, indent=2))
    return 0


def cmd_demo(args) -> int:
    from .demo import run_demo

    summary = run_demo(args.out, seed=args.seed, replay=bool(args.replay))
    print(json.dumps(summary, ensure_ascii=False))
    return 0


def cmd_verify(args) -> int:
    problems = verify_dir(args.dir)
    if problems:
        print(json.dumps({"ok": False, "problems": problems}, ensure_ascii=False))
        return 1
    print(json.dumps({"ok": True}))
    return 0


# --- wiring -------------------------------------------------------------------


def _add_backend_flags(parser: _Parser) -> None:
    parser.add_argument("--backend", choices=["mock", "replay", "http"], default=None)
    parser.add_argument("--script", default=None, help="mock script JSON (backend=mock)")
    parser.add_argument("--replay-log", dest="replay_log", default=None, help="replay log (backend=replay)")
    parser.add_argument("--endpoint", default=None, help="chat-completion URL (backend=http)")
    parser.add_argument("--auth-env", dest="auth_env", default=None, help="env var holding the bearer token")
    parser.add_argument("--model", default=None)
    parser.add_argument("--max-retries", dest="max_retries", type=int, default=None)
    parser.add_argument("--max-inflight", dest="max_inflight", type=int, default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="medforge", description="Bilingual medical corpus forge and eval toolkit")
    parser.add_argument("--config", default=None, help="JSON config file (flags win)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("translate", help="run the iterative translation loop over units")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threshold", type=int, default=None)
    p.add_argument("--max-rounds", dest="max_rounds", type=int, default=None)
    p.add_argument("--audit-rate", dest="audit_rate", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--templates", default=None, help="dir with translate/score/refine templates")
    p.add_argument("--calibration-csv", dest="calibration_csv", default=None)
    p.add_argument("--workers", type=int, default=None, help="parallel units (gateway still bounds admission)")
    _add_backend_flags(p)
    p.set_defaults(handler=cmd_translate)

    p = sub.add_parser("chat", help="synthesize grounded multi-turn chats from MCQA items")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--template", default=None)
    p.add_argument("--max-regen", dest="max_regen", type=int, default=None)
    _add_backend_flags(p)
    p.set_defaults(handler=cmd_chat)

    p = sub.add_parser("compile", help="assemble the bilingual instruction corpus")
    p.add_argument("--en", required=True, help="dir of <origin>.jsonl source files")
    p.add_argument("--ar", required=True, help="dir of translated unit files or Arabic record files")
    p.add_argument("--ratio", default=None, help="target ar:en ratio, e.g. 1:2")
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--no-downsample", action="store_true")
    p.add_argument("--by-tokens", dest="by_tokens", action="store_true")
    p.add_argument("--tokenizer", default=None)
    p.add_argument("--assistant-role", dest="assistant_role", choices=["AI", "gpt"], default=None,
                   help="assistant label in emitted conversations")
    p.set_defaults(handler=cmd_compile)

    p = sub.add_parser("eval", help="evaluate a benchmark suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["extract", "logprob"], default=None)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--model-tag", dest="model_tag", default=None)
    p.add_argument("--templates", default=None)
    p.add_argument("--workers", type=int, default=None)
    _add_backend_flags(p)
    p.set_defaults(handler=cmd_eval)

    review = sub.add_parser("review", help="review-queue service and clients")
    review_sub = review.add_subparsers(dest="review_command", required=True)
    p = review_sub.add_parser("serve", help="serve the review HTTP API")
    p.add_argument("--store", required=True)
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(handler=cmd_review_serve)
    p = review_sub.add_parser("tasks", help="list tasks from a running service")
    p.add_argument("--url", default="http://127.0.0.1:8080")
    p.add_argument("--state", default=None)
    p.add_argument("--reason", default=None)
    p.set_defaults(handler=cmd_review_tasks)
    p = review_sub.add_parser("stats", help="queue stats from a running service")
    p.add_argument("--url", default="http://127.0.0.1:8080")
    p.set_defaults(handler=cmd_review_stats)

    p = sub.add_parser("demo", help="full offline pipeline against the scripted mock")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--replay", action="store_true", help="re-execute from the existing replay log")
    p.set_defaults(handler=cmd_demo)

    p = sub.add_parser("verify", help="recompute and check a run's artifact hashes")
    p.add_argument("dir")
    p.set_defaults(handler=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(json.dumps(exc.to_json_obj(), ensure_ascii=False), file=sys.stderr)
        return 2
    except MedforgeError as exc:
        print(json.dumps(exc.to_json_obj(), ensure_ascii=False), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
