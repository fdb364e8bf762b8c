"""Corpus compiler: ingestion, conversation rendering, bilingual mixing, stats."""

from .tokens import count_tokens, register_tokenizer, tokenizer_ids
from .records import (
    KIND_CHAT,
    KIND_MCQA,
    KIND_QA,
    KINDS,
    LANG_AR,
    LANG_EN,
    ORIGINS,
    DatasetManifest,
    InstructionSample,
    SourceRecord,
)
from .ingest import ingest
from .compile import (
    compute_stats,
    mix_bilingual,
    parse_conversation,
    render_conversation,
    sample_from_json,
    sample_to_json,
)
from .tuning import default_tuning_config, emit_tuning_manifest

__all__ = [
    "DatasetManifest",
    "InstructionSample",
    "KINDS",
    "KIND_CHAT",
    "KIND_MCQA",
    "KIND_QA",
    "LANG_AR",
    "LANG_EN",
    "ORIGINS",
    "SourceRecord",
    "compute_stats",
    "count_tokens",
    "default_tuning_config",
    "emit_tuning_manifest",
    "ingest",
    "mix_bilingual",
    "parse_conversation",
    "register_tokenizer",
    "render_conversation",
    "sample_from_json",
    "sample_to_json",
    "tokenizer_ids",
]
