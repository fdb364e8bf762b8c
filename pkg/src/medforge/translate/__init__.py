"""Iterative English-to-Arabic translation loop with human-review routing."""

from .types import (
    CORPUS_ELIGIBLE_STATUSES,
    STATUS_AUTO_ACCEPTED,
    STATUS_HUMAN_APPROVED,
    STATUS_HUMAN_CORRECTED,
    STATUS_NEEDS_REVIEW,
    STATUS_PENDING,
    STATUS_REJECTED,
    LoopConfig,
    QualityScore,
    RoundRecord,
    TranslationUnit,
)
from .prompts import PromptSet, parse_delimited_fields, render_fields
from .loop import (
    audit_sample,
    export_calibration_csv,
    refine,
    run_iterative,
    run_units,
    score_translation,
    translate,
)

__all__ = [
    "CORPUS_ELIGIBLE_STATUSES",
    "LoopConfig",
    "PromptSet",
    "QualityScore",
    "RoundRecord",
    "STATUS_AUTO_ACCEPTED",
    "STATUS_HUMAN_APPROVED",
    "STATUS_HUMAN_CORRECTED",
    "STATUS_NEEDS_REVIEW",
    "STATUS_PENDING",
    "STATUS_REJECTED",
    "TranslationUnit",
    "audit_sample",
    "export_calibration_csv",
    "parse_delimited_fields",
    "refine",
    "render_fields",
    "run_iterative",
    "run_units",
    "score_translation",
    "translate",
]
