"""Bilingual MCQA evaluation: loaders, querying, accuracy aggregation, reports."""

from .types import (
    COLUMN_LABELS,
    DATASET_COLUMNS,
    EXPECTED_COUNTS,
    MMLU_DATASETS,
    MMLU_EXPECTED_TOTAL,
    BenchmarkItem,
    EvalReport,
    dataset_file_stem,
)
from .loader import load_benchmark, load_suite
from .runner import EvalTemplates, evaluate, extract_answer, format_mcqa_prompt
from .report import render_report, row_average

__all__ = [
    "BenchmarkItem",
    "COLUMN_LABELS",
    "DATASET_COLUMNS",
    "EXPECTED_COUNTS",
    "EvalReport",
    "EvalTemplates",
    "MMLU_DATASETS",
    "MMLU_EXPECTED_TOTAL",
    "dataset_file_stem",
    "evaluate",
    "extract_answer",
    "format_mcqa_prompt",
    "load_benchmark",
    "load_suite",
    "render_report",
    "row_average",
]
