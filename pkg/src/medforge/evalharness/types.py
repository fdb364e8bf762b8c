"""Benchmark item shapes and the nine-column report layout."""

from __future__ import annotations

from dataclasses import dataclass, field

# Column order used in every rendered report.
DATASET_COLUMNS = (
    "MMLU_CliKG",
    "MMLU_CBio",
    "MMLU_CMed",
    "MMLU_MedGen",
    "MMLU_ProMed",
    "MMLU_Ana",
    "MedMCQA",
    "MedQA",
    "PubMedQA",
)

MMLU_DATASETS = tuple(d for d in DATASET_COLUMNS if d.startswith("MMLU_"))

COLUMN_LABELS = {
    "MMLU_CliKG": "Cli-KG",
    "MMLU_CBio": "C-Bio",
    "MMLU_CMed": "C-Med",
    "MMLU_MedGen": "Med-Gen",
    "MMLU_ProMed": "Pro-Med",
    "MMLU_Ana": "Ana",
    "MedMCQA": "MedMCQA",
    "MedQA": "MedQA",
    "PubMedQA": "PubmedQA",
}

_FILE_STEMS = {d: d.lower() for d in DATASET_COLUMNS}

# Strict-mode suite sizes; the MMLU subsets are checked as a family total.
EXPECTED_COUNTS = {"MedQA": 1273, "MedMCQA": 4183, "PubMedQA": 500}
MMLU_EXPECTED_TOTAL = 1089

PUBMEDQA_OPTIONS = ("yes", "no", "maybe")

LANGS = ("en", "ar")


def dataset_file_stem(dataset: str) -> str:
    return _FILE_STEMS[dataset]


@dataclass
class BenchmarkItem:
    dataset: str
    language: str
    item_id: str
    question: str
    options: list[str]
    gold_index: int
    context: str | None = None

    def validate(self) -> None:
        if self.dataset not in DATASET_COLUMNS:
            raise ValueError(f"unknown dataset {self.dataset!r}")
        if self.language not in LANGS:
            raise ValueError(f"unknown language {self.language!r}")
        if self.dataset == "PubMedQA":
            if len(self.options) != 3:
                raise ValueError(f"PubMedQA items take exactly 3 options, got {len(self.options)}")
        elif len(self.options) != 4:
            raise ValueError(f"{self.dataset} items take exactly 4 options, got {len(self.options)}")
        if not 0 <= self.gold_index < len(self.options):
            raise ValueError(f"gold_index {self.gold_index} out of range")
        if not self.question.strip():
            raise ValueError("question must be non-empty")

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "question": self.question,
            "context": self.context,
            "options": self.options,
            "gold_index": self.gold_index,
        }


@dataclass
class EvalReport:
    """Per-column accuracies plus equal-weight averages.

    columns[dataset][scope] with scope in {en, ar, bilingual} carries
    {correct, scored, total, accuracy}; avg[scope] is the arithmetic mean
    of that scope's column accuracies (the nine-column AVG when the full
    suite is present).
    """

    model_tag: str
    mode: str
    columns: dict
    avg: dict
    unparsed: int = 0
    unscored: int = 0
    config_hash: str = ""
    latency_ms_total: int = 0
    shots: int = 0

    def to_dict(self) -> dict:
        return {
            "model_tag": self.model_tag,
            "mode": self.mode,
            "shots": self.shots,
            "columns": self.columns,
            "avg": self.avg,
            "unparsed": self.unparsed,
            "unscored": self.unscored,
            "latency_ms_total": self.latency_ms_total,
            "config_hash": self.config_hash,
        }

    def accuracy(self, dataset: str, scope: str) -> float | None:
        cell = self.columns.get(dataset, {}).get(scope)
        return None if cell is None else cell["accuracy"]
