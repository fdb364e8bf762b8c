"""Markdown report rendering in the nine-column benchmark layout."""

from __future__ import annotations

from .types import COLUMN_LABELS, DATASET_COLUMNS, EvalReport


def row_average(values: list[float]) -> float:
    """Equal-weight mean of a row of column accuracies (the AVG column)."""
    if not values:
        raise ValueError("cannot average an empty row")
    return sum(values) / len(values)


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.1f}"


def render_report(report: EvalReport, reference_rows: list[dict] | None = None) -> str:
    """Render accuracy rows (en / ar / bilingual as available) as a table.

    Accuracies print as percentages to one decimal. Optional reference rows
    ({"name", "values": [9 floats as percentages]}) render alongside with
    their AVG recomputed by the same aggregator.
    """
    header = ["Model"] + [COLUMN_LABELS[d] for d in DATASET_COLUMNS] + ["AVG"]
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join(["---"] * len(header)) + "|",
    ]
    for scope, label in (("en", "English"), ("ar", "Arabic"), ("bilingual", "Bilingual")):
        values = [report.accuracy(d, scope) for d in DATASET_COLUMNS]
        if all(v is None for v in values):
            continue
        pct = [None if v is None else v * 100 for v in values]
        present = [p for p in pct if p is not None]
        avg = row_average(present) if present else None
        row = [f"{report.model_tag} ({label})"] + [_fmt(p) for p in pct] + [_fmt(avg)]
        lines.append("| " + " | ".join(row) + " |")
    for ref in reference_rows or []:
        values = list(ref["values"])
        if len(values) != len(DATASET_COLUMNS):
            raise ValueError(f"reference row {ref.get('name')!r} needs {len(DATASET_COLUMNS)} values")
        row = [str(ref["name"])] + [_fmt(v) for v in values] + [_fmt(row_average(values))]
        lines.append("| " + " | ".join(row) + " |")
    meta = f"\nmode: {report.mode}; unparsed: {report.unparsed}; unscored: {report.unscored}"
    return "\n".join(lines) + meta + "\n"
