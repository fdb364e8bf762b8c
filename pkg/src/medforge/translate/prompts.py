"""Prompt templates and the field-aligned delimiter protocol.

Structured records (question + options + answer, or chat turns) must survive
translation with their structure intact. Each field is wrapped in a numbered
``[[Fn: name]]`` sentinel and the backend is instructed to answer with plain
``[[Fn]]`` markers; parsing back checks count and order, so misaligned
responses fail loudly instead of silently shuffling fields.
"""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path

from ..errors import AlignmentError, TemplateError
from .types import Field

_MARKER_RE = re.compile(r"\[\[F(\d+)(?::[^\]]*)?\]\]")


def _load_default(name: str) -> str:
    return resources.files("medforge.templates").joinpath(name).read_text(encoding="utf-8")


def _require_placeholders(template: str, placeholders: tuple[str, ...], name: str) -> str:
    for ph in placeholders:
        if ("{%s}" % ph) not in template:
            raise TemplateError(f"{name} template is missing the {{{ph}}} placeholder")
    return template


class PromptSet:
    """The three loop templates, either packaged defaults or user files."""

    def __init__(self, translate: str, score: str, refine: str):
        self.translate = _require_placeholders(translate, ("english",), "translate")
        self.score = _require_placeholders(score, ("english", "arabic"), "score")
        self.refine = _require_placeholders(refine, ("english", "arabic", "score"), "refine")

    @classmethod
    def default(cls) -> "PromptSet":
        return cls(
            translate=_load_default("translate.txt"),
            score=_load_default("score.txt"),
            refine=_load_default("refine.txt"),
        )

    @classmethod
    def from_dir(cls, template_dir: str | Path) -> "PromptSet":
        template_dir = Path(template_dir)

        def read(name: str) -> str:
            path = template_dir / name
            if not path.exists():
                raise TemplateError(f"template file not found: {path}")
            return path.read_text(encoding="utf-8")

        return cls(translate=read("translate.txt"), score=read("score.txt"), refine=read("refine.txt"))


def render_fields(fields: list[Field], with_names: bool = True) -> str:
    """Render fields in the numbered sentinel format sent to the backend."""
    blocks = []
    for i, (name, text) in enumerate(fields, start=1):
        marker = f"[[F{i}: {name}]]" if with_names else f"[[F{i}]]"
        blocks.append(f"{marker}\n{text}")
    return "\n".join(blocks)


def parse_delimited_fields(response: str, expected_names: list[str]) -> list[Field]:
    """Parse a marker-delimited backend response back into aligned fields.

    Raises AlignmentError when the segment count differs from the English
    field count or the markers are out of order.
    """
    matches = list(_MARKER_RE.finditer(response))
    if len(matches) != len(expected_names):
        raise AlignmentError(
            f"expected {len(expected_names)} segments, found {len(matches)}"
        )
    numbers = [int(m.group(1)) for m in matches]
    if numbers != list(range(1, len(expected_names) + 1)):
        raise AlignmentError(f"markers out of order: {numbers}")
    fields: list[Field] = []
    for idx, match in enumerate(matches):
        start = match.end()
        end = matches[idx + 1].start() if idx + 1 < len(matches) else len(response)
        text = response[start:end].strip()
        if not text:
            raise AlignmentError(f"segment {idx + 1} ({expected_names[idx]!r}) is empty")
        fields.append((expected_names[idx], text))
    return fields
