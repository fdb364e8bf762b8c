"""Chat synthesis: prompt building, transcript parsing, validated regeneration.

The whole dialogue is generated in one completion (both voices), then parsed
against strict structural rules: patient speaks first, speakers alternate,
doctor closes, no empty turns, at most DEFAULT_MAX_TURNS messages. Invalid
transcripts are regenerated from scratch rather than repaired.
"""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path

from ..corpus.tokens import count_tokens
from ..errors import (
    EmptyTurnError,
    NoMarkersError,
    RoleOrderError,
    SynthesisExhausted,
    TemplateError,
)
from ..gateway import ChatMessage, CompletionRequest, Gateway
from .types import ChatTranscript, McqaItem

SPEAKER_PATIENT = "patient"
SPEAKER_DOCTOR = "doctor"
TERMINAL_MARKER = "[END]"
DEFAULT_MAX_TURNS = 12

_MARKER_RE = re.compile(r"^(Patient|Doctor)\s*:\s*(.*)$")
_REQUIRED_PLACEHOLDERS = ("question", "options", "gold_answer")


def load_chat_template(path: str | Path | None = None) -> str:
    if path is None:
        template = resources.files("medforge.templates").joinpath("chat.txt").read_text(encoding="utf-8")
    else:
        template = Path(path).read_text(encoding="utf-8")
    for ph in _REQUIRED_PLACEHOLDERS:
        if ("{%s}" % ph) not in template:
            raise TemplateError(f"chat template is missing the {{{ph}}} placeholder")
    return template


def build_chat_prompt(item: McqaItem, template: str, tag: str = "") -> CompletionRequest:
    """Render the dialogue-generation prompt for one MCQA item.

    Deterministic for a fixed (item, template) pair. The prompt carries
    every option text and a single gold-answer line.
    """
    item.validate()
    for ph in _REQUIRED_PLACEHOLDERS:
        if ("{%s}" % ph) not in template:
            raise TemplateError(f"chat template is missing the {{{ph}}} placeholder")
    options_block = "\n".join(f"{label}. {text}" for label, text in item.options)
    gold_line = f"Correct answer: {item.gold_label}"
    prompt = template.format(question=item.question, options=options_block, gold_answer=gold_line)
    if item.context:
        prompt = f"Background context:\n{item.context}\n\n{prompt}"
    return CompletionRequest(
        messages=[ChatMessage("user", prompt)],
        max_output_tokens=2048,
        temperature=0.0,
        request_tag=tag or f"chat:{item.item_id}",
    )


def parse_transcript(raw: str) -> list[tuple[str, str]]:
    """Split a raw completion into (speaker, text) turns.

    Speaker markers are "Patient:" / "Doctor:" at line starts; unmarked lines
    continue the current turn; the terminal marker is dropped.
    """
    if not raw.strip():
        raise NoMarkersError("empty transcript")
    turns: list[tuple[str, list[str]]] = []
    for line in raw.splitlines():
        stripped = line.strip()
        if not stripped or stripped == TERMINAL_MARKER:
            continue
        match = _MARKER_RE.match(stripped)
        if match:
            speaker = SPEAKER_PATIENT if match.group(1) == "Patient" else SPEAKER_DOCTOR
            turns.append((speaker, [match.group(2).strip()]))
        elif turns:
            turns[-1][1].append(stripped)
        # text before the first marker is prompt-echo noise; ignored
    if not turns:
        raise NoMarkersError("no Patient:/Doctor: markers found")

    parsed: list[tuple[str, str]] = []
    for speaker, pieces in turns:
        text = " ".join(piece for piece in pieces if piece).strip()
        if not text:
            raise EmptyTurnError(f"{speaker} turn has no text")
        parsed.append((speaker, text))

    if parsed[0][0] != SPEAKER_PATIENT:
        raise RoleOrderError(f"first speaker must be patient, got {parsed[0][0]}")
    for prev, cur in zip(parsed, parsed[1:]):
        if prev[0] == cur[0]:
            raise RoleOrderError(f"consecutive {cur[0]} turns do not alternate")
    return parsed


def validate_turns(turns: list[tuple[str, str]]) -> None:
    """Full transcript invariants: alternation, patient first, doctor last, >= 2 turns."""
    if len(turns) < 2:
        raise RoleOrderError(f"transcript needs at least 2 turns, got {len(turns)}")
    if turns[0][0] != SPEAKER_PATIENT:
        raise RoleOrderError("first speaker must be patient")
    if turns[-1][0] != SPEAKER_DOCTOR:
        raise RoleOrderError("last speaker must be doctor")
    for prev, cur in zip(turns, turns[1:]):
        if prev[0] == cur[0]:
            raise RoleOrderError("speakers must alternate strictly")
        if prev[0] not in (SPEAKER_PATIENT, SPEAKER_DOCTOR):
            raise RoleOrderError(f"unknown speaker {prev[0]!r}")
    for speaker, text in turns:
        if not text.strip():
            raise EmptyTurnError(f"{speaker} turn has no text")


def render_transcript(turns: list[tuple[str, str]]) -> str:
    """Inverse of parse_transcript (modulo whitespace): marker lines + terminal."""
    lines = [
        f"{'Patient' if speaker == SPEAKER_PATIENT else 'Doctor'}: {text}" for speaker, text in turns
    ]
    lines.append(TERMINAL_MARKER)
    return "\n".join(lines)


def synthesize_chat(
    item: McqaItem,
    gateway: Gateway,
    template: str | None = None,
    max_regen: int = 2,
    max_turns: int = DEFAULT_MAX_TURNS,
    tokenizer_id: str = "unicode-words-v1",
) -> ChatTranscript:
    """Generate, parse, and validate a grounded dialogue, regenerating on failure.

    Over-long dialogues are truncated at the last doctor turn inside the cap;
    any other structural violation voids the attempt. Raises
    SynthesisExhausted after max_regen failed attempts.
    """
    template = template or load_chat_template()
    last_error: Exception | None = None
    for attempt in range(1, max_regen + 1):
        request = build_chat_prompt(item, template, tag=f"chat:{item.item_id}:a{attempt}")
        result = gateway.complete(request)
        try:
            turns = parse_transcript(result.text)
            if len(turns) > max_turns:
                turns = turns[:max_turns]
                while turns and turns[-1][0] != SPEAKER_DOCTOR:
                    turns.pop()
            validate_turns(turns)
        except (NoMarkersError, RoleOrderError, EmptyTurnError) as exc:
            last_error = exc
            continue
        token_count = sum(count_tokens(text, tokenizer_id) for _, text in turns)
        return ChatTranscript(
            grounding_id=item.item_id,
            turns=turns,
            token_count=token_count,
            attempts=attempt,
        )
    raise SynthesisExhausted(
        f"{max_regen} attempt(s) for item {item.item_id} all invalid; last error: {last_error}"
    )
