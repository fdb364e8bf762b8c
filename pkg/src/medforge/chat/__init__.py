"""MCQA-grounded multi-turn patient/doctor chat synthesis."""

from .types import ChatTranscript, McqaItem
from .forge import (
    DEFAULT_MAX_TURNS,
    SPEAKER_DOCTOR,
    SPEAKER_PATIENT,
    build_chat_prompt,
    load_chat_template,
    parse_transcript,
    render_transcript,
    synthesize_chat,
    validate_turns,
)

__all__ = [
    "ChatTranscript",
    "DEFAULT_MAX_TURNS",
    "McqaItem",
    "SPEAKER_DOCTOR",
    "SPEAKER_PATIENT",
    "build_chat_prompt",
    "load_chat_template",
    "parse_transcript",
    "render_transcript",
    "synthesize_chat",
    "validate_turns",
]
