"""Pluggable token counting.

The default segmenter splits on unicode word boundaries and counts each
punctuation mark as one token: "aspirin 81 mg" -> 3, and Arabic text
segments by word the same way. It is deliberately simple and deterministic;
the tokenizer id rides along in every manifest, and absolute token totals
are approximate by construction.
"""

from __future__ import annotations

import re
from typing import Callable

from ..errors import UnknownTokenizer

DEFAULT_TOKENIZER = "unicode-words-v1"

_WORD_OR_PUNCT = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def _unicode_words(text: str) -> int:
    return len(_WORD_OR_PUNCT.findall(text))


def _whitespace(text: str) -> int:
    return len(text.split())


_REGISTRY: dict[str, Callable[[str], int]] = {
    DEFAULT_TOKENIZER: _unicode_words,
    "whitespace": _whitespace,
}


def register_tokenizer(tokenizer_id: str, fn: Callable[[str], int]) -> None:
    _REGISTRY[tokenizer_id] = fn


def tokenizer_ids() -> list[str]:
    return sorted(_REGISTRY)


def count_tokens(text: str, tokenizer_id: str = DEFAULT_TOKENIZER) -> int:
    try:
        fn = _REGISTRY[tokenizer_id]
    except KeyError:
        raise UnknownTokenizer(f"no tokenizer registered under {tokenizer_id!r}") from None
    return fn(text)
