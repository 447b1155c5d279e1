"""Shared text primitives: tokenizer and sentence splitter.

Both the corpus statistics and the tf-idf scorer use the same
conventions: lowercase tokens split on non-alphanumeric runs, and
sentence boundaries at '.', '!' or '?' followed by whitespace or
end of text.
"""

from __future__ import annotations

import re

_TOKEN_RE = re.compile(r"[0-9a-z]+")
_SENTENCE_BOUNDARY_RE = re.compile(r"[.!?](?=\s|$)")


def tokenize(text: str) -> list[str]:
    """Lowercase tokens, splitting on any run of non-alphanumerics."""
    return _TOKEN_RE.findall(text.lower())


def split_sentences(text: str) -> list[str]:
    """Split into sentences; terminators only count before whitespace or EOF."""
    parts = _SENTENCE_BOUNDARY_RE.split(text)
    return [p.strip() for p in parts if p.strip()]


def count_tokens(text: str) -> int:
    return len(tokenize(text))


def count_sentences(text: str) -> int:
    return len(split_sentences(text))
