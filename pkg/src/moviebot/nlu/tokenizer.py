"""Canonical tokenization shared by every NLU engine and the corpus tools."""

from __future__ import annotations

import re

# Word = letter/digit runs, keeping internal apostrophes ("don't" is one
# token). Punctuation tokens are dropped, not emitted.
_WORD = re.compile(r"[^\W_]+(?:'[^\W_]+)*", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace/punctuation, dropping punctuation."""
    return [m.group(0).lower() for m in _WORD.finditer(text)]


def tokenize_with_case(text: str) -> tuple[list[str], list[bool]]:
    """Tokenize, also reporting which tokens were capitalized in the source."""
    tokens, caps = [], []
    for m in _WORD.finditer(text):
        raw = m.group(0)
        tokens.append(raw.lower())
        caps.append(raw != raw.lower())
    return tokens, caps
