"""Pattern- and lexicon-based NLU engine.

Intent selection is first-match over a priority-ordered regex list loaded
from a config file; slot values come from longest-match lookup against the
catalog-derived lexicons. An ambiguous-phrase stoplist suppresses lookup
matches for wording common in general conversation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..dialogue.acts import DialogueAct, Slot, SlotValue, UserIntent
from .features import Lexicons
from .tokenizer import tokenize

NEGATION_CUES = {"not", "no", "don't", "hate", "dislike"}
NEGATION_WINDOW = 3

DIRECTOR_CUES = {"directed", "director", "direction"}

_INQUIRE_SLOT_CUES: list[tuple[str, Slot]] = [
    ("directed", Slot.DIRECTOR),
    ("director", Slot.DIRECTOR),
    ("year", Slot.YEAR),
    ("when", Slot.YEAR),
    ("starring", Slot.ACTOR),
    ("cast", Slot.ACTOR),
    ("genre", Slot.GENRE),
    ("about", Slot.KEYWORD),
]

_MAX_NGRAM = 5


@dataclass(frozen=True)
class NLUOutput:
    act: DialogueAct
    intent_score: float
    sequence_score: float


def load_patterns(path) -> list[tuple[UserIntent, re.Pattern]]:
    """Priority-ordered ``INTENT<TAB>regex`` pairs, matched top to bottom."""
    patterns = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            try:
                intent_name, regex = line.split("\t", 1)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: expected INTENT<TAB>regex") from exc
            patterns.append((UserIntent(intent_name), re.compile(regex)))
    return patterns


def _polarity(tokens: list[str], start: int) -> int:
    window = tokens[max(0, start - NEGATION_WINDOW) : start]
    return -1 if any(t in NEGATION_CUES for t in window) else 1


def _quoted_title_span(text: str, tokens: list[str]) -> tuple[int, int] | None:
    match = re.search(r"[\"“']([^\"”']{2,})[\"”']", text)
    if not match:
        return None
    quoted = tokenize(match.group(1))
    if not quoted:
        return None
    for i in range(len(tokens) - len(quoted) + 1):
        if tokens[i : i + len(quoted)] == quoted:
            return i, i + len(quoted)
    return None


def extract_slots(text: str, lexicons: Lexicons) -> list[SlotValue]:
    """Longest-match slot extraction with span and polarity annotation."""
    tokens = tokenize(text)
    used = [False] * len(tokens)
    found: list[SlotValue] = []

    def claim(slot: Slot, start: int, end: int, value: str | None = None) -> None:
        phrase = value if value is not None else " ".join(tokens[start:end])
        found.append(
            SlotValue(slot, phrase, polarity=_polarity(tokens, start), span=(start, end))
        )
        for i in range(start, end):
            used[i] = True

    quoted = _quoted_title_span(text, tokens)
    if quoted is not None:
        claim(Slot.TITLE, *quoted)

    for n in range(min(_MAX_NGRAM, len(tokens)), 0, -1):
        for start in range(len(tokens) - n + 1):
            end = start + n
            if any(used[start:end]):
                continue
            phrase = " ".join(tokens[start:end])
            if phrase in lexicons.stoplist:
                continue
            if n >= 2 and tuple(tokens[start:end]) in lexicons.titles:
                claim(Slot.TITLE, start, end)
            elif phrase in lexicons.genres:
                claim(Slot.GENRE, start, end)
            elif phrase in lexicons.people:
                cue_window = tokens[max(0, start - 3) : start]
                slot = (
                    Slot.DIRECTOR
                    if any(t in DIRECTOR_CUES for t in cue_window)
                    else Slot.ACTOR
                )
                claim(slot, start, end)
            elif phrase in lexicons.keywords:
                claim(Slot.KEYWORD, start, end)
            elif (
                n == 1
                and phrase.isdigit()
                and len(phrase) == 4
                and 1900 <= int(phrase) <= 2100
            ):
                claim(Slot.YEAR, start, end)

    found.sort(key=lambda sv: sv.span)
    return found


def _inquire_slot(tokens: list[str]) -> Slot | None:
    for cue, slot in _INQUIRE_SLOT_CUES:
        if cue in tokens:
            return slot
    return None


class RuleBasedEngine:
    """First-match intent patterns + lexicon slot lookup."""

    def __init__(self, patterns, lexicons: Lexicons):
        self.patterns = patterns
        self.lexicons = lexicons

    def parse(self, text: str) -> NLUOutput:
        tokens = tokenize(text)
        joined = " ".join(tokens)

        intent = None
        for candidate, pattern in self.patterns:
            if pattern.search(joined):
                intent = candidate
                break

        slots = extract_slots(text, self.lexicons)

        if intent is None:
            intent = UserIntent.REVEAL if slots else UserIntent.UNK
        if intent in (UserIntent.REVEAL, UserIntent.REMOVE_PREFERENCES) and not slots:
            intent = UserIntent.UNK

        payload = None
        if intent is UserIntent.INQUIRE:
            asked = _inquire_slot(tokens)
            if asked is not None:
                payload = {"requested_slot": asked.value}
            slots = []
        elif intent not in (UserIntent.REVEAL, UserIntent.REMOVE_PREFERENCES):
            slots = []
        elif intent is UserIntent.REMOVE_PREFERENCES:
            # Removal targets are named literally; polarity is not meaningful.
            slots = [SlotValue(sv.slot, sv.value, 1, sv.span) for sv in slots]

        act = DialogueAct(intent, tuple(slots), payload=payload)
        return NLUOutput(act=act, intent_score=1.0, sequence_score=1.0)
