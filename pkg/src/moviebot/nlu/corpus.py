"""Template-grammar corpus generation with gold BIO annotations."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from ..dialogue.acts import SLOT_FREE_INTENTS, Slot, UserIntent
from .tokenizer import tokenize

_PLACEHOLDER = re.compile(r"\{(\w+)\}")


class GrammarCoverageError(Exception):
    """The grammar lacks templates for a required intent or slot."""


@dataclass(frozen=True)
class CorpusRecord:
    text: str
    intent: UserIntent
    tags: tuple[str, ...]


def spans_from_tags(tags) -> list[tuple[str, int, int]]:
    """Extract (slot, start, end) spans from a BIO tag sequence."""
    spans = []
    start, slot = None, None
    for i, tag in enumerate(list(tags) + ["O"]):
        if tag.startswith("B-"):
            if start is not None:
                spans.append((slot, start, i))
            start, slot = i, tag[2:]
        elif tag.startswith("I-") and slot == tag[2:] and start is not None:
            continue
        else:
            if start is not None:
                spans.append((slot, start, i))
            start, slot = None, None
    return spans


def _well_formed_bio(tags) -> bool:
    prev = "O"
    for tag in tags:
        if tag.startswith("I-"):
            slot = tag[2:]
            if prev not in (f"B-{slot}", f"I-{slot}"):
                return False
        prev = tag
    return True


@dataclass
class LabeledCorpus:
    records: list[CorpusRecord]

    def __len__(self) -> int:
        return len(self.records)

    def validate(self) -> None:
        for rec in self.records:
            if len(tokenize(rec.text)) != len(rec.tags):
                raise ValueError(f"tag/token length mismatch: {rec.text!r}")
            if not _well_formed_bio(rec.tags):
                raise ValueError(f"malformed BIO tags for {rec.text!r}")

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.records:
                fh.write(f"{rec.text}\t{rec.intent.value}\t{' '.join(rec.tags)}\n")

    @classmethod
    def load(cls, path) -> "LabeledCorpus":
        records = []
        with open(path, encoding="utf-8") as fh:
            for raw in fh:
                line = raw.rstrip("\n")
                if not line:
                    continue
                text, intent, tags = line.split("\t")
                records.append(
                    CorpusRecord(text, UserIntent(intent), tuple(tags.split(" ")))
                )
        return cls(records)


class Grammar:
    """User-side utterance templates, TAB-separated like the NLG table.

    Rows are ``intent<TAB>slot-or-"-"<TAB>template``; slot-bearing
    templates contain exactly one ``{slot}`` filler marker. Templates whose
    wording carries a negation cue form the negative-polarity pool used
    when rendering negative acts.
    """

    NEGATIVE_CUES = ("not", "no", "don't", "hate", "dislike")

    def __init__(self, rows: list[tuple[UserIntent, str | None, str]]):
        self.rows = rows
        self.by_key: dict[tuple[UserIntent, str | None], list[str]] = {}
        for intent, slot, template in rows:
            self.by_key.setdefault((intent, slot), []).append(template)

    @classmethod
    def load(cls, path) -> "Grammar":
        rows = []
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ValueError(f"{path}:{lineno}: expected 3 TAB fields")
                intent_name, slot, template = parts
                rows.append(
                    (UserIntent(intent_name), None if slot == "-" else slot, template)
                )
        return cls(rows)

    def dash_intents(self) -> list[UserIntent]:
        """Intents with slot-free templates, in vocabulary order."""
        present = {i for i, s, _ in self.rows if s is None}
        return [i for i in UserIntent if i in present]

    def slot_combos(self) -> list[tuple[UserIntent, str]]:
        """(intent, slot) template groups, in vocabulary then slot order."""
        present = {(i, s) for i, s, _ in self.rows if s is not None}
        return [
            (i, s.value)
            for i in UserIntent
            for s in Slot
            if (i, s.value) in present
        ]

    def templates(
        self, intent: UserIntent, slot: str | None, polarity: int = 1
    ) -> list[str]:
        pool = self.by_key.get((intent, slot), [])
        if not pool:
            return []
        if slot is None:
            return pool
        negative = [
            t for t in pool if any(re.search(rf"\b{c}\b", t) for c in self.NEGATIVE_CUES)
        ]
        positive = [t for t in pool if t not in negative]
        chosen = positive if polarity > 0 else negative
        return chosen or pool

    def check_coverage(self) -> None:
        intents = {i for i, _, _ in self.rows}
        missing = [i.value for i in UserIntent if i not in intents]
        if missing:
            raise GrammarCoverageError(f"grammar missing intents: {missing}")
        reveal_slots = {s for i, s, _ in self.rows if i is UserIntent.REVEAL and s}
        missing_slots = [s.value for s in Slot if s.value not in reveal_slots]
        if missing_slots:
            raise GrammarCoverageError(f"grammar missing REVEAL slots: {missing_slots}")


def slot_fillers(catalog, slot: str) -> list[str]:
    """Sorted candidate filler values for a slot, drawn from the catalog."""
    items = catalog.items.values()
    if slot == "genre":
        values = {g.lower() for it in items for g in it.genres}
    elif slot == "director":
        values = {it.director.lower() for it in items}
    elif slot == "actor":
        values = {a.lower() for it in items for a in it.actors}
    elif slot == "keyword":
        values = {k.lower() for it in items for k in it.keywords}
    elif slot == "title":
        values = {it.title.lower() for it in items}
    elif slot == "year":
        values = {str(it.year) for it in items}
    else:
        raise ValueError(f"unknown slot {slot!r}")
    return sorted(values)


def fill_template(template: str, slot: str | None, value: str | None):
    """Instantiate a template; returns (text, tags) aligned to tokenization."""
    if slot is None:
        text = template
        return text, tuple("O" for _ in tokenize(text))
    marker = "{" + slot + "}"
    if marker not in template:
        raise GrammarCoverageError(f"template {template!r} lacks {marker}")
    prefix, suffix = template.split(marker, 1)
    pre_toks = tokenize(prefix)
    val_toks = tokenize(value)
    suf_toks = tokenize(suffix)
    tags = (
        ["O"] * len(pre_toks)
        + [f"B-{slot}"]
        + [f"I-{slot}"] * (len(val_toks) - 1)
        + ["O"] * len(suf_toks)
    )
    text = template.replace(marker, value)
    return text, tuple(tags)


def generate_corpus(
    grammar: Grammar,
    catalog,
    n_per_intent: int,
    n_per_slot: int,
    seed: int = 0,
) -> LabeledCorpus:
    """Expand the grammar into a labeled corpus, deterministic under seed.

    Emits ``n_per_intent`` records for every intent with slot-free
    templates and ``n_per_slot`` for every (intent, slot) template group.
    """
    grammar.check_coverage()
    rng = np.random.default_rng(seed)
    records: list[CorpusRecord] = []

    for intent in grammar.dash_intents():
        pool = grammar.templates(intent, None)
        for i in range(n_per_intent):
            template = pool[i % len(pool)]
            text, tags = fill_template(template, None, None)
            records.append(CorpusRecord(text, intent, tags))

    for intent, slot in grammar.slot_combos():
        pool = grammar.by_key[(intent, slot)]
        fillers = slot_fillers(catalog, slot)
        for i in range(n_per_slot):
            template = pool[i % len(pool)]
            value = fillers[int(rng.integers(len(fillers)))]
            text, tags = fill_template(template, slot, value)
            records.append(CorpusRecord(text, intent, tags))

    corpus = LabeledCorpus(records)
    corpus.validate()
    return corpus
