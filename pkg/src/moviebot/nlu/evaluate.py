"""Micro-averaged intent and slot-span metrics for NLU engines."""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import LabeledCorpus, spans_from_tags
from .tokenizer import tokenize


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, pred: int, gold: int) -> "PRF":
        p = tp / pred if pred else 0.0
        r = tp / gold if gold else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        return cls(p, r, f1)


@dataclass(frozen=True)
class NluReport:
    intent: PRF
    slot: PRF
    n_records: int


def predicted_spans(output) -> set[tuple[str, int, int]]:
    spans = set()
    for sv in output.act.slot_values:
        if sv.span is not None:
            spans.add((sv.slot.value, sv.span[0], sv.span[1]))
    return spans


def evaluate_nlu(engine, corpus: LabeledCorpus) -> NluReport:
    """Run an engine over a labeled corpus.

    Intent metrics are micro-averaged over records (single-label, so
    precision, recall and F1 coincide with accuracy). Slot metrics count
    exact (slot, span) matches against the gold BIO annotation.
    """
    intent_tp = 0
    slot_tp = slot_pred = slot_gold = 0
    for rec in corpus.records:
        output = engine.parse(rec.text)
        if output.act.intent == rec.intent:
            intent_tp += 1
        gold = {(s, a, b) for s, a, b in spans_from_tags(rec.tags)}
        pred = predicted_spans(output)
        slot_tp += len(gold & pred)
        slot_pred += len(pred)
        slot_gold += len(gold)
        # Defensive: gold spans must lie within the tokenization.
        assert all(b <= len(tokenize(rec.text)) for _, _, b in gold)
    n = len(corpus.records)
    return NluReport(
        intent=PRF.from_counts(intent_tp, n, n),
        slot=PRF.from_counts(slot_tp, slot_pred, slot_gold),
        n_records=n,
    )
