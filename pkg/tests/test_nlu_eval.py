"""NLU evaluation metrics and regression thresholds."""

import pytest

from moviebot import data_path
from moviebot.dialogue.acts import DialogueAct, Slot, SlotValue, UserIntent
from moviebot.nlu.corpus import CorpusRecord, LabeledCorpus
from moviebot.nlu.evaluate import PRF, evaluate_nlu, predicted_spans
from moviebot.nlu.features import Lexicons
from moviebot.nlu.rules import NLUOutput, RuleBasedEngine, load_patterns
from moviebot.rec.catalog import load_catalog


class StubEngine:
    """Maps exact texts to canned outputs."""

    def __init__(self, table):
        self.table = table

    def parse(self, text):
        return self.table[text]


def out(intent, slot_values=()):
    return NLUOutput(DialogueAct(intent, tuple(slot_values)), 1.0, 1.0)


def test_prf_from_counts():
    prf = PRF.from_counts(3, 4, 6)
    assert prf.precision == 0.75
    assert prf.recall == 0.5
    assert abs(prf.f1 - 0.6) < 1e-12
    zero = PRF.from_counts(0, 0, 0)
    assert (zero.precision, zero.recall, zero.f1) == (0.0, 0.0, 0.0)


def test_predicted_spans_skips_missing_span():
    o = out(
        UserIntent.REVEAL,
        [
            SlotValue(Slot.GENRE, "comedy", 1, span=(3, 4)),
            SlotValue(Slot.ACTOR, "someone", 1, span=None),
        ],
    )
    assert predicted_spans(o) == {("genre", 3, 4)}


def test_evaluate_counts_exact_spans():
    corpus = LabeledCorpus(
        [
            CorpusRecord("i want comedy", UserIntent.REVEAL, ("O", "O", "B-genre")),
            CorpusRecord("hello", UserIntent.HI, ("O",)),
        ]
    )
    engine = StubEngine(
        {
            "i want comedy": out(
                UserIntent.REVEAL, [SlotValue(Slot.GENRE, "comedy", 1, span=(2, 3))]
            ),
            "hello": out(UserIntent.BYE),
        }
    )
    report = evaluate_nlu(engine, corpus)
    assert report.intent.f1 == 0.5
    assert report.slot == PRF.from_counts(1, 1, 1)
    assert report.n_records == 2


def test_off_by_one_span_does_not_count():
    corpus = LabeledCorpus(
        [CorpusRecord("i want comedy", UserIntent.REVEAL, ("O", "O", "B-genre"))]
    )
    engine = StubEngine(
        {
            "i want comedy": out(
                UserIntent.REVEAL, [SlotValue(Slot.GENRE, "want comedy", 1, span=(1, 3))]
            )
        }
    )
    report = evaluate_nlu(engine, corpus)
    assert report.slot.f1 == 0.0


def test_rule_engine_regression_thresholds():
    catalog = load_catalog(data_path("catalog_sample.jsonl"))
    lexicons = Lexicons.from_catalog(
        catalog, Lexicons.load_word_list(data_path("stoplist.txt"))
    )
    engine = RuleBasedEngine(load_patterns(data_path("rule_patterns.tsv")), lexicons)
    corpus = LabeledCorpus.load(data_path("corpus_500.tsv"))
    report = evaluate_nlu(engine, corpus)
    assert report.n_records == 500
    assert report.intent.f1 >= 0.95
    assert report.slot.f1 >= 0.90
