"""Rule-based NLU engine tests."""

import pytest

from moviebot import data_path
from moviebot.dialogue.acts import Slot, UserIntent
from moviebot.nlu.features import Lexicons
from moviebot.nlu.rules import (
    NEGATION_WINDOW,
    RuleBasedEngine,
    extract_slots,
    load_patterns,
)
from moviebot.rec.catalog import load_catalog


@pytest.fixture(scope="module")
def lexicons():
    catalog = load_catalog(data_path("catalog_sample.jsonl"))
    stoplist = Lexicons.load_word_list(data_path("stoplist.txt"))
    return Lexicons.from_catalog(catalog, stoplist)


@pytest.fixture(scope="module")
def engine(lexicons):
    return RuleBasedEngine(load_patterns(data_path("rule_patterns.tsv")), lexicons)


def slot_map(act):
    return {sv.slot: (sv.value, sv.polarity) for sv in act.slot_values}


def test_pattern_intents(engine):
    cases = {
        "hi": UserIntent.HI,
        "hello": UserIntent.HI,
        "bye": UserIntent.BYE,
        "goodbye": UserIntent.BYE,
        "let's start over": UserIntent.RESTART,
        "i will watch it": UserIntent.ACCEPT,
        "i have already seen it": UserIntent.REJECT,
        "what else do you have": UserIntent.CONTINUE,
        "okay": UserIntent.ACKNOWLEDGE,
        "no": UserIntent.DENY,
        "who directed it": UserIntent.INQUIRE,
    }
    for text, intent in cases.items():
        assert engine.parse(text).act.intent is intent, text


def test_reveal_from_slots_without_pattern(engine):
    act = engine.parse("i want a comedy movie").act
    assert act.intent is UserIntent.REVEAL
    assert slot_map(act)[Slot.GENRE] == ("comedy", 1)


def test_negation_within_window(engine):
    act = engine.parse("no comedy movies please").act
    assert slot_map(act)[Slot.GENRE] == ("comedy", -1)


def test_negation_outside_window(lexicons):
    # Cue sits NEGATION_WINDOW + 1 tokens before the value.
    pad = " ".join(["well"] * (NEGATION_WINDOW + 1))
    svs = extract_slots(f"not {pad} comedy", lexicons)
    genre = [sv for sv in svs if sv.slot is Slot.GENRE][0]
    assert genre.polarity == 1


def test_unknown_text_is_unk(engine):
    assert engine.parse("quantum flux capacitors").act.intent is UserIntent.UNK
    assert engine.parse("").act.intent is UserIntent.UNK


def test_remove_requires_slot(engine):
    act = engine.parse("remove comedy from my preferences").act
    assert act.intent is UserIntent.REMOVE_PREFERENCES
    assert slot_map(act)[Slot.GENRE] == ("comedy", 1)
    # REMOVE pattern with no recoverable slot degrades to UNK.
    assert engine.parse("remove that thing").act.intent is UserIntent.UNK


def test_inquire_requested_slot(engine):
    act = engine.parse("who directed it").act
    assert act.intent is UserIntent.INQUIRE
    assert act.payload == {"requested_slot": "director"}
    act = engine.parse("what year is it from").act
    assert act.payload == {"requested_slot": "year"}


def test_year_extraction(lexicons):
    svs = extract_slots("movies from 1994", lexicons)
    assert any(sv.slot is Slot.YEAR and sv.value == "1994" for sv in svs)
    assert not extract_slots("movies from 1850", lexicons)
    assert not extract_slots("i own 19941 stamps", lexicons)


def test_multiword_person_longest_match(engine, lexicons):
    person = sorted(lexicons.people)[0]
    act = engine.parse(f"movies with {person}").act
    assert act.intent is UserIntent.REVEAL
    values = {sv.value for sv in act.slot_values}
    assert person in values


def test_director_cue_changes_person_slot(engine, lexicons):
    person = sorted(lexicons.people)[0]
    by_actor = slot_map(engine.parse(f"movies with {person}").act)
    by_director = slot_map(engine.parse(f"movies directed by {person}").act)
    assert Slot.ACTOR in by_actor
    assert Slot.DIRECTOR in by_director


def test_stoplist_suppresses_ambiguous_words(lexicons):
    assert "movie" in lexicons.stoplist
    assert not extract_slots("a movie please", lexicons)


def test_quoted_title(engine, lexicons):
    title = " ".join(sorted(lexicons.titles)[0])
    act = engine.parse(f'have you seen "{title}"').act
    assert any(sv.slot is Slot.TITLE and sv.value == title for sv in act.slot_values)


def test_priority_order_restart_beats_reveal(engine):
    # "start over" must win even if a slot word appears in the utterance.
    act = engine.parse("start over i want comedy").act
    assert act.intent is UserIntent.RESTART
    assert act.slot_values == ()


def test_each_slot_value_has_span(engine):
    act = engine.parse("i want a comedy movie from 1994").act
    for sv in act.slot_values:
        assert sv.span is not None
        start, end = sv.span
        assert 0 <= start < end
