"""Decoding a trained joint CRF into dialogue acts."""

from __future__ import annotations

from ..dialogue.acts import DialogueAct, Slot, SlotValue, UserIntent
from .corpus import spans_from_tags
from .crf import CrfModel, InfeasibleConstraintError, crf_viterbi
from .features import FeatureEncoder
from .rules import NEGATION_CUES, NEGATION_WINDOW, NLUOutput


def _span_polarity(tokens: list[str], start: int) -> int:
    window = tokens[max(0, start - NEGATION_WINDOW) : start]
    return -1 if any(t in NEGATION_CUES for t in window) else 1


def act_from_tags(tokens: list[str], intent: UserIntent, tags: list[str]) -> DialogueAct:
    """Convert BIO spans to slot values with negation-window polarity."""
    slot_values = []
    for slot_name, start, end in spans_from_tags(tags):
        value = " ".join(tokens[start:end])
        slot = Slot(slot_name)
        if slot is Slot.YEAR and not value.isdigit():
            continue
        slot_values.append(
            SlotValue(slot, value, polarity=_span_polarity(tokens, start), span=(start, end))
        )
    if intent in (UserIntent.REVEAL, UserIntent.REMOVE_PREFERENCES) and not slot_values:
        # Cannot happen under constrained decoding with a clean alphabet,
        # but guard the act invariant anyway.
        return DialogueAct(UserIntent.UNK)
    if intent not in (UserIntent.REVEAL, UserIntent.REMOVE_PREFERENCES):
        slot_values = []
    return DialogueAct(intent, tuple(slot_values))


def joint_decode(model: CrfModel, text: str, encoder: FeatureEncoder) -> NLUOutput:
    """Argmax over (intent, constrained best path); ties take the lower
    intent index."""
    tokens, token_feats = encoder.encode_tokens(text)
    if not tokens:
        return NLUOutput(DialogueAct(UserIntent.UNK), 0.0, 0.0)
    utt_feats = encoder.encode_utterance(text)

    best = None
    for intent in model.intents:
        try:
            tags, seq_score = crf_viterbi(model, token_feats, intent)
        except InfeasibleConstraintError:
            continue
        intent_score = model.intent_score(utt_feats, intent)
        total = intent_score + seq_score
        if best is None or total > best[0]:
            best = (total, intent, tags, intent_score, seq_score)
    if best is None:
        return NLUOutput(DialogueAct(UserIntent.UNK), 0.0, 0.0)

    _, intent, tags, intent_score, seq_score = best
    act = act_from_tags(tokens, intent, tags)
    return NLUOutput(act, intent_score, seq_score)


class CrfEngine:
    """NLU engine facade over a trained CRF model."""

    def __init__(self, model: CrfModel, encoder: FeatureEncoder):
        self.model = model
        self.encoder = encoder

    def parse(self, text: str) -> NLUOutput:
        return joint_decode(self.model, text, self.encoder)
