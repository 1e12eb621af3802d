"""Rendering simulator acts to text for the NLU-in-the-loop environment."""

from __future__ import annotations

import numpy as np

from ..dialogue.acts import DialogueAct, UserIntent
from ..nlu.corpus import Grammar, GrammarCoverageError, fill_template


def render_user_text(act: DialogueAct, grammar: Grammar, rng: np.random.Generator) -> str:
    """Instantiate a user-side template for the act; uniform under the rng.

    Templates designed for the rule-based engine round-trip: parsing the
    rendered text of a REVEAL recovers its intent and slot values.
    """
    if not isinstance(act.intent, UserIntent):
        raise ValueError("render_user_text takes user acts")
    if act.slot_values:
        sv = act.slot_values[0]
        pool = grammar.templates(act.intent, sv.slot.value, sv.polarity)
        if not pool:
            raise GrammarCoverageError(
                f"no template for ({act.intent.value}, {sv.slot.value})"
            )
        template = pool[int(rng.integers(len(pool)))]
        text, _ = fill_template(template, sv.slot.value, sv.value)
        return text
    pool = grammar.templates(act.intent, None)
    if not pool:
        raise GrammarCoverageError(f"no template for {act.intent.value}")
    return pool[int(rng.integers(len(pool)))]
