"""Hand-written dialogue policy."""

from __future__ import annotations

from ..dialogue.acts import Slot
from ..dialogue.state import DEFAULT_MAX_TURNS, DialogueState, REACTION_REJECTED
from .actions import AgentAction

_ELICIT_ORDER = [
    (Slot.GENRE, AgentAction.ELICIT_GENRE),
    (Slot.ACTOR, AgentAction.ELICIT_ACTOR),
    (Slot.DIRECTOR, AgentAction.ELICIT_DIRECTOR),
    (Slot.KEYWORD, AgentAction.ELICIT_KEYWORD),
]


def rule_policy_next(
    state: DialogueState, max_turns: int = DEFAULT_MAX_TURNS
) -> AgentAction:
    """Deterministic cascade over the tracked state."""
    if state.terminated:
        raise ValueError("rule policy called on a terminated state")
    if state.accepted or state.turn_count >= max_turns:
        return AgentAction.BYE
    if state.last_reaction == REACTION_REJECTED:
        return AgentAction.CONTINUE_REC
    filled = state.filled_slots
    if filled >= 1 and not state.has_outstanding_recommendation:
        return AgentAction.RECOMMEND
    for slot, action in _ELICIT_ORDER:
        if not state.frame.get(slot):
            return action
    return AgentAction.BYE


class RulePolicy:
    """Policy facade so the rule cascade plugs into episode runners.

    Rule decisions read the dialogue state, not the encoded observation,
    so the environment must expose its current state via ``info``/attribute.
    """

    kind = "rule"

    def __init__(self, max_turns: int = DEFAULT_MAX_TURNS):
        self.max_turns = max_turns

    def act_on_state(self, state: DialogueState) -> AgentAction:
        return rule_policy_next(state, self.max_turns)
