"""Dialogue state tracking and the binary Markov state encodings."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .acts import AgentIntent, DialogueAct, Slot, UserIntent

DEFAULT_MAX_TURNS = 30

# Per-item user reactions to a recommendation.
REACTION_NONE = None
REACTION_ACCEPTED = "accepted"
REACTION_REJECTED = "rejected"

BASIC_DIM = 10
WITH_INTENTS_DIM = BASIC_DIM + len(UserIntent) + len(AgentIntent)


class StateUpdateError(Exception):
    """An act is incoherent with the current state.

    This is the failure signal the training environment converts into the
    large negative episodic reward.
    """


@dataclass(frozen=True)
class DialogueState:
    """Tracked conversation frame. Instances are never mutated in place."""

    # slot -> tuple of (value, polarity); a (slot, value) pair appears once.
    frame: dict[Slot, tuple[tuple[str, int], ...]] = field(default_factory=dict)
    # Ordered (item_id, reaction) pairs, oldest first.
    recommended_items: tuple[tuple[str, str | None], ...] = ()
    turn_count: int = 0
    accepted: bool = False
    no_results: bool = False
    last_user_intent: UserIntent | None = None
    last_agent_intent: AgentIntent | None = None
    terminated: bool = False

    @property
    def is_first_turn(self) -> bool:
        return self.turn_count == 0

    @property
    def filled_slots(self) -> int:
        return sum(1 for values in self.frame.values() if values)

    @property
    def last_reaction(self) -> str | None:
        if not self.recommended_items:
            return None
        return self.recommended_items[-1][1]

    @property
    def has_outstanding_recommendation(self) -> bool:
        """True when the most recent recommendation has no user reaction yet."""
        return bool(self.recommended_items) and self.last_reaction is REACTION_NONE

    def frame_pairs(self) -> list[tuple[Slot, str, int]]:
        """Flatten the frame into (slot, value, polarity) triples."""
        return [
            (slot, value, polarity)
            for slot, values in self.frame.items()
            for value, polarity in values
        ]


def _copy_frame(frame: dict) -> dict[Slot, tuple[tuple[str, int], ...]]:
    return {slot: tuple(values) for slot, values in frame.items()}


def _merge_reveal(frame: dict, act: DialogueAct) -> dict:
    new = _copy_frame(frame)
    for sv in act.slot_values:
        values = [(v, p) for v, p in new.get(sv.slot, ()) if v != sv.value]
        values.append((sv.value, sv.polarity))
        new[sv.slot] = tuple(values)
    return new


def _remove_preferences(frame: dict, act: DialogueAct) -> dict:
    new = _copy_frame(frame)
    for sv in act.slot_values:
        values = new.get(sv.slot, ())
        if not any(v == sv.value for v, _ in values):
            raise StateUpdateError(
                f"cannot remove absent preference {sv.slot.value}={sv.value}"
            )
        remaining = tuple((v, p) for v, p in values if v != sv.value)
        if remaining:
            new[sv.slot] = remaining
        else:
            new.pop(sv.slot)
    return new


def _react_to_recommendation(
    state: DialogueState, reaction: str
) -> tuple[tuple[str, str | None], ...]:
    if not state.has_outstanding_recommendation:
        raise StateUpdateError(f"{reaction} with no outstanding recommendation")
    items = list(state.recommended_items)
    item_id, _ = items[-1]
    items[-1] = (item_id, reaction)
    return tuple(items)


def update_state(state: DialogueState, act: DialogueAct, speaker: str) -> DialogueState:
    """Apply one dialogue act and return the successor state.

    Raises :class:`StateUpdateError` when the act is incoherent with the
    state, and ValueError on caller bugs (wrong speaker role, stepping a
    terminated dialogue).
    """
    if state.terminated:
        raise ValueError("cannot update a terminated dialogue state")
    if speaker == "user" and not isinstance(act.intent, UserIntent):
        raise ValueError(f"user turn with agent intent {act.intent}")
    if speaker == "agent" and not isinstance(act.intent, AgentIntent):
        raise ValueError(f"agent turn with user intent {act.intent}")

    changes: dict = {"turn_count": state.turn_count + 1}

    if speaker == "user":
        changes["last_user_intent"] = act.intent
        if act.intent is UserIntent.REVEAL:
            changes["frame"] = _merge_reveal(state.frame, act)
        elif act.intent is UserIntent.REMOVE_PREFERENCES:
            changes["frame"] = _remove_preferences(state.frame, act)
        elif act.intent is UserIntent.ACCEPT:
            changes["recommended_items"] = _react_to_recommendation(
                state, REACTION_ACCEPTED
            )
            changes["accepted"] = True
        elif act.intent is UserIntent.REJECT:
            changes["recommended_items"] = _react_to_recommendation(
                state, REACTION_REJECTED
            )
        elif act.intent is UserIntent.RESTART:
            changes.update(
                frame={},
                recommended_items=(),
                accepted=False,
                no_results=False,
            )
        elif act.intent is UserIntent.BYE:
            changes["terminated"] = True
        # HI, INQUIRE, CONTINUE, ACKNOWLEDGE, DENY, UNK: counters only.
    else:
        changes["last_agent_intent"] = act.intent
        if act.intent is AgentIntent.RECOMMEND:
            item_id = (act.payload or {}).get("item_id")
            if item_id is None:
                raise StateUpdateError("RECOMMEND act without an item id")
            changes["recommended_items"] = state.recommended_items + (
                (item_id, REACTION_NONE),
            )
            changes["no_results"] = False
        elif act.intent is AgentIntent.INFORM:
            if not state.recommended_items:
                raise StateUpdateError("INFORM with no recommendation made")
        elif act.intent is AgentIntent.NO_RESULTS:
            changes["no_results"] = True
        elif act.intent is AgentIntent.BYE:
            changes["terminated"] = True
        # WELCOME, ELICIT, COUNT_RESULTS, RESTART_ACK: counters only.

    return replace(state, **changes)


def encode_state_basic(state: DialogueState, max_turns: int = DEFAULT_MAX_TURNS) -> np.ndarray:
    """Encode the state as the 10-bit feature vector.

    Layout: [is_first_turn, recommendation_made, should_make_offer,
    last_rejected, last_accepted, no_results, slots==0, slots in {1,2},
    slots>=3, patience_exhausted].
    """
    filled = state.filled_slots
    should_make_offer = filled >= 1 and not state.has_outstanding_recommendation
    bits = [
        state.is_first_turn,
        bool(state.recommended_items),
        should_make_offer,
        state.last_reaction == REACTION_REJECTED,
        state.last_reaction == REACTION_ACCEPTED,
        state.no_results,
        filled == 0,
        filled in (1, 2),
        filled >= 3,
        state.turn_count >= max_turns,
    ]
    return np.array(bits, dtype=np.float64)


def encode_state_with_intents(
    state: DialogueState, max_turns: int = DEFAULT_MAX_TURNS
) -> np.ndarray:
    """Basic 10 bits plus one-hot encodings of the last user/agent intents.

    Intent blocks are all-zero when no intent of that role has occurred.
    """
    vec = np.zeros(WITH_INTENTS_DIM, dtype=np.float64)
    vec[:BASIC_DIM] = encode_state_basic(state, max_turns)
    if state.last_user_intent is not None:
        vec[BASIC_DIM + state.last_user_intent.index] = 1.0
    if state.last_agent_intent is not None:
        vec[BASIC_DIM + len(UserIntent) + state.last_agent_intent.index] = 1.0
    return vec


def encoder_for(kind: str):
    """Resolve an encoder name ('basic' | 'with_intents') to (fn, dim)."""
    if kind == "basic":
        return encode_state_basic, BASIC_DIM
    if kind == "with_intents":
        return encode_state_with_intents, WITH_INTENTS_DIM
    raise ValueError(f"unknown encoder kind {kind!r}")
