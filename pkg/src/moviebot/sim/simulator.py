"""Agenda-based user simulator."""

from __future__ import annotations

import numpy as np

from ..dialogue.acts import AgentIntent, DialogueAct, Slot, SlotValue, UserIntent
from .profile import UserProfile


class InactiveEpisodeError(Exception):
    pass


class Agenda:
    """LIFO stack of pending user acts.

    Initialized bottom-to-top as [BYE, shuffled REVEALs, HI], so HI pops
    first and BYE last.
    """

    def __init__(self, profile: UserProfile, rng: np.random.Generator):
        reveals = [
            DialogueAct(
                UserIntent.REVEAL, (SlotValue(slot, value, polarity),)
            )
            for slot, (value, polarity) in sorted(
                profile.constraints.items(), key=lambda kv: kv[0].index
            )
        ]
        order = rng.permutation(len(reveals))
        self._stack: list[DialogueAct] = [DialogueAct(UserIntent.BYE)]
        self._stack.extend(reveals[i] for i in order)
        self._stack.append(DialogueAct(UserIntent.HI))

    def __len__(self) -> int:
        return len(self._stack)

    def pop(self) -> DialogueAct:
        if not self._stack:
            return DialogueAct(UserIntent.BYE)
        return self._stack.pop()

    def remove_reveal(self, slot: Slot) -> None:
        """Drop the pending REVEAL for a slot once it was answered directly."""
        for i in range(len(self._stack) - 1, -1, -1):
            act = self._stack[i]
            if act.intent is UserIntent.REVEAL and act.slot_values[0].slot is slot:
                del self._stack[i]
                return


class UserSimulator:
    """Responds to agent acts by goal matching, compliance, and the agenda."""

    def __init__(self, profile: UserProfile, rng: np.random.Generator):
        self.profile = profile
        self.rng = rng
        self.agenda = Agenda(profile, rng)
        self.revealed: list[tuple[Slot, str, int]] = []
        self.utterances = 0
        self.active = True

    def opening(self) -> DialogueAct:
        act = self.agenda.pop()  # HI by construction
        self._note(act)
        return act

    def _note(self, act: DialogueAct) -> DialogueAct:
        self.utterances += 1
        if act.intent is UserIntent.REVEAL:
            for sv in act.slot_values:
                entry = (sv.slot, sv.value, sv.polarity)
                if entry not in self.revealed:
                    self.revealed.append(entry)
        if act.intent is UserIntent.BYE:
            self.active = False
        return act

    def _pop_agenda(self) -> DialogueAct:
        while True:
            act = self.agenda.pop()
            if act.intent is UserIntent.REVEAL:
                sv = act.slot_values[0]
                if (sv.slot, sv.value, sv.polarity) in self.revealed:
                    continue  # already answered through an elicit
            return act

    def respond(self, agent_act: DialogueAct) -> DialogueAct:
        if not self.active:
            raise InactiveEpisodeError("simulator episode is over")
        if self.utterances >= self.profile.patience:
            return self._note(DialogueAct(UserIntent.BYE))

        if agent_act.intent is AgentIntent.RECOMMEND:
            item_id = (agent_act.payload or {}).get("item_id")
            intent = (
                UserIntent.ACCEPT
                if item_id in self.profile.target_items
                else UserIntent.REJECT
            )
            return self._note(DialogueAct(intent, payload={"item_id": item_id}))

        # Occasionally retract a previously revealed preference.
        if self.revealed and self.rng.random() < self.profile.p_remove:
            entry = self.revealed[int(self.rng.integers(len(self.revealed)))]
            slot, value, _polarity = entry
            self.revealed.remove(entry)
            return self._note(
                DialogueAct(
                    UserIntent.REMOVE_PREFERENCES, (SlotValue(slot, value, 1),)
                )
            )

        if agent_act.intent is AgentIntent.ELICIT:
            slot_name = (agent_act.payload or {}).get("slot")
            slot = Slot(slot_name) if slot_name else None
            if (
                slot is not None
                and slot in self.profile.constraints
                and self.rng.random() < self.profile.p_comply
            ):
                value, polarity = self.profile.constraints[slot]
                self.agenda.remove_reveal(slot)
                return self._note(
                    DialogueAct(UserIntent.REVEAL, (SlotValue(slot, value, polarity),))
                )
            return self._note(self._pop_agenda())

        # NO_RESULTS, INFORM, COUNT_RESULTS, RESTART_ACK, WELCOME: work
        # through the agenda.
        return self._note(self._pop_agenda())
