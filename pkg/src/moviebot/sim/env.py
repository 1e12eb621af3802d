"""Episodic training environments wrapping tracker, simulator, and recsys.

Two modes: ``annotation`` feeds simulator acts straight to the state
tracker; ``nlu`` renders them to text and re-parses with an NLU engine, so
understanding errors reach the tracker like they would in production.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dialogue.acts import DialogueAct, Utterance
from ..dialogue.state import DialogueState, StateUpdateError, encoder_for, update_state
from ..policy.actions import ACTION_COUNT, AgentAction, realize_agent_act
from .profile import sample_profile
from .render import render_user_text
from .simulator import InactiveEpisodeError, UserSimulator


@dataclass
class RewardSpec:
    """Episodic reward cases plus the optional per-turn term."""

    accepted: float = 100.0
    none_accepted: float = -50.0
    no_recommendation: float = -100.0
    tracker_exception: float = -1000.0
    per_turn: float = -1.0

    @classmethod
    def default(cls) -> "RewardSpec":
        return cls()

    @classmethod
    def episodic_only(cls) -> "RewardSpec":
        """Case values alone, with the per-turn term disabled."""
        return cls(per_turn=0.0)


class DialogueEnv:
    """reset/step episodic interface over a full dialogue pipeline."""

    def __init__(
        self,
        catalog,
        mode: str = "annotation",
        encoder_kind: str = "basic",
        reward: RewardSpec | None = None,
        patience: int = 30,
        p_comply: float = 0.9,
        p_remove: float = 0.05,
        nlu_engine=None,
        grammar=None,
        fault_step: int | None = None,
    ):
        if mode not in ("annotation", "nlu"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "nlu" and (nlu_engine is None or grammar is None):
            raise ValueError("nlu mode needs an NLU engine and a user grammar")
        self.catalog = catalog
        self.mode = mode
        self.encoder_kind = encoder_kind
        self._encode_fn, self.observation_dim = encoder_for(encoder_kind)
        self.reward = reward or RewardSpec.default()
        self.patience = patience
        self.p_comply = p_comply
        self.p_remove = p_remove
        self.nlu_engine = nlu_engine
        self.grammar = grammar
        self.fault_step = fault_step

        self.action_count = ACTION_COUNT
        self.max_episode_steps = patience
        self.active = False
        self.state = DialogueState()
        self.transcript: list[Utterance] = []

    # ------------------------------------------------------------------
    def reset(self, seed: int) -> np.ndarray:
        self.rng = np.random.default_rng(seed)
        profile = sample_profile(
            self.catalog,
            self.rng,
            patience=self.patience,
            p_comply=self.p_comply,
            p_remove=self.p_remove,
        )
        self.sim = UserSimulator(profile, self.rng)
        self.state = DialogueState()
        self.transcript = []
        self.step_index = 0
        self.active = True
        self.tracker_failed = False

        opening = self.sim.opening()
        self.state = update_state(self.state, opening, "user")
        self._record("user", opening)
        return self._encode()

    def _encode(self) -> np.ndarray:
        return self._encode_fn(self.state, self.patience)

    def _record(self, speaker: str, act: DialogueAct, text: str = "") -> None:
        self.transcript.append(
            Utterance(speaker, text, turn_index=len(self.transcript), acts=(act,))
        )

    def _agent_act(self, action: AgentAction) -> DialogueAct:
        return realize_agent_act(self.catalog, self.state, action)

    def _user_response(self, agent_act: DialogueAct) -> tuple[DialogueAct, str]:
        sim_act = self.sim.respond(agent_act)
        if self.mode == "annotation":
            return sim_act, ""
        text = render_user_text(sim_act, self.grammar, self.rng)
        parsed = self.nlu_engine.parse(text).act
        return parsed, text

    def _episodic_case(self) -> float:
        if self.state.accepted:
            return self.reward.accepted
        if self.state.recommended_items:
            return self.reward.none_accepted
        return self.reward.no_recommendation

    def step(self, action) -> tuple[np.ndarray, float, bool, dict]:
        if not self.active:
            raise InactiveEpisodeError("step() after episode end")
        action = AgentAction(int(action))
        reward = self.reward.per_turn
        done = False
        try:
            if self.fault_step is not None and self.step_index == self.fault_step:
                raise StateUpdateError("injected tracker fault")
            agent_act = self._agent_act(action)
            self.state = update_state(self.state, agent_act, "agent")
            self._record("agent", agent_act)
            if self.state.terminated:
                done = True
            else:
                user_act, text = self._user_response(agent_act)
                self.state = update_state(self.state, user_act, "user")
                self._record("user", user_act, text)
                if (
                    self.state.terminated
                    or self.state.accepted
                    or self.state.turn_count >= self.patience
                ):
                    done = True
            if done:
                reward += self._episodic_case()
        except StateUpdateError:
            self.tracker_failed = True
            done = True
            reward += self.reward.tracker_exception

        self.step_index += 1
        if done:
            self.active = False
        info = {
            "success": self.state.accepted and not self.tracker_failed,
            "tracker_failed": self.tracker_failed,
            "utterances": self.state.turn_count,
        }
        return self._encode(), reward, done, info
