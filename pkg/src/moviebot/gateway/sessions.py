"""Chat sessions: the NLU -> tracker -> policy -> recsys -> NLG pipeline
behind the wire protocol, shared by the REST API, the persistent channel,
and the terminal REPL."""

from __future__ import annotations

import secrets
import time
from dataclasses import dataclass, field, replace

from ..dialogue.acts import AgentIntent, DialogueAct, Utterance
from ..dialogue.nlg import NlgTemplateTable, generate_response
from ..dialogue.state import DialogueState, StateUpdateError, encoder_for, update_state
from ..policy.actions import AgentAction, realize_agent_act
from ..rec.usermodel import (
    LONG_TERM,
    SHORT_TERM,
    UnknownUserError,
    UserModel,
    promote_preferences,
    update_user_model,
)

WIRE_TYPES = (
    "user_message",
    "agent_message",
    "recommendation",
    "user_model",
    "error",
    "system",
)

DEFAULT_IDLE_TIMEOUT = 30 * 60.0  # seconds


class UnknownSessionError(Exception):
    pass


class TerminatedSessionError(Exception):
    pass


class NotAuthenticatedError(Exception):
    pass


@dataclass(frozen=True)
class WireMessage:
    """One protocol frame. Serializes with exactly four top-level keys."""

    type: str
    session: str
    payload: dict
    seq: int

    def __post_init__(self):
        if self.type not in WIRE_TYPES:
            raise ValueError(f"unknown wire message type {self.type!r}")

    def to_dict(self) -> dict:
        return {
            "type": self.type,
            "session": self.session,
            "payload": self.payload,
            "seq": self.seq,
        }


@dataclass
class Session:
    session_id: str
    state: DialogueState
    user_id: str | None = None
    user_model: UserModel | None = None
    created: float = field(default_factory=time.time)
    last_activity: float = field(default_factory=time.time)
    seq: int = 0
    turn_index: int = 0
    terminated: bool = False
    pending: list[WireMessage] = field(default_factory=list)

    def next_seq(self) -> int:
        self.seq += 1
        return self.seq

    def emit(self, type_: str, payload: dict) -> WireMessage:
        return WireMessage(type_, self.session_id, payload, self.next_seq())


class SessionManager:
    """Owns all live sessions and runs the full per-message pipeline."""

    def __init__(
        self,
        catalog,
        nlu_engine,
        policy,
        templates: NlgTemplateTable,
        user_store=None,
        auth_store=None,
        encoder_kind: str = "basic",
        idle_timeout: float = DEFAULT_IDLE_TIMEOUT,
        seed: int = 0,
    ):
        self.catalog = catalog
        self.nlu_engine = nlu_engine
        self.policy = policy
        self.templates = templates
        self.user_store = user_store
        self.auth_store = auth_store
        self._encode_fn, _ = encoder_for(encoder_kind)
        self.idle_timeout = idle_timeout
        self.seed = seed
        self.sessions: dict[str, Session] = {}

    # ------------------------------------------------------------------
    def create_session(self) -> Session:
        session_id = secrets.token_hex(16)  # 128-bit id
        sess = Session(session_id=session_id, state=DialogueState())
        welcome = DialogueAct(AgentIntent.WELCOME)
        sess.state = update_state(sess.state, welcome, "agent")
        sess.turn_index += 1
        sess.pending.append(
            sess.emit(
                "agent_message",
                {"text": self._render(welcome, sess), "intent": welcome.intent.value},
            )
        )
        self.sessions[session_id] = sess
        return sess

    def _get(self, session_id: str) -> Session:
        sess = self.sessions.get(session_id)
        now = time.time()
        if sess is not None and now - sess.last_activity > self.idle_timeout:
            del self.sessions[session_id]
            sess = None
        if sess is None:
            raise UnknownSessionError(f"unknown session {session_id!r}")
        sess.last_activity = now
        return sess

    def _render(self, act: DialogueAct, sess: Session) -> str:
        return generate_response(act, sess.state, self.templates, self.seed + sess.seq)

    def drain(self, session_id: str) -> list[WireMessage]:
        """Hand over any queued messages (the WELCOME after creation)."""
        sess = self._get(session_id)
        out, sess.pending = sess.pending, []
        return out

    # ------------------------------------------------------------------
    def _soft_reset(self, sess: Session, reason: str) -> list[WireMessage]:
        out = [sess.emit("error", {"text": f"I lost track of that: {reason}"})]
        sess.state = DialogueState()
        welcome = DialogueAct(AgentIntent.WELCOME)
        sess.state = update_state(sess.state, welcome, "agent")
        sess.turn_index += 1
        out.append(
            sess.emit(
                "agent_message",
                {"text": self._render(welcome, sess), "intent": welcome.intent.value},
            )
        )
        return out

    def _note_user_act(self, sess: Session, act: DialogueAct, utt: Utterance) -> None:
        if sess.user_id is None or sess.user_model is None:
            return  # anonymous sessions never touch the persistent store
        sess.user_model = update_user_model(
            sess.user_model, act, utt, SHORT_TERM, sess.session_id
        )
        if self.user_store is not None:
            self.user_store.persist(sess.user_model)

    def _finish(self, sess: Session) -> None:
        """Clean session end: promote short-term preferences, persist."""
        sess.terminated = True
        if sess.user_id is None or sess.user_model is None:
            return
        sess.user_model = promote_preferences(sess.user_model, sess.session_id)
        if self.user_store is not None:
            self.user_store.persist(sess.user_model)

    def _explanation(self, state: DialogueState) -> str:
        likes = [value for _, value, pol in state.frame_pairs() if pol > 0]
        if not likes:
            return "A highly rated pick."
        return "Because you asked for " + ", ".join(likes) + "."

    def _choose_action(self, state: DialogueState) -> AgentAction:
        if hasattr(self.policy, "act_on_state"):
            return AgentAction(int(self.policy.act_on_state(state)))
        return AgentAction(int(self.policy.act(self._encode_fn(state))))

    def handle_user_message(self, session_id: str, text: str) -> list[WireMessage]:
        sess = self._get(session_id)
        if sess.terminated:
            raise TerminatedSessionError(f"session {session_id!r} has ended")
        out, sess.pending = sess.pending, []

        user_act = self.nlu_engine.parse(text).act
        utt = Utterance("user", text, sess.turn_index, (user_act,))
        try:
            sess.state = update_state(sess.state, user_act, "user")
        except StateUpdateError as exc:
            return out + self._soft_reset(sess, str(exc))
        sess.turn_index += 1
        self._note_user_act(sess, user_act, utt)

        if sess.state.terminated:  # user closed the conversation
            self._finish(sess)
            bye = DialogueAct(AgentIntent.BYE)
            out.append(
                sess.emit(
                    "agent_message",
                    {"text": self._render(bye, sess), "intent": bye.intent.value},
                )
            )
            return out

        action = self._choose_action(sess.state)
        agent_act = realize_agent_act(self.catalog, sess.state, action)
        try:
            sess.state = update_state(sess.state, agent_act, "agent")
        except StateUpdateError as exc:
            return out + self._soft_reset(sess, str(exc))
        sess.turn_index += 1

        out.append(
            sess.emit(
                "agent_message",
                {"text": self._render(agent_act, sess), "intent": agent_act.intent.value},
            )
        )
        if agent_act.intent is AgentIntent.RECOMMEND:
            payload = dict(agent_act.payload or {})
            item = self.catalog.items.get(payload.get("item_id"))
            if item is not None:
                payload.update(
                    genres=sorted(item.genres),
                    director=item.director,
                    rating=item.rating,
                )
            payload["explanation"] = self._explanation(sess.state)
            out.append(sess.emit("recommendation", payload))
        if agent_act.intent is AgentIntent.BYE or sess.state.terminated:
            self._finish(sess)
        return out

    # ------------------------------------------------------------------
    def login(self, session_id: str, user_id: str, password: str) -> WireMessage:
        sess = self._get(session_id)
        if self.auth_store is None:
            raise NotAuthenticatedError("server has no credential store")
        self.auth_store.verify(user_id, password)  # raises on failure
        if sess.user_id != user_id:
            sess.user_id = user_id
            try:
                model = (
                    self.user_store.load(user_id)
                    if self.user_store is not None
                    else UserModel(user_id)
                )
            except UnknownUserError:
                model = UserModel(user_id)
            sess.user_model = model
            sess.state = replace(
                sess.state, frame=self._merge_long_term(sess.state, model)
            )
        return sess.emit("system", {"text": f"Welcome back, {user_id}.", "user": user_id})

    @staticmethod
    def _merge_long_term(state: DialogueState, model: UserModel) -> dict:
        """Stored long-term pairs join the frame; in-session entries win."""
        frame = {slot: tuple(values) for slot, values in state.frame.items()}
        for (slot, value), polarity in sorted(
            model.current_view(LONG_TERM).items(),
            key=lambda kv: (kv[0][0].index, kv[0][1]),
        ):
            values = frame.get(slot, ())
            if any(v == value for v, _ in values):
                continue
            frame[slot] = values + ((value, polarity),)
        return frame

    def get_user_model(self, session_id: str, form: str = "summary") -> WireMessage:
        sess = self._get(session_id)
        if sess.user_id is None or sess.user_model is None:
            raise NotAuthenticatedError("session is anonymous")
        if form not in ("raw", "summary"):
            raise ValueError(f"unknown user-model form {form!r}")
        model = sess.user_model
        if form == "summary":
            from ..rec.usermodel import summarize_user_model

            payload = {"form": "summary", "statements": summarize_user_model(model)}
        else:
            pairs = [
                {
                    "slot": slot.value,
                    "value": value,
                    "polarity": polarity,
                    "scope": scope,
                }
                for scope in (LONG_TERM, SHORT_TERM)
                for (slot, value), polarity in sorted(
                    model.current_view(scope).items(),
                    key=lambda kv: (kv[0][0].index, kv[0][1]),
                )
            ]
            payload = {
                "form": "raw",
                "pairs": pairs,
                "utterance_count": len(model.utterances),
            }
        return sess.emit("user_model", payload)

    def end_session(self, session_id: str) -> None:
        sess = self._get(session_id)
        self._finish(sess)
        del self.sessions[session_id]
