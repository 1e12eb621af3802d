"""Transparent, event-sourced persistent user model.

The preference log is append-only; the current view is derived by replay
with latest-event-wins conflict handling, so the full history stays
inspectable.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field, replace

from ..dialogue.acts import DialogueAct, Slot, UserIntent, Utterance

STORE_VERSION = 1

SHORT_TERM = "short_term"
LONG_TERM = "long_term"


class UnknownUserError(Exception):
    pass


class UnknownSessionError(Exception):
    pass


class StorageError(Exception):
    pass


@dataclass(frozen=True)
class Preference:
    """One preference event. ``tombstone`` marks a removal."""

    slot: Slot
    value: str
    polarity: int
    scope: str  # short_term | long_term
    source_utterance_id: str | None
    timestamp: float
    session_id: str | None = None
    tombstone: bool = False

    def to_record(self) -> dict:
        return {
            "slot": self.slot.value,
            "value": self.value,
            "polarity": self.polarity,
            "scope": self.scope,
            "source_utterance_id": self.source_utterance_id,
            "timestamp": self.timestamp,
            "session_id": self.session_id,
            "tombstone": self.tombstone,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Preference":
        return cls(
            slot=Slot(rec["slot"]),
            value=rec["value"],
            polarity=rec["polarity"],
            scope=rec["scope"],
            source_utterance_id=rec.get("source_utterance_id"),
            timestamp=rec["timestamp"],
            session_id=rec.get("session_id"),
            tombstone=rec.get("tombstone", False),
        )


@dataclass(frozen=True)
class UserModel:
    user_id: str
    events: tuple[Preference, ...] = ()
    utterances: tuple[tuple[str, str], ...] = ()  # (utterance_id, text)
    accepted_items: tuple[str, ...] = ()
    rejected_items: tuple[str, ...] = ()
    promoted_sessions: tuple[str, ...] = ()

    def current_view(self, scope: str | None = None) -> dict[tuple[Slot, str], int]:
        """Latest-wins projection of the event log onto (slot, value) pairs."""
        view: dict[tuple[Slot, str], int] = {}
        for ev in self.events:
            if scope is not None and ev.scope != scope:
                continue
            key = (ev.slot, ev.value)
            if ev.tombstone:
                view.pop(key, None)
            else:
                view[key] = ev.polarity
        return view


def _now() -> float:
    return time.time()


def update_user_model(
    model: UserModel,
    act: DialogueAct,
    utterance: Utterance | None,
    scope: str = SHORT_TERM,
    session_id: str | None = None,
) -> UserModel:
    """Append the events an act implies; nothing is ever deleted."""
    if not isinstance(act.intent, UserIntent):
        raise ValueError("user model updates take user acts only")
    events = list(model.events)
    utterances = list(model.utterances)
    accepted = list(model.accepted_items)
    rejected = list(model.rejected_items)

    utterance_id = None
    if utterance is not None:
        utterance_id = f"{session_id or 'local'}:{utterance.turn_index}"

    ts = max((ev.timestamp for ev in model.events), default=0.0)
    ts = max(ts, _now())

    if act.intent is UserIntent.REVEAL:
        for sv in act.slot_values:
            events.append(
                Preference(sv.slot, sv.value, sv.polarity, scope, utterance_id, ts, session_id)
            )
        if utterance is not None:
            utterances.append((utterance_id, utterance.text))
    elif act.intent is UserIntent.REMOVE_PREFERENCES:
        for sv in act.slot_values:
            events.append(
                Preference(
                    sv.slot, sv.value, sv.polarity, scope, utterance_id, ts,
                    session_id, tombstone=True,
                )
            )
    elif act.intent is UserIntent.ACCEPT:
        item_id = (act.payload or {}).get("item_id")
        if item_id:
            accepted.append(item_id)
    elif act.intent is UserIntent.REJECT:
        item_id = (act.payload or {}).get("item_id")
        if item_id:
            rejected.append(item_id)

    return replace(
        model,
        events=tuple(events),
        utterances=tuple(utterances),
        accepted_items=tuple(accepted),
        rejected_items=tuple(rejected),
    )


def promote_preferences(model: UserModel, session_id: str) -> UserModel:
    """Copy a session's short-term view into long-term scope, once."""
    if session_id in model.promoted_sessions:
        return model
    session_events = [ev for ev in model.events if ev.session_id == session_id]
    view: dict[tuple[Slot, str], int] = {}
    for ev in session_events:
        if ev.scope != SHORT_TERM:
            continue
        key = (ev.slot, ev.value)
        if ev.tombstone:
            view.pop(key, None)
        else:
            view[key] = ev.polarity
    ts = _now()
    new_events = [
        Preference(slot, value, polarity, LONG_TERM, None, ts, session_id)
        for (slot, value), polarity in view.items()
    ]
    return replace(
        model,
        events=model.events + tuple(new_events),
        promoted_sessions=model.promoted_sessions + (session_id,),
    )


_SLOT_PHRASES = {
    Slot.GENRE: "{} movies",
    Slot.DIRECTOR: "movies directed by {}",
    Slot.ACTOR: "movies with {}",
    Slot.KEYWORD: "movies about {}",
    Slot.TITLE: "movies like {}",
    Slot.YEAR: "movies from {}",
}


def summarize_user_model(model: UserModel) -> list[str]:
    """Render the current view as summary statements.

    Long-term statements first; within a scope, slot order then value
    lexicographic; likes before dislikes per slot.
    """
    statements: list[str] = []
    for scope in (LONG_TERM, SHORT_TERM):
        view = model.current_view(scope)
        for slot in Slot:
            for polarity, verb in ((1, "like"), (-1, "dislike")):
                values = sorted(
                    value for (s, value), p in view.items() if s is slot and p == polarity
                )
                if not values:
                    continue
                joined = values[0] if len(values) == 1 else ", ".join(values[:-1]) + " and " + values[-1]
                statements.append(f"You {verb} {_SLOT_PHRASES[slot].format(joined)}.")
    if not statements:
        return ["I don't know your preferences yet."]
    return statements


class UserModelStore:
    """Directory of per-user append-only JSON-lines event logs.

    Each user file starts with a version header line; an ``index.json``
    lists known users. Writes are serialized per user id.
    """

    def __init__(self, root):
        self.root = str(root)
        os.makedirs(self.root, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._index_path = os.path.join(self.root, "index.json")
        if not os.path.exists(self._index_path):
            self._write_index([])

    def _write_index(self, users: list[str]) -> None:
        with open(self._index_path, "w", encoding="utf-8") as fh:
            json.dump({"version": STORE_VERSION, "users": sorted(users)}, fh)

    def _read_index(self) -> list[str]:
        try:
            with open(self._index_path, encoding="utf-8") as fh:
                return json.load(fh)["users"]
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise StorageError(f"corrupt store index: {exc}") from exc

    def _lock_for(self, user_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(user_id, threading.Lock())

    def _user_path(self, user_id: str) -> str:
        safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in user_id)
        return os.path.join(self.root, f"{safe}.jsonl")

    def users(self) -> list[str]:
        return self._read_index()

    def persist(self, model: UserModel) -> None:
        with self._lock_for(model.user_id):
            path = self._user_path(model.user_id)
            payload = {
                "user_id": model.user_id,
                "utterances": list(model.utterances),
                "accepted_items": list(model.accepted_items),
                "rejected_items": list(model.rejected_items),
                "promoted_sessions": list(model.promoted_sessions),
            }
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(json.dumps({"version": STORE_VERSION, "meta": payload}) + "\n")
                for ev in model.events:
                    fh.write(json.dumps(ev.to_record()) + "\n")
            users = set(self._read_index())
            if model.user_id not in users:
                users.add(model.user_id)
                self._write_index(sorted(users))

    def load(self, user_id: str) -> UserModel:
        if user_id not in self._read_index():
            raise UnknownUserError(f"no stored user model for {user_id!r}")
        path = self._user_path(user_id)
        try:
            with open(path, encoding="utf-8") as fh:
                header = json.loads(fh.readline())
                if header.get("version") != STORE_VERSION:
                    raise StorageError(f"unsupported store version in {path}")
                meta = header["meta"]
                events = tuple(Preference.from_record(json.loads(line)) for line in fh if line.strip())
        except OSError as exc:
            raise StorageError(str(exc)) from exc
        return UserModel(
            user_id=meta["user_id"],
            events=events,
            utterances=tuple(tuple(u) for u in meta["utterances"]),
            accepted_items=tuple(meta["accepted_items"]),
            rejected_items=tuple(meta["rejected_items"]),
            promoted_sessions=tuple(meta["promoted_sessions"]),
        )
