"""Dialogue act vocabulary: intents, slots, and slot-value annotations.

The intent and slot orderings below are versioned; one-hot encodings and
serialized models depend on them, so symbols must never be reordered.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

VOCABULARY_VERSION = 1


class UserIntent(enum.Enum):
    REVEAL = "REVEAL"
    INQUIRE = "INQUIRE"
    REMOVE_PREFERENCES = "REMOVE_PREFERENCES"
    ACCEPT = "ACCEPT"
    REJECT = "REJECT"
    CONTINUE = "CONTINUE"
    RESTART = "RESTART"
    HI = "HI"
    BYE = "BYE"
    ACKNOWLEDGE = "ACKNOWLEDGE"
    DENY = "DENY"
    UNK = "UNK"

    @property
    def index(self) -> int:
        return USER_INTENTS.index(self)


class AgentIntent(enum.Enum):
    WELCOME = "WELCOME"
    ELICIT = "ELICIT"
    RECOMMEND = "RECOMMEND"
    INFORM = "INFORM"
    NO_RESULTS = "NO_RESULTS"
    COUNT_RESULTS = "COUNT_RESULTS"
    RESTART_ACK = "RESTART_ACK"
    BYE = "BYE"

    @property
    def index(self) -> int:
        return AGENT_INTENTS.index(self)


USER_INTENTS: tuple[UserIntent, ...] = tuple(UserIntent)
AGENT_INTENTS: tuple[AgentIntent, ...] = tuple(AgentIntent)

# User intents that never carry slot values.
SLOT_FREE_INTENTS = frozenset(
    {
        UserIntent.HI,
        UserIntent.BYE,
        UserIntent.ACCEPT,
        UserIntent.REJECT,
        UserIntent.ACKNOWLEDGE,
        UserIntent.DENY,
        UserIntent.CONTINUE,
        UserIntent.RESTART,
    }
)

# User intents that must carry at least one slot value.
SLOT_REQUIRED_INTENTS = frozenset(
    {UserIntent.REVEAL, UserIntent.REMOVE_PREFERENCES}
)


class Slot(enum.Enum):
    GENRE = "genre"
    DIRECTOR = "director"
    ACTOR = "actor"
    KEYWORD = "keyword"
    TITLE = "title"
    YEAR = "year"

    @property
    def index(self) -> int:
        return SLOTS.index(self)


SLOTS: tuple[Slot, ...] = tuple(Slot)

YEAR_MIN, YEAR_MAX = 1900, 2100


@dataclass(frozen=True)
class SlotValue:
    """A normalized slot annotation with polarity and optional source span."""

    slot: Slot
    value: str
    polarity: int = 1
    span: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if self.polarity not in (1, -1):
            raise ValueError(f"polarity must be +1 or -1, got {self.polarity}")
        if self.slot is Slot.YEAR:
            year = int(self.value)
            if not YEAR_MIN <= year <= YEAR_MAX:
                raise ValueError(f"year {year} outside [{YEAR_MIN}, {YEAR_MAX}]")
        if self.span is not None:
            lo, hi = self.span
            if hi <= lo or lo < 0:
                raise ValueError(f"span {self.span} is empty or negative")


@dataclass(frozen=True)
class DialogueAct:
    """An intent plus its slot-value annotations.

    The lingua franca between NLU, state tracker, policy, and simulator.
    ``intent`` is either a :class:`UserIntent` or an :class:`AgentIntent`.
    """

    intent: UserIntent | AgentIntent
    slot_values: tuple[SlotValue, ...] = ()
    # Agent-side payload: item metadata for RECOMMEND/INFORM, result count
    # for COUNT_RESULTS. Kept out of slot_values so user/agent acts share
    # one shape.
    payload: dict | None = None

    def __post_init__(self) -> None:
        if isinstance(self.slot_values, list):
            object.__setattr__(self, "slot_values", tuple(self.slot_values))
        if self.intent in SLOT_FREE_INTENTS and self.slot_values:
            raise ValueError(f"{self.intent.value} must not carry slot values")
        if self.intent in SLOT_REQUIRED_INTENTS and not self.slot_values:
            raise ValueError(f"{self.intent.value} requires at least one slot value")

    @property
    def is_user(self) -> bool:
        return isinstance(self.intent, UserIntent)


@dataclass(frozen=True)
class Utterance:
    """A single turn's surface text with optional act annotations."""

    speaker: str  # "user" | "agent"
    text: str
    turn_index: int
    acts: tuple[DialogueAct, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.speaker not in ("user", "agent"):
            raise ValueError(f"speaker must be 'user' or 'agent', got {self.speaker!r}")
        if self.turn_index < 0:
            raise ValueError("turn_index must be non-negative")


def load_vocabulary(path) -> None:
    """Validate a versioned vocabulary file against the compiled ordering.

    The file lists sections ``[user_intents]``, ``[agent_intents]`` and
    ``[slots]``, one symbol per line in encoding order, preceded by a
    ``version=N`` header. Raises ValueError on any mismatch so stale
    config files fail loudly instead of silently re-indexing encodings.
    """
    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    version = None
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("version="):
                version = int(line.split("=", 1)[1])
            elif line.startswith("[") and line.endswith("]"):
                current = sections.setdefault(line[1:-1], [])
            elif current is not None:
                current.append(line)
    if version != VOCABULARY_VERSION:
        raise ValueError(f"vocabulary version {version} != {VOCABULARY_VERSION}")
    expected = {
        "user_intents": [i.value for i in USER_INTENTS],
        "agent_intents": [i.value for i in AGENT_INTENTS],
        "slots": [s.value for s in SLOTS],
    }
    for name, symbols in expected.items():
        if sections.get(name) != symbols:
            raise ValueError(f"section {name} does not match compiled vocabulary")
