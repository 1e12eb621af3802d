from .acts import (
    AGENT_INTENTS,
    SLOT_FREE_INTENTS,
    SLOT_REQUIRED_INTENTS,
    SLOTS,
    USER_INTENTS,
    AgentIntent,
    DialogueAct,
    Slot,
    SlotValue,
    UserIntent,
    Utterance,
    load_vocabulary,
)
from .nlg import (
    MissingTemplateError,
    NlgTemplateTable,
    UnresolvedPlaceholderError,
    generate_response,
)
from .state import (
    BASIC_DIM,
    DEFAULT_MAX_TURNS,
    WITH_INTENTS_DIM,
    DialogueState,
    StateUpdateError,
    encode_state_basic,
    encode_state_with_intents,
    encoder_for,
    update_state,
)

__all__ = [
    "AGENT_INTENTS",
    "SLOT_FREE_INTENTS",
    "SLOT_REQUIRED_INTENTS",
    "SLOTS",
    "USER_INTENTS",
    "AgentIntent",
    "DialogueAct",
    "Slot",
    "SlotValue",
    "UserIntent",
    "Utterance",
    "load_vocabulary",
    "MissingTemplateError",
    "NlgTemplateTable",
    "UnresolvedPlaceholderError",
    "generate_response",
    "BASIC_DIM",
    "DEFAULT_MAX_TURNS",
    "WITH_INTENTS_DIM",
    "DialogueState",
    "StateUpdateError",
    "encode_state_basic",
    "encode_state_with_intents",
    "encoder_for",
    "update_state",
]
