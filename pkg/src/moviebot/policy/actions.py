"""The fixed 9-action inventory shared by every dialogue policy."""

from __future__ import annotations

import enum

from ..dialogue.acts import AgentIntent


class AgentAction(enum.IntEnum):
    """Versioned action indices; serialized policies depend on this order."""

    ELICIT_GENRE = 0
    ELICIT_ACTOR = 1
    ELICIT_DIRECTOR = 2
    ELICIT_KEYWORD = 3
    RECOMMEND = 4
    INFORM = 5
    CONTINUE_REC = 6
    RESTART = 7
    BYE = 8


ACTION_COUNT = len(AgentAction)

# action -> (agent intent, elicited slot or None). RECOMMEND/CONTINUE_REC
# both surface as RECOMMEND acts; CONTINUE_REC excludes already-shown items.
ACTION_INTENTS: dict[AgentAction, tuple[AgentIntent, str | None]] = {
    AgentAction.ELICIT_GENRE: (AgentIntent.ELICIT, "genre"),
    AgentAction.ELICIT_ACTOR: (AgentIntent.ELICIT, "actor"),
    AgentAction.ELICIT_DIRECTOR: (AgentIntent.ELICIT, "director"),
    AgentAction.ELICIT_KEYWORD: (AgentIntent.ELICIT, "keyword"),
    AgentAction.RECOMMEND: (AgentIntent.RECOMMEND, None),
    AgentAction.INFORM: (AgentIntent.INFORM, None),
    AgentAction.CONTINUE_REC: (AgentIntent.RECOMMEND, None),
    AgentAction.RESTART: (AgentIntent.RESTART_ACK, None),
    AgentAction.BYE: (AgentIntent.BYE, None),
}


def realize_agent_act(catalog, state, action: "AgentAction"):
    """Ground an abstract action into a concrete agent act for a state.

    RECOMMEND-family actions consult the catalog; an empty result set
    degrades to NO_RESULTS. INFORM reuses the most recent recommendation.
    """
    from ..dialogue.acts import DialogueAct
    from ..rec.catalog import recommend

    intent, slot = ACTION_INTENTS[AgentAction(int(action))]
    if intent is AgentIntent.ELICIT:
        return DialogueAct(intent, payload={"slot": slot})
    if intent is AgentIntent.RECOMMEND:
        exclude = (
            {item_id for item_id, _ in state.recommended_items}
            if AgentAction(int(action)) is AgentAction.CONTINUE_REC
            else set()
        )
        items = recommend(catalog, state.frame, exclude, k=1)
        if not items:
            return DialogueAct(AgentIntent.NO_RESULTS)
        item = items[0]
        return DialogueAct(
            intent,
            payload={"item_id": item.id, "title": item.title, "year": item.year},
        )
    if intent is AgentIntent.INFORM and state.recommended_items:
        item_id = state.recommended_items[-1][0]
        item = catalog.items.get(item_id)
        payload = {"item_id": item_id}
        if item is not None:
            payload.update(title=item.title, year=item.year)
        return DialogueAct(intent, payload=payload)
    return DialogueAct(intent)
