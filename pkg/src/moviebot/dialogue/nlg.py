"""Template-based natural language generation for agent acts."""

from __future__ import annotations

import string

import numpy as np

from .acts import AgentIntent, DialogueAct
from .state import DialogueState


class MissingTemplateError(Exception):
    """No template is registered for an (intent, slot) pair."""


class UnresolvedPlaceholderError(Exception):
    """A chosen template references a placeholder the act cannot fill."""


class NlgTemplateTable:
    """Mapping from (agent intent, optional slot name) to response templates.

    Loaded from a TAB-separated file: ``intent<TAB>slot-or-"-"<TAB>template``.
    Placeholders: {title}, {year}, {slot}, {count}.
    """

    def __init__(self, entries: dict[tuple[AgentIntent, str | None], list[str]]):
        self.entries = entries
        missing = [i for i in AgentIntent if not self.candidates(i)]
        if missing:
            raise ValueError(f"no templates for agent intents: {missing}")

    @classmethod
    def load(cls, path) -> "NlgTemplateTable":
        entries: dict[tuple[AgentIntent, str | None], list[str]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ValueError(f"{path}:{lineno}: expected 3 TAB fields")
                intent_name, slot, template = parts
                intent = AgentIntent(intent_name)
                key = (intent, None if slot == "-" else slot)
                entries.setdefault(key, []).append(template)
        return cls(entries)

    def candidates(self, intent: AgentIntent, slot: str | None = None) -> list[str]:
        """Templates for (intent, slot), falling back to the slot-free entry."""
        if slot is not None and (intent, slot) in self.entries:
            return self.entries[(intent, slot)]
        return self.entries.get((intent, None), [])


def _placeholder_values(act: DialogueAct) -> dict[str, str]:
    values: dict[str, str] = {}
    payload = act.payload or {}
    for key in ("title", "year", "count", "slot"):
        if key in payload:
            values[key] = str(payload[key])
    if "slot" not in values and act.slot_values:
        values["slot"] = act.slot_values[0].slot.value
    return values


def generate_response(
    act: DialogueAct,
    state: DialogueState,
    templates: NlgTemplateTable,
    rng_seed: int,
) -> str:
    """Render an agent act to text; same seed, same act -> same output."""
    if not isinstance(act.intent, AgentIntent):
        raise ValueError(f"generate_response needs an agent act, got {act.intent}")
    slot = (act.payload or {}).get("slot")
    if slot is None and act.slot_values:
        slot = act.slot_values[0].slot.value
    candidates = templates.candidates(act.intent, slot)
    if not candidates:
        raise MissingTemplateError(f"no template for ({act.intent.value}, {slot})")

    rng = np.random.default_rng(rng_seed)
    template = candidates[int(rng.integers(len(candidates)))]

    values = _placeholder_values(act)
    needed = {
        name
        for _, name, _, _ in string.Formatter().parse(template)
        if name is not None
    }
    unresolved = needed - values.keys()
    if unresolved:
        raise UnresolvedPlaceholderError(
            f"template {template!r} needs {sorted(unresolved)} not present in act"
        )
    return template.format(**{k: values[k] for k in needed})
