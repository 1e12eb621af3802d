"""Simulated-user goal profiles sampled from the catalog."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dialogue.acts import Slot


class EmptyCatalogError(Exception):
    pass


DEFAULT_PATIENCE = 30  # max utterances before the simulated user walks away
DEFAULT_P_COMPLY = 0.9
DEFAULT_P_REMOVE = 0.05


@dataclass
class UserProfile:
    constraints: dict[Slot, tuple[str, int]]
    target_items: frozenset[str]
    patience: int = DEFAULT_PATIENCE
    p_comply: float = DEFAULT_P_COMPLY
    p_remove: float = DEFAULT_P_REMOVE

    def __post_init__(self):
        if not self.target_items:
            raise ValueError("profile must have at least one target item")
        for name in ("p_comply", "p_remove"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


def sample_profile(
    catalog,
    rng: np.random.Generator,
    patience: int = DEFAULT_PATIENCE,
    p_comply: float = DEFAULT_P_COMPLY,
    p_remove: float = DEFAULT_P_REMOVE,
) -> UserProfile:
    """Derive 1-3 positive constraints from a uniformly drawn seed item.

    Genre is always constrained; actor and director are each added with
    probability 0.5. Target items are the catalog entries satisfying every
    constraint, and always include the seed item.
    """
    if not catalog.items:
        raise EmptyCatalogError("cannot sample a profile from an empty catalog")
    item_ids = sorted(catalog.items)
    seed_item = catalog.items[item_ids[int(rng.integers(len(item_ids)))]]

    constraints: dict[Slot, tuple[str, int]] = {}
    genres = sorted(g.lower() for g in seed_item.genres)
    constraints[Slot.GENRE] = (genres[int(rng.integers(len(genres)))], 1)
    if seed_item.actors and rng.random() < 0.5:
        actors = sorted(a.lower() for a in seed_item.actors)
        constraints[Slot.ACTOR] = (actors[int(rng.integers(len(actors)))], 1)
    if rng.random() < 0.5:
        constraints[Slot.DIRECTOR] = (seed_item.director.lower(), 1)

    frame = {slot: ((value, polarity),) for slot, (value, polarity) in constraints.items()}
    from ..rec.catalog import recommend

    matches = recommend(catalog, frame, exclude=set(), k=len(catalog.items))
    return UserProfile(
        constraints=constraints,
        target_items=frozenset(it.id for it in matches),
        patience=patience,
        p_comply=p_comply,
        p_remove=p_remove,
    )
