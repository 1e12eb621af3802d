"""Movie catalog ingestion, inverted indexes, and frame-based retrieval."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from ..dialogue.acts import Slot

logger = logging.getLogger(__name__)


class ParseError(Exception):
    """A catalog line failed to parse; the message carries the line number."""


class DuplicateIdError(Exception):
    """Two catalog lines share an item id."""


@dataclass(frozen=True)
class Item:
    id: str
    title: str
    year: int
    genres: frozenset[str]
    director: str
    actors: frozenset[str]
    keywords: frozenset[str]
    rating: float
    popularity_rank: int

    def __post_init__(self):
        if not self.title:
            raise ValueError(f"item {self.id}: empty title")
        if not 1900 <= self.year <= 2100:
            raise ValueError(f"item {self.id}: year {self.year} out of range")
        if not 0.0 <= self.rating <= 10.0:
            raise ValueError(f"item {self.id}: rating {self.rating} out of range")


@dataclass
class Catalog:
    items: dict[str, Item] = field(default_factory=dict)
    genre_index: dict[str, set[str]] = field(default_factory=dict)
    person_index: dict[str, set[str]] = field(default_factory=dict)
    keyword_index: dict[str, set[str]] = field(default_factory=dict)
    title_ngram_index: dict[tuple[str, ...], set[str]] = field(default_factory=dict)

    def add(self, item: Item) -> None:
        if item.id in self.items:
            raise DuplicateIdError(f"duplicate item id {item.id!r}")
        self.items[item.id] = item
        for genre in item.genres:
            self.genre_index.setdefault(genre.lower(), set()).add(item.id)
        self.person_index.setdefault(item.director.lower(), set()).add(item.id)
        for actor in item.actors:
            self.person_index.setdefault(actor.lower(), set()).add(item.id)
        for kw in item.keywords:
            self.keyword_index.setdefault(kw.lower(), set()).add(item.id)
        tokens = tuple(item.title.lower().split())
        for n in range(1, len(tokens) + 1):
            for i in range(len(tokens) - n + 1):
                self.title_ngram_index.setdefault(tokens[i : i + n], set()).add(item.id)

    def rebuild_indexes(self) -> "Catalog":
        fresh = Catalog()
        for item in self.items.values():
            fresh.add(item)
        return fresh


def _item_from_record(record: dict) -> Item:
    return Item(
        id=str(record["id"]),
        title=record["title"],
        year=int(record["year"]),
        genres=frozenset(record.get("genres", [])),
        director=record["director"],
        actors=frozenset(record.get("actors", [])),
        keywords=frozenset(record.get("keywords", [])),
        rating=float(record["rating"]),
        popularity_rank=int(record["popularity_rank"]),
    )


def load_catalog(path) -> Catalog:
    """Read a JSON-lines catalog file, one item per line."""
    catalog = Catalog()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                item = _item_from_record(record)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            catalog.add(item)
    if not catalog.items:
        logger.warning("catalog %s is empty", path)
    else:
        logger.info("loaded %d items from %s", len(catalog.items), path)
    return catalog


def _matches(item: Item, slot: Slot, value: str) -> bool:
    value = value.lower()
    if slot is Slot.GENRE:
        return value in {g.lower() for g in item.genres}
    if slot is Slot.DIRECTOR:
        return item.director.lower() == value
    if slot is Slot.ACTOR:
        return value in {a.lower() for a in item.actors}
    if slot is Slot.KEYWORD:
        return value in {k.lower() for k in item.keywords}
    if slot is Slot.TITLE:
        return item.title.lower() == value
    if slot is Slot.YEAR:
        if value.endswith("s") and value[:-1].isdigit():
            decade = int(value[:-1])
            return decade <= item.year < decade + 10
        return value.isdigit() and item.year == int(value)
    raise ValueError(f"unknown slot {slot}")


def recommend(catalog: Catalog, frame: dict, exclude: set[str], k: int) -> list[Item]:
    """Items matching every positive frame constraint and no negative one.

    Ranked by rating descending, then popularity_rank ascending, then id.
    An empty frame ranks the whole catalog; an empty result signals
    NO_RESULTS to the caller.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    results = []
    for item in catalog.items.values():
        if item.id in exclude:
            continue
        ok = True
        for slot, values in frame.items():
            for value, polarity in values:
                hit = _matches(item, slot, value)
                if polarity > 0 and not hit:
                    ok = False
                elif polarity < 0 and hit:
                    ok = False
            if not ok:
                break
        if ok:
            results.append(item)
    results.sort(key=lambda it: (-it.rating, it.popularity_rank, it.id))
    return results[:k]


def count_matches(catalog: Catalog, frame: dict, exclude: set[str] | None = None) -> int:
    return len(recommend(catalog, frame, exclude or set(), k=max(1, len(catalog.items))))
