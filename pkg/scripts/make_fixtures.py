"""Regenerate the bundled data fixtures (catalogs and labeled corpus).

Deterministic: running this twice produces byte-identical files. The test
suite regenerates the corpus and compares it against the bundled copy.
"""

from __future__ import annotations

import json
import pathlib
import sys

import numpy as np

DATA = pathlib.Path(__file__).resolve().parents[1] / "src" / "moviebot" / "data"

GENRES = ["action", "comedy", "drama", "horror", "thriller", "romance", "fantasy", "western"]
KEYWORDS = [
    "heist", "vampires", "robots", "dragons", "pirates", "submarine",
    "boxing", "chess", "espionage", "zombies", "aliens", "wizards",
]
DIRECTORS = [
    "maria varga", "henrik dahl", "amara osei", "tobias lindqvist",
    "ingrid halvorsen", "rafael moreno", "keiko tanaka", "dmitri volkov",
    "aisha rahman", "lucas ferreira",
]
ACTORS = [
    "elena petrova", "marcus webb", "priya sharma", "jonas bergman",
    "camille dubois", "oliver grant", "nadia hassan", "felix wagner",
    "rosa delgado", "viktor novak", "hannah klein", "david okafor",
    "lena fischer", "carlos mendez", "yuki sato", "omar farouk",
    "clara visser", "ethan doyle", "mira kovac", "paulo santos",
]
ADJECTIVES = [
    "crimson", "silent", "golden", "shattered", "endless",
    "frozen", "hollow", "scarlet", "midnight", "emerald",
]
NOUNS = [
    "harbor", "meridian", "covenant", "horizon", "labyrinth",
    "monsoon", "cathedral", "voyager", "paradox", "ember",
]

CORPUS_SEED = 7
CORPUS_N_PER_INTENT = 25
CORPUS_N_PER_SLOT = 25


def make_sample_catalog() -> list[dict]:
    rng = np.random.default_rng(42)
    rank = [int(r) + 1 for r in rng.permutation(100)]
    items = []
    for i in range(100):
        adj = ADJECTIVES[i // 10]
        noun = NOUNS[i % 10]
        n_genres = 1 + (i % 2)
        genres = [GENRES[(i + j) % len(GENRES)] for j in range(n_genres)]
        n_actors = 2 + (i % 2)
        actors = [ACTORS[(2 * i + j) % len(ACTORS)] for j in range(n_actors)]
        n_kw = 1 + (i % 2)
        keywords = [KEYWORDS[(i + j) % len(KEYWORDS)] for j in range(n_kw)]
        items.append(
            {
                "id": f"m{i + 1:03d}",
                "title": f"{adj} {noun}",
                "year": 1950 + i,
                "genres": genres,
                "director": DIRECTORS[i % len(DIRECTORS)],
                "actors": actors,
                "keywords": keywords,
                "rating": round(5.0 + float(rng.integers(0, 46)) / 10.0, 1),
                "popularity_rank": rank[i],
            }
        )
    return items


def make_toy_catalog() -> list[dict]:
    items = []
    for i in range(10):
        items.append(
            {
                "id": f"t{i + 1:02d}",
                "title": f"{ADJECTIVES[i]} {NOUNS[9 - i]}",
                "year": 1990 + i,
                "genres": ["comedy" if i < 5 else "action"],
                "director": DIRECTORS[i % 2],
                "actors": [ACTORS[i], ACTORS[(i + 1) % 10]],
                "keywords": [KEYWORDS[i % len(KEYWORDS)]],
                "rating": round(6.0 + 0.3 * i, 1),
                "popularity_rank": i + 1,
            }
        )
    return items


def write_jsonl(path: pathlib.Path, items: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(item) + "\n")
    print(f"wrote {len(items)} items to {path}")


def main() -> int:
    write_jsonl(DATA / "catalog_sample.jsonl", make_sample_catalog())
    write_jsonl(DATA / "toy_catalog.jsonl", make_toy_catalog())

    sys.path.insert(0, str(DATA.parents[1]))
    from moviebot.nlu.corpus import Grammar, generate_corpus
    from moviebot.rec.catalog import load_catalog

    catalog = load_catalog(DATA / "catalog_sample.jsonl")
    grammar = Grammar.load(DATA / "user_grammar.tsv")
    corpus = generate_corpus(
        grammar, catalog, CORPUS_N_PER_INTENT, CORPUS_N_PER_SLOT, seed=CORPUS_SEED
    )
    corpus.save(DATA / "corpus_500.tsv")
    print(f"wrote {len(corpus)} records to {DATA / 'corpus_500.tsv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
