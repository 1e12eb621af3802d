"""Hashed lexical features standing in for a pretrained text encoder.

Feature indices come from a fixed 64-bit FNV-1a hash folded into a
2^18-dimensional space, so encodings are bit-identical across platforms
and runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .tokenizer import tokenize_with_case

HASH_DIM = 2**18

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_FNV_MASK = (1 << 64) - 1


def feature_hash(name: str, dim: int = HASH_DIM) -> int:
    """64-bit FNV-1a of the UTF-8 feature name, folded modulo ``dim``."""
    h = _FNV_OFFSET
    for byte in name.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _FNV_MASK
    return h % dim


@dataclass
class Lexicons:
    """Token- and phrase-level lexicons derived from the catalog.

    ``*_tokens`` are single-token membership sets used as CRF features;
    the phrase sets are used by the rule-based engine for longest-match
    lookup.
    """

    genres: set[str] = field(default_factory=set)
    people: set[str] = field(default_factory=set)
    keywords: set[str] = field(default_factory=set)
    titles: set[tuple[str, ...]] = field(default_factory=set)
    stoplist: set[str] = field(default_factory=set)

    genre_tokens: set[str] = field(default_factory=set)
    person_tokens: set[str] = field(default_factory=set)
    keyword_tokens: set[str] = field(default_factory=set)
    title_tokens: set[str] = field(default_factory=set)

    @classmethod
    def from_catalog(cls, catalog, stoplist: set[str] | None = None) -> "Lexicons":
        lex = cls(stoplist=set(stoplist or ()))
        for item in catalog.items.values():
            for genre in item.genres:
                lex.genres.add(genre.lower())
            lex.people.add(item.director.lower())
            for actor in item.actors:
                lex.people.add(actor.lower())
            for kw in item.keywords:
                lex.keywords.add(kw.lower())
            lex.titles.add(tuple(item.title.lower().split()))
        lex._index_tokens()
        return lex

    def _index_tokens(self) -> None:
        self.genre_tokens = {t for g in self.genres for t in g.split()}
        self.person_tokens = {t for p in self.people for t in p.split()}
        self.keyword_tokens = {t for k in self.keywords for t in k.split()}
        self.title_tokens = {t for title in self.titles for t in title}

    @staticmethod
    def load_word_list(path) -> set[str]:
        """One lexicon entry per line, UTF-8, '#' comments allowed."""
        entries = set()
        with open(path, encoding="utf-8") as fh:
            for raw in fh:
                line = raw.strip().lower()
                if line and not line.startswith("#"):
                    entries.add(line)
        return entries


class FeatureEncoder:
    """Turns an utterance into sparse hashed features.

    Per-token features feed the CRF emission weights; utterance-level bag
    features feed the intent weights. Output is a list of hash indices per
    position (all features are binary; duplicates accumulate).
    """

    def __init__(self, lexicons: Lexicons | None = None, dim: int = HASH_DIM):
        self.lexicons = lexicons or Lexicons()
        self.dim = dim

    def _token_features(
        self, tokens: list[str], caps: list[bool], i: int
    ) -> list[str]:
        tok = tokens[i]
        feats = [f"w={tok}"]
        for n in (1, 2, 3):
            if len(tok) > n:
                feats.append(f"pre{n}={tok[:n]}")
                feats.append(f"suf{n}={tok[-n:]}")
        if caps[i]:
            feats.append("cap")
        if tok.isdigit():
            feats.append("digit")
        lex = self.lexicons
        if tok in lex.genre_tokens:
            feats.append("in_genre_lex")
        if tok in lex.person_tokens:
            feats.append("in_person_lex")
        if tok in lex.title_tokens:
            feats.append("in_title_lex")
        if tok in lex.keyword_tokens:
            feats.append("in_keyword_lex")
        feats.append(f"w-1={tokens[i - 1]}" if i > 0 else "w-1=<s>")
        feats.append(f"w+1={tokens[i + 1]}" if i < len(tokens) - 1 else "w+1=</s>")
        return feats

    def encode_tokens(self, text: str) -> tuple[list[str], list[list[int]]]:
        """Per-token hashed feature indices for the emission model."""
        tokens, caps = tokenize_with_case(text)
        indexed = [
            [feature_hash(name, self.dim) for name in self._token_features(tokens, caps, i)]
            for i in range(len(tokens))
        ]
        return tokens, indexed

    def encode_utterance(self, text: str) -> list[int]:
        """Bag-of-token features plus lexicon summaries for intent scoring."""
        tokens, _ = tokenize_with_case(text)
        names = [f"bag={t}" for t in tokens]
        names += [f"bi={a}_{b}" for a, b in zip(tokens, tokens[1:])]
        names.append(f"len={min(len(tokens), 8)}")
        if tokens:
            names.append(f"first={tokens[0]}")
            names.append(f"last={tokens[-1]}")
        lex = self.lexicons
        if any(t in lex.genre_tokens for t in tokens):
            names.append("has_genre_tok")
        if any(t in lex.person_tokens for t in tokens):
            names.append("has_person_tok")
        if any(t in lex.keyword_tokens for t in tokens):
            names.append("has_keyword_tok")
        if any(t.isdigit() and len(t) == 4 for t in tokens):
            names.append("has_year_tok")
        return [feature_hash(name, self.dim) for name in names]
