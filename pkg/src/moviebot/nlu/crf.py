"""Joint intent + slot linear-chain CRF with per-intent lattice constraints.

The model scores an (intent, tag sequence) pair jointly:

    score(y, t | x) = w_int[y].phi_utt(x) + sum_i w_emit[t_i].phi_i(x)
                      + compat[y, t_i] + transition terms (incl. start/stop)

Intents are constrained: slot-free intents admit only the all-O sequence,
slot-required intents exclude every all-O path (realized with a
has-non-O parity bit that doubles the lattice state space), and the rest
are unconstrained. All dynamic programming is in log space.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from ..dialogue.acts import (
    SLOT_FREE_INTENTS,
    SLOT_REQUIRED_INTENTS,
    SLOTS,
    UserIntent,
)

NEG_INF = float("-inf")

FREE = "free"
REQUIRED = "required"
UNCONSTRAINED = "unconstrained"

MODEL_MAGIC = b"CRF1"
MODEL_VERSION = 1


class EmptySequenceError(Exception):
    """CRF operations need at least one token."""


class InfeasibleConstraintError(Exception):
    """Constraint masking left no valid tag path."""


class InvalidGoldError(Exception):
    """A gold annotation violates the intent's constraint or BIO structure."""


class EmptyCorpusError(Exception):
    """Training requires a non-empty corpus."""


def default_constraints() -> dict:
    table = {}
    for intent in UserIntent:
        if intent in SLOT_REQUIRED_INTENTS:
            table[intent] = REQUIRED
        elif intent in SLOT_FREE_INTENTS:
            table[intent] = FREE
        else:
            table[intent] = UNCONSTRAINED
    return table


def bio_tags() -> list[str]:
    """The 13-tag production alphabet: O plus B-/I- per slot."""
    tags = ["O"]
    for slot in SLOTS:
        tags.append(f"B-{slot.value}")
    for slot in SLOTS:
        tags.append(f"I-{slot.value}")
    return tags


def bio_transition_mask(tags: list[str]) -> np.ndarray:
    """Boolean [(K+1), (K+1)] mask of structurally allowed transitions.

    Index K is the shared start/stop boundary. ``I-s`` may only follow
    ``B-s`` or ``I-s``; alphabets without B/I structure are unrestricted.
    """
    k = len(tags)
    allowed = np.ones((k + 1, k + 1), dtype=bool)
    for j, tag in enumerate(tags):
        if not tag.startswith("I-"):
            continue
        slot = tag[2:]
        for i in range(k + 1):
            prev = tags[i] if i < k else None  # None = start boundary
            if prev not in (f"B-{slot}", f"I-{slot}"):
                allowed[i, j] = False
    return allowed


@dataclass
class CrfModel:
    """Weights and constraint tables for the joint model.

    ``dim`` is the width of the weight matrices. A trained production model
    keeps compact columns for the features seen in training and maps raw
    hash indices through ``column_map``; unseen features carry weight zero.
    """

    intents: list
    constraints: dict
    tags: list[str]
    dim: int
    w_intent: np.ndarray
    w_emit: np.ndarray
    w_trans: np.ndarray
    w_compat: np.ndarray
    column_map: dict[int, int] | None = None
    feature_space: int | None = None
    allowed: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.allowed is None:
            self.allowed = bio_transition_mask(self.tags)

    @classmethod
    def create(cls, intents, constraints, tags, dim, column_map=None, feature_space=None):
        n, k = len(intents), len(tags)
        return cls(
            intents=list(intents),
            constraints=dict(constraints),
            tags=list(tags),
            dim=dim,
            w_intent=np.zeros((n, dim)),
            w_emit=np.zeros((k, dim)),
            w_trans=np.zeros((k + 1, k + 1)),
            w_compat=np.zeros((n, k)),
            column_map=column_map,
            feature_space=feature_space,
        )

    def map_cols(self, raw_indices: list[int]) -> list[int]:
        if self.column_map is None:
            return list(raw_indices)
        cm = self.column_map
        return [cm[i] for i in raw_indices if i in cm]

    def masked_transitions(self) -> np.ndarray:
        trans = self.w_trans.copy()
        trans[~self.allowed] = NEG_INF
        return trans

    def emissions(self, token_feats: list[list[int]], intent=None) -> np.ndarray:
        """[L, K] emission scores, with the intent compatibility row added."""
        k = len(self.tags)
        em = np.zeros((len(token_feats), k))
        for i, feats in enumerate(token_feats):
            cols = self.map_cols(feats)
            if cols:
                em[i] = self.w_emit[:, cols].sum(axis=1)
        if intent is not None:
            em += self.w_compat[self.intents.index(intent)]
        return em

    def intent_score(self, utt_feats: list[int], intent) -> float:
        cols = self.map_cols(utt_feats)
        row = self.w_intent[self.intents.index(intent)]
        return float(row[cols].sum()) if cols else 0.0


@dataclass(frozen=True)
class CrfExample:
    """One labeled record in encoder feature space."""

    token_feats: tuple
    utt_feats: tuple
    gold_intent: object
    gold_tags: tuple


@dataclass
class CrfGradient:
    w_intent: np.ndarray
    w_emit: np.ndarray
    w_trans: np.ndarray
    w_compat: np.ndarray


# ---------------------------------------------------------------------------
# Constrained lattices
# ---------------------------------------------------------------------------


def _build_lattice(trans: np.ndarray, k: int, constraint: str):
    """Expand the masked transition scores into lattice vectors/matrices.

    Returns (state_tag, start, A, stop). For slot-required intents the
    state space is doubled with a seen-non-O parity bit; state order is
    (tag, parity) so argmax tie-breaking prefers lower tag indices.
    """
    if constraint == UNCONSTRAINED:
        state_tag = np.arange(k)
        return state_tag, trans[k, :k].copy(), trans[:k, :k].copy(), trans[:k, k].copy()
    if constraint == FREE:
        state_tag = np.arange(k)
        start = np.full(k, NEG_INF)
        stop = np.full(k, NEG_INF)
        a = np.full((k, k), NEG_INF)
        start[0] = trans[k, 0]
        stop[0] = trans[0, k]
        a[0, 0] = trans[0, 0]
        return state_tag, start, a, stop
    if constraint == REQUIRED:
        s = 2 * k
        state_tag = np.repeat(np.arange(k), 2)
        parity = np.tile(np.arange(2), k)
        start = np.full(s, NEG_INF)
        stop = np.full(s, NEG_INF)
        a = np.full((s, s), NEG_INF)
        for st in range(s):
            tag, p = state_tag[st], parity[st]
            if p == int(tag != 0):
                start[st] = trans[k, tag]
            if p == 1:
                stop[st] = trans[tag, k]
        for u in range(s):
            ta, pa = state_tag[u], parity[u]
            for v in range(s):
                tb, pb = state_tag[v], parity[v]
                if pb == (pa | int(tb != 0)):
                    a[u, v] = trans[ta, tb]
        return state_tag, start, a, stop
    raise ValueError(f"unknown constraint {constraint!r}")


def _state_emissions(em: np.ndarray, state_tag: np.ndarray) -> np.ndarray:
    return em[:, state_tag]


def _forward(start, a, stop, em_s):
    """Log-space forward pass; returns (alphas, logZ)."""
    length = em_s.shape[0]
    alphas = np.empty_like(em_s)
    alphas[0] = start + em_s[0]
    for i in range(1, length):
        alphas[i] = np.logaddexp.reduce(alphas[i - 1][:, None] + a, axis=0) + em_s[i]
    log_z = float(np.logaddexp.reduce(alphas[-1] + stop))
    return alphas, log_z


def _backward(a, stop, em_s):
    length = em_s.shape[0]
    betas = np.empty_like(em_s)
    betas[-1] = stop
    for i in range(length - 2, -1, -1):
        betas[i] = np.logaddexp.reduce(a + (em_s[i + 1] + betas[i + 1])[None, :], axis=1)
    return betas


def crf_forward_logZ(model: CrfModel, token_feats, intent) -> float:
    """Log partition over tag sequences valid under the intent's constraint."""
    if len(token_feats) == 0:
        raise EmptySequenceError("forward needs at least one token")
    em = model.emissions(token_feats, intent)
    trans = model.masked_transitions()
    state_tag, start, a, stop = _build_lattice(trans, len(model.tags), model.constraints[intent])
    with np.errstate(invalid="ignore"):
        _, log_z = _forward(start, a, stop, _state_emissions(em, state_tag))
    return log_z


def crf_viterbi(model: CrfModel, token_feats, intent) -> tuple[list[str], float]:
    """Best constrained tag sequence; ties break toward lower tag indices."""
    if len(token_feats) == 0:
        raise EmptySequenceError("viterbi needs at least one token")
    em = model.emissions(token_feats, intent)
    trans = model.masked_transitions()
    state_tag, start, a, stop = _build_lattice(trans, len(model.tags), model.constraints[intent])
    em_s = _state_emissions(em, state_tag)

    length = em_s.shape[0]
    delta = start + em_s[0]
    backptr = np.zeros((length, len(start)), dtype=int)
    with np.errstate(invalid="ignore"):
        for i in range(1, length):
            scores = delta[:, None] + a
            backptr[i] = np.argmax(scores, axis=0)
            delta = scores[backptr[i], np.arange(scores.shape[1])] + em_s[i]
        final = delta + stop
    best = int(np.argmax(final))
    score = float(final[best])
    if score == NEG_INF or np.isnan(score):
        raise InfeasibleConstraintError(
            f"no valid tag path for intent {intent} over {length} tokens"
        )
    states = [best]
    for i in range(length - 1, 0, -1):
        states.append(int(backptr[i, states[-1]]))
    states.reverse()
    return [model.tags[state_tag[s]] for s in states], score


def score_path(model: CrfModel, token_feats, intent, tags: list[str]) -> float:
    """Unnormalized joint path score (without the intent feature term)."""
    em = model.emissions(token_feats, intent)
    trans = model.masked_transitions()
    k = len(model.tags)
    idx = [model.tags.index(t) for t in tags]
    score = trans[k, idx[0]] + trans[idx[-1], k]
    for a, b in zip(idx, idx[1:]):
        score += trans[a, b]
    for i, t in enumerate(idx):
        score += em[i, t]
    return float(score)


def _marginals(model: CrfModel, em: np.ndarray, constraint: str):
    """Forward-backward tag marginals and expected transition counts.

    Returns (logZ, unary [L, K], pairwise [(K+1), (K+1)]) where pairwise
    includes expected start/stop counts in the boundary row/column.
    Returns (−inf, None, None) when the lattice admits no path.
    """
    k = len(model.tags)
    trans = model.masked_transitions()
    state_tag, start, a, stop = _build_lattice(trans, k, constraint)
    em_s = _state_emissions(em, state_tag)
    length = em_s.shape[0]

    with np.errstate(invalid="ignore"):
        alphas, log_z = _forward(start, a, stop, em_s)
        if log_z == NEG_INF:
            return log_z, None, None
        betas = _backward(a, stop, em_s)

        state_marg = np.exp(alphas + betas - log_z)
        unary = np.zeros((length, k))
        for st in range(len(state_tag)):
            unary[:, state_tag[st]] += state_marg[:, st]

        pairwise = np.zeros((k + 1, k + 1))
        np.add.at(pairwise[k, :k], state_tag, state_marg[0])
        np.add.at(pairwise[:k, k], state_tag, state_marg[-1])
        for i in range(length - 1):
            joint = np.exp(
                alphas[i][:, None] + a + (em_s[i + 1] + betas[i + 1])[None, :] - log_z
            )
            # Project augmented-state pair marginals onto tag pairs.
            for u in range(len(state_tag)):
                np.add.at(pairwise[state_tag[u], :k], state_tag, joint[u])
    return log_z, unary, pairwise


def _check_gold(model: CrfModel, example: CrfExample) -> None:
    constraint = model.constraints[example.gold_intent]
    non_o = sum(1 for t in example.gold_tags if t != "O")
    if constraint == REQUIRED and non_o == 0:
        raise InvalidGoldError(f"{example.gold_intent} gold has no non-O tag")
    if constraint == FREE and non_o > 0:
        raise InvalidGoldError(f"{example.gold_intent} gold must be all-O")
    if len(example.gold_tags) != len(example.token_feats):
        raise InvalidGoldError("gold tag length does not match token count")


def crf_loglik_and_grad(model: CrfModel, example: CrfExample):
    """Exact log p(gold intent, gold tags | x) and its gradient."""
    if len(example.token_feats) == 0:
        raise EmptySequenceError("empty example")
    _check_gold(model, example)

    n, k = len(model.intents), len(model.tags)
    grad = CrfGradient(
        w_intent=np.zeros_like(model.w_intent),
        w_emit=np.zeros_like(model.w_emit),
        w_trans=np.zeros_like(model.w_trans),
        w_compat=np.zeros_like(model.w_compat),
    )
    utt_cols = model.map_cols(list(example.utt_feats))
    token_cols = [model.map_cols(list(f)) for f in example.token_feats]

    # Per-intent constrained partition functions and expectations.
    scores = np.empty(n)
    expectations = []
    for yi, intent in enumerate(model.intents):
        em = model.emissions(list(example.token_feats), intent)
        log_z, unary, pairwise = _marginals(model, em, model.constraints[intent])
        scores[yi] = model.intent_score(list(example.utt_feats), intent) + log_z
        expectations.append((unary, pairwise))
    log_z_total = float(np.logaddexp.reduce(scores))
    p_intent = np.exp(scores - log_z_total)

    gold_yi = model.intents.index(example.gold_intent)
    gold_path = score_path(model, list(example.token_feats), example.gold_intent,
                           list(example.gold_tags))
    if gold_path == NEG_INF:
        raise InvalidGoldError("gold tag sequence is structurally invalid")
    gold_score = model.intent_score(list(example.utt_feats), example.gold_intent) + gold_path
    loglik = gold_score - log_z_total

    # Gold counts.
    for c in utt_cols:
        grad.w_intent[gold_yi, c] += 1.0
    gold_idx = [model.tags.index(t) for t in example.gold_tags]
    for i, t in enumerate(gold_idx):
        for c in token_cols[i]:
            grad.w_emit[t, c] += 1.0
        grad.w_compat[gold_yi, t] += 1.0
    grad.w_trans[k, gold_idx[0]] += 1.0
    grad.w_trans[gold_idx[-1], k] += 1.0
    for a, b in zip(gold_idx, gold_idx[1:]):
        grad.w_trans[a, b] += 1.0

    # Model expectations.
    for yi in range(n):
        p = p_intent[yi]
        if p == 0.0:
            continue
        for c in utt_cols:
            grad.w_intent[yi, c] -= p
        unary, pairwise = expectations[yi]
        if unary is None:
            continue
        for i in range(len(token_cols)):
            for t in range(k):
                m = unary[i, t]
                if m == 0.0:
                    continue
                for c in token_cols[i]:
                    grad.w_emit[t, c] -= p * m
        grad.w_trans -= p * pairwise
        grad.w_compat[yi] -= p * unary.sum(axis=0)

    return float(loglik), grad


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


@dataclass
class CrfTrainConfig:
    learning_rate: float = 0.1
    l2: float = 1e-4
    epochs: int = 20
    seed: int = 0
    averaged: bool = True


def _sparse_grad_step(model, example, lr, l2, utt_cols, token_cols):
    """One ascent step, touching only the example's active columns.

    Same math as :func:`crf_loglik_and_grad`, restructured so dense
    temporaries are avoided on wide models.
    """
    n, k = len(model.intents), len(model.tags)
    scores = np.empty(n)
    expectations = []
    for yi, intent in enumerate(model.intents):
        em = model.emissions(list(example.token_feats), intent)
        log_z, unary, pairwise = _marginals(model, em, model.constraints[intent])
        scores[yi] = model.intent_score(list(example.utt_feats), intent) + log_z
        expectations.append((unary, pairwise))
    log_z_total = float(np.logaddexp.reduce(scores))
    p_intent = np.exp(scores - log_z_total)

    gold_yi = model.intents.index(example.gold_intent)
    gold_score = (
        model.intent_score(list(example.utt_feats), example.gold_intent)
        + score_path(model, list(example.token_feats), example.gold_intent,
                     list(example.gold_tags))
    )
    loglik = gold_score - log_z_total

    # L2 shrinkage on every weight, then sparse gradient adds.
    shrink = 1.0 - lr * l2
    model.w_intent *= shrink
    model.w_emit *= shrink
    model.w_trans *= shrink
    model.w_compat *= shrink

    g_trans = np.zeros((k + 1, k + 1))
    g_compat = np.zeros((n, k))

    if utt_cols:
        g_int = np.repeat(-p_intent[:, None], len(utt_cols), axis=1)
        g_int[gold_yi] += 1.0
        model.w_intent[:, utt_cols] += lr * g_int

    gold_idx = [model.tags.index(t) for t in example.gold_tags]
    g_trans[k, gold_idx[0]] += 1.0
    g_trans[gold_idx[-1], k] += 1.0
    for a, b in zip(gold_idx, gold_idx[1:]):
        g_trans[a, b] += 1.0
    for t in gold_idx:
        g_compat[gold_yi, t] += 1.0

    # Emission updates: accumulate per-position tag deltas, then scatter.
    length = len(token_cols)
    pos_delta = np.zeros((length, k))
    for i, t in enumerate(gold_idx):
        pos_delta[i, t] += 1.0
    for yi in range(n):
        p = p_intent[yi]
        if p == 0.0:
            continue
        unary, pairwise = expectations[yi]
        if unary is None:
            continue
        pos_delta -= p * unary
        g_trans -= p * pairwise
        g_compat[yi] -= p * unary.sum(axis=0)

    for i in range(length):
        cols = token_cols[i]
        if cols:
            model.w_emit[:, cols] += (lr * pos_delta[i])[:, None]
    model.w_trans += lr * g_trans
    model.w_compat += lr * g_compat
    return loglik


def crf_train(corpus, encoder, config: CrfTrainConfig | None = None) -> tuple:
    """Averaged SGD on the regularized joint log-likelihood.

    ``corpus`` is a :class:`~moviebot.nlu.corpus.LabeledCorpus`. Returns
    (model, history) where history is the mean training log-likelihood per
    epoch. Deterministic under ``config.seed``.
    """
    from .corpus import LabeledCorpus  # local import to avoid a cycle

    config = config or CrfTrainConfig()
    if isinstance(corpus, LabeledCorpus):
        records = corpus.records
    else:
        records = list(corpus)
    if not records:
        raise EmptyCorpusError("cannot train on an empty corpus")

    examples = []
    raw_indices: set[int] = set()
    for rec in records:
        _, token_feats = encoder.encode_tokens(rec.text)
        utt_feats = encoder.encode_utterance(rec.text)
        examples.append(
            CrfExample(
                token_feats=tuple(tuple(f) for f in token_feats),
                utt_feats=tuple(utt_feats),
                gold_intent=rec.intent,
                gold_tags=tuple(rec.tags),
            )
        )
        raw_indices.update(utt_feats)
        for f in token_feats:
            raw_indices.update(f)

    column_map = {raw: col for col, raw in enumerate(sorted(raw_indices))}
    model = CrfModel.create(
        intents=list(UserIntent),
        constraints=default_constraints(),
        tags=bio_tags(),
        dim=len(column_map),
        column_map=column_map,
        feature_space=encoder.dim,
    )

    pre_mapped = [
        (
            ex,
            model.map_cols(list(ex.utt_feats)),
            [model.map_cols(list(f)) for f in ex.token_feats],
        )
        for ex in examples
    ]

    rng = np.random.default_rng(config.seed)
    sums = None
    steps = 0
    history = []
    for epoch in range(1, config.epochs + 1):
        lr = config.learning_rate / epoch
        order = rng.permutation(len(pre_mapped))
        total = 0.0
        for j in order:
            ex, utt_cols, token_cols = pre_mapped[j]
            total += _sparse_grad_step(model, ex, lr, config.l2, utt_cols, token_cols)
            steps += 1
            if config.averaged:
                if sums is None:
                    sums = [
                        model.w_intent.copy(),
                        model.w_emit.copy(),
                        model.w_trans.copy(),
                        model.w_compat.copy(),
                    ]
                else:
                    sums[0] += model.w_intent
                    sums[1] += model.w_emit
                    sums[2] += model.w_trans
                    sums[3] += model.w_compat
        history.append(total / len(pre_mapped))

    if config.averaged and sums is not None:
        model.w_intent = sums[0] / steps
        model.w_emit = sums[1] / steps
        model.w_trans = sums[2] / steps
        model.w_compat = sums[3] / steps
    return model, history


# ---------------------------------------------------------------------------
# Serialization: binary weights + JSON sidecar for vocabularies
# ---------------------------------------------------------------------------


def save_crf(model: CrfModel, path) -> None:
    """Write magic "CRF1", version, dimensions, column map, then weights
    as little-endian float64. Vocabularies go to a ``.json`` sidecar."""
    path = str(path)
    cm = model.column_map or {}
    keys = np.array(sorted(cm), dtype="<i8")
    cols = np.array([cm[k] for k in sorted(cm)], dtype="<i8")
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(
            struct.pack(
                "<IIIIQ",
                MODEL_VERSION,
                len(model.intents),
                len(model.tags),
                model.dim,
                len(cm),
            )
        )
        fh.write(keys.tobytes())
        fh.write(cols.tobytes())
        for arr in (model.w_intent, model.w_emit, model.w_trans, model.w_compat):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    sidecar = {
        "version": MODEL_VERSION,
        "intents": [i.value for i in model.intents],
        "constraints": {i.value: model.constraints[i] for i in model.intents},
        "tags": model.tags,
        "feature_space": model.feature_space,
        "hash": "fnv1a-64",
    }
    with open(path + ".json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2)


def load_crf(path) -> CrfModel:
    path = str(path)
    with open(path + ".json", encoding="utf-8") as fh:
        sidecar = json.load(fh)
    intents = [UserIntent(name) for name in sidecar["intents"]]
    constraints = {UserIntent(k): v for k, v in sidecar["constraints"].items()}
    tags = sidecar["tags"]
    with open(path, "rb") as fh:
        if fh.read(4) != MODEL_MAGIC:
            raise ValueError(f"{path}: bad magic, not a CRF model file")
        version, n, k, dim, n_cm = struct.unpack("<IIIIQ", fh.read(24))
        if version != MODEL_VERSION:
            raise ValueError(f"{path}: unsupported model version {version}")
        keys = np.frombuffer(fh.read(8 * n_cm), dtype="<i8")
        cols = np.frombuffer(fh.read(8 * n_cm), dtype="<i8")
        column_map = {int(a): int(b) for a, b in zip(keys, cols)} or None
        shapes = [(n, dim), (k, dim), (k + 1, k + 1), (n, k)]
        arrays = []
        for shape in shapes:
            count = shape[0] * shape[1]
            arrays.append(
                np.frombuffer(fh.read(8 * count), dtype="<f8").reshape(shape).copy()
            )
    return CrfModel(
        intents=intents,
        constraints=constraints,
        tags=tags,
        dim=dim,
        w_intent=arrays[0],
        w_emit=arrays[1],
        w_trans=arrays[2],
        w_compat=arrays[3],
        column_map=column_map,
        feature_space=sidecar.get("feature_space"),
    )
