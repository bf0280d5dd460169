"""Synthetic corpora with known translations, for tests and demos.

``ambiguity_fixture`` builds the "answer / frage / antwort" situation: the
source word ``answer`` starts slightly closer (by ``gap`` in cosine) to
``frage``, whose real partner ``question`` always co-occurs with it, than to
its true translation ``antwort``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import GoldAlignment, ParallelCorpus
from .embeddings import EmbeddingStore

AMBIGUOUS = ("answer", "antwort")
DISTRACTOR = ("question", "frage")


@dataclass
class SyntheticFixture:
    store: EmbeddingStore
    corpus: ParallelCorpus
    gold: list[GoldAlignment]
    lexicon: dict[str, str]

    def gold_link(self, pair_id: int, src_word: str) -> tuple[int, int] | None:
        pair = self.corpus[pair_id]
        if src_word not in pair.source.tokens:
            return None
        i = pair.source.tokens.index(src_word)
        return i, pair.target.tokens.index(self.lexicon[src_word])


def _orthonormal(count: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((dim, count)))
    return q.T


def ambiguity_fixture(n_pairs: int = 10, dim: int = 32, gap: float = 0.02, noise: float = 0.05,
                      n_words: int = 10, seed: int = 0) -> SyntheticFixture:
    rng = np.random.default_rng(seed)
    # one basis direction per concept, plus one spare for the ambiguous word's off-axis part
    basis = _orthonormal(n_words + 3, dim, rng)
    src_words = [f"w{k}" for k in range(n_words)]
    tgt_words = [f"W{k}" for k in range(n_words)]
    lexicon = dict(zip(src_words, tgt_words))
    lexicon.update(dict([DISTRACTOR, AMBIGUOUS]))

    def noisy(v):
        v = v + noise * rng.standard_normal(dim) / np.sqrt(dim)
        return v / np.linalg.norm(v)

    src_vecs = {w: noisy(basis[k]) for k, w in enumerate(src_words)}
    tgt_vecs = {w: noisy(basis[k]) for k, w in enumerate(tgt_words)}
    q_axis, a_axis, spare = basis[n_words], basis[n_words + 1], basis[n_words + 2]
    src_vecs["question"] = noisy(q_axis)
    tgt_vecs["frage"] = noisy(q_axis)
    tgt_vecs["antwort"] = noisy(a_axis)

    # answer = p*F + q*A + r*spare with cos(answer, F) = cos(answer, A) + gap
    F, A = tgt_vecs["frage"], tgt_vecs["antwort"]
    g = float(F @ A)
    target_cos = np.array([0.5 + gap, 0.5])
    p, q = np.linalg.solve(np.array([[1.0, g], [g, 1.0]]), target_cos)
    base = p * F + q * A
    spare = spare - (spare @ F) * F
    spare = spare - (spare @ A) * A / (A @ A)
    spare /= np.linalg.norm(spare)
    src_vecs["answer"] = base + np.sqrt(max(1.0 - base @ base, 0.0)) * spare

    pairs, gold = [], []
    for k in range(n_pairs):
        length = int(rng.integers(2, 4))
        words = [str(w) for w in rng.choice(src_words, size=length, replace=False)]
        if k % 3 == 0:
            words += ["question", "answer"]
        order = rng.permutation(len(words))
        source = [words[o] for o in order]
        target = [lexicon[w] for w in source]
        perm = rng.permutation(len(target))
        target = [target[o] for o in perm]
        pairs.append((source, target))
        links = {(i, target.index(lexicon[w])) for i, w in enumerate(source)}
        gold.append(GoldAlignment(k, links, set()))

    store = EmbeddingStore(dim)
    sw = list(src_vecs)
    tw = list(tgt_vecs)
    store.add_language("src", sw, np.vstack([src_vecs[w] for w in sw]))
    store.add_language("tgt", tw, np.vstack([tgt_vecs[w] for w in tw]))
    return SyntheticFixture(store, ParallelCorpus.from_token_lists(pairs), gold, lexicon)


def permutation_fixture(length: int = 5, dim: int = 8, seed: int = 0):
    """One pair whose target is a permutation of the source, with identical vectors.

    Returns ``(store, corpus, perm)`` where source token ``i`` translates to
    target position ``perm[i]``.
    """
    rng = np.random.default_rng(seed)
    basis = _orthonormal(length, dim, rng)
    perm = rng.permutation(length)
    src = [f"s{i}" for i in range(length)]
    tgt = [None] * length
    for i in range(length):
        tgt[perm[i]] = f"t{i}"
    store = EmbeddingStore(dim)
    store.add_language("src", src, basis)
    store.add_language("tgt", [f"t{i}" for i in range(length)], basis)
    return store, ParallelCorpus.from_token_lists([(src, tgt)]), [int(p) for p in perm]
