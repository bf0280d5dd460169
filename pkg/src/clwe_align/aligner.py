"""Cosine-similarity alignment: directional argmax plus symmetrization.

All links are stored in (source index, target index) orientation,
whatever direction produced them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import ParallelCorpus, SentencePair
from .embeddings import EmbeddingStore, ParameterTable, cosine_matrix

S2T = "s2t"
T2S = "t2s"

# Grow order: N, S, E, W, NE, NW, SE, SW with rows = source, columns = target.
NEIGHBORS = ((-1, 0), (1, 0), (0, 1), (0, -1), (-1, 1), (-1, -1), (1, 1), (1, -1))


class PairMismatch(ValueError):
    pass


@dataclass(frozen=True)
class SimilarityMatrix:
    pair_id: int
    values: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class Alignment:
    pair_id: int
    links: frozenset

    def sorted_links(self) -> list[tuple[int, int]]:
        return sorted(self.links)

    def to_pharaoh(self) -> str:
        return " ".join(f"{i}-{j}" for i, j in self.sorted_links())


def similarity_matrix(store: EmbeddingStore, pair: SentencePair,
                      src_lang: str = "src", tgt_lang: str = "tgt") -> SimilarityMatrix:
    X = np.vstack([store.resolve(src_lang, w).vector for w in pair.source])
    Y = np.vstack([store.resolve(tgt_lang, w).vector for w in pair.target])
    return SimilarityMatrix(pair.pair_id, cosine_matrix(X, Y))


def _best(scores: np.ndarray, pos: int, own_len: int, other_len: int) -> int:
    # Exact ties: closest to the diagonal |pos/own_len - k/other_len|, compared
    # in integers, then the smallest index.
    top = scores.max()
    candidates = np.flatnonzero(scores == top)
    if len(candidates) == 1:
        return int(candidates[0])
    return int(min(candidates, key=lambda k: (abs(pos * other_len - int(k) * own_len), int(k))))


def directional_align(sim: SimilarityMatrix, direction: str = S2T) -> Alignment:
    S = sim.values
    n, m = S.shape
    if n == 0 or m == 0:
        raise ValueError("empty similarity matrix")
    if direction == S2T:
        links = {(i, _best(S[i], i, n, m)) for i in range(n)}
    elif direction == T2S:
        links = {(_best(S[:, j], j, m, n), j) for j in range(m)}
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return Alignment(sim.pair_id, frozenset(links))


def symmetrize_intersection(fwd: Alignment, bwd: Alignment) -> Alignment:
    if fwd.pair_id != bwd.pair_id:
        raise PairMismatch(f"pair ids differ: {fwd.pair_id} vs {bwd.pair_id}")
    return Alignment(fwd.pair_id, fwd.links & bwd.links)


def symmetrize_gdfa(fwd: Alignment, bwd: Alignment, len_s: int, len_t: int) -> Alignment:
    """grow-diag-final-and as defined by the Moses toolkit."""
    if fwd.pair_id != bwd.pair_id:
        raise PairMismatch(f"pair ids differ: {fwd.pair_id} vs {bwd.pair_id}")
    union = fwd.links | bwd.links
    current = set(fwd.links & bwd.links)
    src_aligned = {i for i, _ in current}
    tgt_aligned = {j for _, j in current}

    def add(i, j):
        current.add((i, j))
        src_aligned.add(i)
        tgt_aligned.add(j)

    added = True
    while added:
        added = False
        for i in range(len_s):
            for j in range(len_t):
                if (i, j) not in current:
                    continue
                for di, dj in NEIGHBORS:
                    ni, nj = i + di, j + dj
                    if not (0 <= ni < len_s and 0 <= nj < len_t):
                        continue
                    if (ni, nj) in current or (ni, nj) not in union:
                        continue
                    if ni not in src_aligned or nj not in tgt_aligned:
                        add(ni, nj)
                        added = True

    for directional in (fwd.links, bwd.links):
        for i in range(len_s):
            for j in range(len_t):
                if (i, j) in directional and i not in src_aligned and j not in tgt_aligned:
                    add(i, j)
    return Alignment(fwd.pair_id, frozenset(current))


def symmetrize(fwd: Alignment, bwd: Alignment, len_s: int, len_t: int, method: str) -> Alignment:
    if method == "intersection":
        return symmetrize_intersection(fwd, bwd)
    if method == "gdfa":
        return symmetrize_gdfa(fwd, bwd, len_s, len_t)
    raise ValueError(f"unknown symmetrization {method!r}")


def align_matrix(sim: SimilarityMatrix, method: str = "intersection") -> Alignment:
    n, m = sim.shape
    return symmetrize(directional_align(sim, S2T), directional_align(sim, T2S), n, m, method)


def align_corpus(store: EmbeddingStore, corpus: ParallelCorpus, symmetrization: str = "intersection",
                 src_lang: str = "src", tgt_lang: str = "tgt") -> list[Alignment]:
    return [
        align_matrix(similarity_matrix(store, pair, src_lang, tgt_lang), symmetrization)
        for pair in corpus
    ]


def align_table(table: ParameterTable, vectors: np.ndarray | None = None,
                symmetrization: str = "intersection") -> list[Alignment]:
    """Same as align_corpus but reading vectors from a parameter table."""
    out = []
    for p in range(len(table.src_index)):
        X, Y = table.pair_vectors(p, vectors)
        out.append(align_matrix(SimilarityMatrix(p, cosine_matrix(X, Y)), symmetrization))
    return out


def format_alignments(alignments: list[Alignment]) -> str:
    return "".join(a.to_pharaoh() + "\n" for a in alignments)


def read_alignments(path) -> list[Alignment]:
    out = []
    with open(path, encoding="utf-8") as f:
        for k, line in enumerate(f):
            links = set()
            for tok in line.split():
                i, sep, j = tok.partition("-")
                if not sep or not i.isdigit() or not j.isdigit():
                    raise ValueError(f"{path}:{k + 1}: malformed link {tok!r}")
                links.add((int(i), int(j)))
            out.append(Alignment(k, frozenset(links)))
    return out
