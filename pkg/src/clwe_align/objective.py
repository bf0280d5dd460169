"""Embedding monogamy objective and its analytic gradient.

For one sentence pair with token vectors ``X`` (source, n x d) and ``Y``
(target, m x d), let ``S = cos(U, V) / tau`` where ``U``/``V`` are the
vectors, optionally plus sinusoidal position encodings. Then

    P = row softmax of S        P[i, j] = p(t_j | s_i, t)
    Q = column softmax of S     Q[i, j] = p(s_i | t_j, s)

The round trip ``s -> t -> s`` is ``P @ Q.T`` and its trace is ``sum(P * Q)``;
the reverse round trip ``Q.T @ P`` has the same trace, so the two directional
monogamy losses differ only in their log base (len(s) vs len(t)).

The retention term is ``-log(sum(P * Q * M) / sum(M))`` with ``M`` the
initial intersection alignment. Since the reverse-direction mask is ``M.T``,
both directional retention terms coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .aligner import Alignment, align_corpus, align_table
from .corpus import ParallelCorpus, SentencePair
from .embeddings import EmbeddingStore, ParameterTable, corpus_parameter_view

LOG_FLOOR = 1e-30


class DegenerateLength(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ObjectiveConfig:
    tau: float = 0.001
    alpha: float = 1.0
    position_scale: float = 1.0
    use_positions: bool = True

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if not self.position_scale >= 0:
            raise ValueError(f"position_scale must be non-negative, got {self.position_scale}")


@dataclass(frozen=True)
class RetentionMask:
    pair_id: int
    links: frozenset

    def as_array(self, n: int, m: int) -> np.ndarray:
        M = np.zeros((n, m))
        for i, j in self.links:
            M[i, j] = 1.0
        return M


@dataclass
class PairLoss:
    pair_id: int
    l_st: float | None
    l_ts: float | None
    l_bi: float | None
    l_ret: float | None
    total: float


@dataclass
class LossReport:
    """Corpus loss with per-pair breakdown.

    ``l_bi`` and ``l_ret`` are sums over pairs divided by the number of pairs
    (absent terms count as 0), so ``total == l_bi + alpha * l_ret``.
    """

    pairs: list[PairLoss]
    l_bi: float
    l_ret: float
    total: float
    degenerate: list[int] = field(default_factory=list)
    retention_active: bool = True


def positional_encoding(position: int, dim: int, scale: float = 1.0) -> np.ndarray:
    """Sinusoid: even slots sin(pos / 10000^(2k/dim)), odd slots the matching cos.

    Odd ``dim`` is computed as ``dim + 1`` and truncated.
    """
    width = dim + dim % 2
    k = np.arange(width // 2)
    angle = position / np.power(10000.0, 2 * k / width)
    out = np.empty(width)
    out[0::2] = np.sin(angle)
    out[1::2] = np.cos(angle)
    return scale * out[:dim]


@lru_cache(maxsize=256)
def _position_block(length: int, dim: int, scale: float) -> np.ndarray:
    block = np.vstack([positional_encoding(p, dim, scale) for p in range(length)])
    block.setflags(write=False)
    return block


def positions_for(length: int, dim: int, config: ObjectiveConfig) -> np.ndarray | None:
    if not config.use_positions or config.position_scale == 0:
        return None
    return _position_block(length, dim, float(config.position_scale))


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _unit_rows(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(A, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    return A / safe[:, None], norms


def _prepare(X: np.ndarray, Y: np.ndarray, config: ObjectiveConfig):
    U, V = X, Y
    pu = positions_for(len(X), X.shape[1], config)
    if pu is not None:
        U = X + pu
        V = Y + positions_for(len(Y), Y.shape[1], config)
    Uh, nu = _unit_rows(U)
    Vh, nv = _unit_rows(V)
    S = (Uh @ Vh.T) / config.tau
    return Uh, nu, Vh, nv, S


def probability_matrices(X: np.ndarray, Y: np.ndarray, config: ObjectiveConfig) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(P_st, P_ts)`` with shapes (n, m) and (m, n)."""
    _, _, _, _, S = _prepare(X, Y, config)
    return softmax_rows(S), softmax_rows(S.T)


def _pair_vectors(store: EmbeddingStore, pair: SentencePair, src_lang: str, tgt_lang: str):
    X = np.vstack([store.resolve(src_lang, w).vector for w in pair.source])
    Y = np.vstack([store.resolve(tgt_lang, w).vector for w in pair.target])
    return X, Y


def translation_probs(store: EmbeddingStore, pair: SentencePair, direction: str,
                      config: ObjectiveConfig, src_lang: str = "src", tgt_lang: str = "tgt") -> np.ndarray:
    X, Y = _pair_vectors(store, pair, src_lang, tgt_lang)
    P_st, P_ts = probability_matrices(X, Y, config)
    if direction == "s2t":
        return P_st
    if direction == "t2s":
        return P_ts
    raise ValueError(f"unknown direction {direction!r}")


def round_trip_matrix(P_st: np.ndarray, P_ts: np.ndarray) -> np.ndarray:
    if P_st.ndim != 2 or P_ts.ndim != 2 or P_st.shape != P_ts.shape[::-1]:
        raise ShapeMismatch(f"cannot chain {P_st.shape} with {P_ts.shape}")
    return P_st @ P_ts


def monogamy_loss(R: np.ndarray) -> float:
    n = R.shape[0]
    if n < 2:
        raise DegenerateLength(f"monogamy loss needs length >= 2, got {n}")
    trace = max(float(np.trace(R)), LOG_FLOOR)
    return 1.0 - math.log(trace) / math.log(n)


def retention_loss(P_st: np.ndarray, P_ts: np.ndarray, mask: RetentionMask) -> float | None:
    """Symmetric retention term, or None when the mask is empty."""
    if not mask.links:
        return None
    n, m = P_st.shape
    M = mask.as_array(n, m)
    l_st = -math.log(max(float((P_st * P_ts.T * M).sum() / M.sum()), LOG_FLOOR))
    l_ts = -math.log(max(float((P_ts * P_st.T * M.T).sum() / M.sum()), LOG_FLOOR))
    return 0.5 * (l_st + l_ts)


def pair_objective(X: np.ndarray, Y: np.ndarray, mask: RetentionMask | None, config: ObjectiveConfig,
                   pair_id: int = 0, with_grad: bool = True):
    """Loss of one pair and its gradient w.r.t. ``X`` and ``Y``.

    Returns ``(PairLoss, dX, dY)``; the gradients are None when ``with_grad``
    is false.
    """
    n, m = len(X), len(Y)
    Uh, nu, Vh, nv, S = _prepare(X, Y, config)
    P = softmax_rows(S)
    Q = softmax_rows(S.T).T
    W = P * Q
    H = np.zeros_like(W)

    l_st = l_ts = l_bi = None
    if n >= 2 and m >= 2:
        trace = float(W.sum())
        log_t = math.log(max(trace, LOG_FLOOR))
        l_st = 1.0 - log_t / math.log(n)
        l_ts = 1.0 - log_t / math.log(m)
        l_bi = 0.5 * (l_st + l_ts)
        if trace > LOG_FLOOR:
            H -= 0.5 * (1.0 / math.log(n) + 1.0 / math.log(m)) / trace

    l_ret = None
    if config.alpha > 0 and mask is not None and mask.links:
        M = mask.as_array(n, m)
        count = M.sum()
        kept = float((W * M).sum() / count)
        l_ret = -math.log(max(kept, LOG_FLOOR))
        if kept > LOG_FLOOR:
            H -= config.alpha * M / (count * kept)

    total = (l_bi or 0.0) + config.alpha * (l_ret or 0.0)
    loss = PairLoss(pair_id, l_st, l_ts, l_bi, l_ret, total)
    if not with_grad:
        return loss, None, None

    GP = H * Q
    GQ = H * P
    dS = P * (GP - (GP * P).sum(axis=1, keepdims=True))
    dS += Q * (GQ - (GQ * Q).sum(axis=0, keepdims=True))
    dC = dS / config.tau
    dUh = dC @ Vh
    dVh = dC.T @ Uh
    dU = _unit_backward(Uh, nu, dUh)
    dV = _unit_backward(Vh, nv, dVh)
    return loss, dU, dV


def _unit_backward(unit: np.ndarray, norms: np.ndarray, grad_unit: np.ndarray) -> np.ndarray:
    radial = (unit * grad_unit).sum(axis=1, keepdims=True)
    safe = np.where(norms > 0, norms, 1.0)[:, None]
    out = (grad_unit - unit * radial) / safe
    out[norms == 0] = 0.0
    return out


def bidirectional_loss(store: EmbeddingStore, pair: SentencePair, config: ObjectiveConfig,
                       src_lang: str = "src", tgt_lang: str = "tgt") -> PairLoss:
    X, Y = _pair_vectors(store, pair, src_lang, tgt_lang)
    no_retention = ObjectiveConfig(config.tau, 0.0, config.position_scale, config.use_positions)
    loss, _, _ = pair_objective(X, Y, None, no_retention, pair.pair_id, with_grad=False)
    return loss


def masks_from_alignments(alignments: list[Alignment]) -> list[RetentionMask]:
    return [RetentionMask(a.pair_id, frozenset(a.links)) for a in alignments]


def build_retention_masks(store_initial: EmbeddingStore, corpus: ParallelCorpus,
                          src_lang: str = "src", tgt_lang: str = "tgt") -> list[RetentionMask]:
    """Intersection alignments of the initial, position-free embeddings."""
    return masks_from_alignments(align_corpus(store_initial, corpus, "intersection", src_lang, tgt_lang))


def build_retention_masks_from_table(table: ParameterTable) -> list[RetentionMask]:
    return masks_from_alignments(align_table(table, symmetrization="intersection"))


def table_objective(table: ParameterTable, vectors: np.ndarray, masks: list[RetentionMask],
                    config: ObjectiveConfig, dropout: list[tuple[np.ndarray, np.ndarray]] | None = None,
                    with_grad: bool = True) -> tuple[LossReport, np.ndarray | None]:
    """Corpus loss and gradient over a parameter table.

    ``dropout[p]`` holds the multiplicative (src, tgt) token masks for pair
    ``p``. Gradients are accumulated per slot in pair order.
    """
    n_pairs = len(table.src_index)
    grad = np.zeros_like(vectors) if with_grad else None
    losses, degenerate = [], []
    sum_bi = sum_ret = 0.0
    for p in range(n_pairs):
        si, ti = table.src_index[p], table.tgt_index[p]
        X, Y = vectors[si], vectors[ti]
        if dropout is not None:
            X = X * dropout[p][0]
            Y = Y * dropout[p][1]
        loss, dX, dY = pair_objective(X, Y, masks[p] if masks else None, config, p, with_grad)
        losses.append(loss)
        if loss.l_bi is None:
            degenerate.append(p)
        else:
            sum_bi += loss.l_bi
        if loss.l_ret is not None:
            sum_ret += loss.l_ret
        if with_grad:
            if dropout is not None:
                dX = dX * dropout[p][0]
                dY = dY * dropout[p][1]
            np.add.at(grad, si, dX)
            np.add.at(grad, ti, dY)
    l_bi = sum_bi / n_pairs
    l_ret = sum_ret / n_pairs
    total = sum(loss.total for loss in losses) / n_pairs
    if with_grad:
        grad /= n_pairs
    report = LossReport(losses, l_bi, l_ret, total, degenerate, retention_active=config.alpha > 0)
    return report, grad


def corpus_loss(store: EmbeddingStore, corpus: ParallelCorpus, masks: list[RetentionMask],
                config: ObjectiveConfig, src_lang: str = "src", tgt_lang: str = "tgt") -> LossReport:
    table = corpus_parameter_view(store, corpus, src_lang, tgt_lang)
    report, _ = table_objective(table, table.vectors, masks, config, with_grad=False)
    return report


class GradientTable(dict):
    """Gradient per (language, word); words outside the corpus read as zeros."""

    def __init__(self, dim: int, *args):
        super().__init__(*args)
        self.dim = dim

    def __missing__(self, key):
        return np.zeros(self.dim)


def loss_gradients(store: EmbeddingStore, corpus: ParallelCorpus, masks: list[RetentionMask],
                   config: ObjectiveConfig, src_lang: str = "src", tgt_lang: str = "tgt") -> GradientTable:
    table = corpus_parameter_view(store, corpus, src_lang, tgt_lang)
    _, grad = table_objective(table, table.vectors, masks, config)
    return GradientTable(store.dim, zip(table.keys, grad))
