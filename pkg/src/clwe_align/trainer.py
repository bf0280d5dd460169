"""Full-batch Adam fine-tuning of corpus embeddings with embedding dropout."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .corpus import ParallelCorpus
from .embeddings import EmbeddingStore, corpus_parameter_view, snapshot, write_back
from .objective import (
    LossReport,
    ObjectiveConfig,
    RetentionMask,
    build_retention_masks_from_table,
    table_objective,
)

log = logging.getLogger(__name__)


class NonFiniteLoss(FloatingPointError):
    """Raised when the loss or gradient stops being finite.

    ``state`` holds the slot vectors from before the failing step.
    """

    def __init__(self, iteration: int, state: dict):
        self.iteration = iteration
        self.state = state
        super().__init__(f"non-finite loss or gradient at iteration {iteration}")


@dataclass(frozen=True)
class TrainConfig:
    iterations: int = 500
    learning_rate: float = 0.001
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    dropout_rate: float = 0.5
    seed: int = 0
    objective: ObjectiveConfig = field(default_factory=ObjectiveConfig)

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not 0 <= self.dropout_rate < 1:
            raise ValueError("dropout_rate must be in [0, 1)")


@dataclass
class IterationRecord:
    iteration: int
    l_bi: float
    l_ret: float | None
    total: float
    seconds: float


@dataclass
class TrainingTrace:
    records: list[IterationRecord] = field(default_factory=list)
    masks: list[RetentionMask] = field(default_factory=list)
    final: dict | None = None

    def __len__(self) -> int:
        return len(self.records)

    def totals(self) -> list[float]:
        return [r.total for r in self.records]

    def to_tsv(self, timing: bool = True) -> str:
        lines = []
        for r in self.records:
            ret = 0.0 if r.l_ret is None else r.l_ret
            secs = r.seconds if timing else 0.0
            lines.append(f"{r.iteration}\t{r.l_bi:.10f}\t{ret:.10f}\t{r.total:.10f}\t{secs:.6f}")
        return "".join(line + "\n" for line in lines)


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros_like(cls, params: np.ndarray) -> "AdamState":
        return cls(np.zeros_like(params), np.zeros_like(params), 0)


def adam_step(params: np.ndarray, grads: np.ndarray, state: AdamState, config: TrainConfig) -> np.ndarray:
    """One bias-corrected Adam update; mutates ``state`` and returns new params."""
    if params.shape != grads.shape:
        raise ValueError(f"shape mismatch {params.shape} vs {grads.shape}")
    b1, b2 = config.adam_beta1, config.adam_beta2
    state.step += 1
    state.m = b1 * state.m + (1 - b1) * grads
    state.v = b2 * state.v + (1 - b2) * grads * grads
    m_hat = state.m / (1 - b1 ** state.step)
    v_hat = state.v / (1 - b2 ** state.step)
    return params - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_epsilon)


def _dropout_rng(seed: int, iteration: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, iteration])


def apply_dropout(vectors: np.ndarray, rate: float, seed: int, iteration: int) -> np.ndarray:
    """Inverted dropout with a mask keyed by (seed, iteration)."""
    if rate == 0:
        return vectors
    return vectors * dropout_mask(vectors.shape, rate, _dropout_rng(seed, iteration))


def dropout_mask(shape, rate: float, rng: np.random.Generator) -> np.ndarray:
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)


def _corpus_dropout(table, dim: int, rate: float, seed: int, iteration: int):
    if rate == 0:
        return None
    rng = _dropout_rng(seed, iteration)
    return [
        (dropout_mask((len(si), dim), rate, rng), dropout_mask((len(ti), dim), rate, rng))
        for si, ti in zip(table.src_index, table.tgt_index)
    ]


def _table_state(table, vectors) -> dict:
    return {key: row.copy() for key, row in zip(table.keys, vectors)}


def finetune(store: EmbeddingStore, corpus: ParallelCorpus, config: TrainConfig,
             src_lang: str = "src", tgt_lang: str = "tgt",
             callback=None) -> tuple[EmbeddingStore, TrainingTrace]:
    """Fine-tune the corpus' word vectors in ``store`` in place.

    Retention masks come from the store as passed in, before any update.
    Dropout only perturbs the forward/backward pass; stored vectors are the
    undropped parameters. ``callback(iteration, report, vectors)`` is called
    after each step if given.
    """
    table = corpus_parameter_view(store, corpus, src_lang, tgt_lang)
    masks = build_retention_masks_from_table(table)
    trace = TrainingTrace(masks=masks)
    if config.iterations == 0:
        return store, trace

    dim = store.dim
    params = table.vectors.copy()
    adam = AdamState.zeros_like(params)
    for it in range(1, config.iterations + 1):
        started = time.perf_counter()
        dropout = _corpus_dropout(table, dim, config.dropout_rate, config.seed, it)
        report, grad = table_objective(table, params, masks, config.objective, dropout)
        if not (np.isfinite(report.total) and np.all(np.isfinite(grad))):
            raise NonFiniteLoss(it, _table_state(table, params))
        params = adam_step(params, grad, adam, config)
        elapsed = time.perf_counter() - started
        trace.records.append(_record(it, report, elapsed))
        if callback is not None:
            callback(it, report, params)
        if it == 1 or it % 50 == 0:
            log.debug("iteration %d total=%.6f l_bi=%.6f l_ret=%.6f", it, report.total, report.l_bi, report.l_ret)

    if not np.all(np.isfinite(params)):
        raise NonFiniteLoss(config.iterations, _table_state(table, params))
    write_back(store, table, params)
    trace.final = snapshot(store)
    return store, trace


def _record(iteration: int, report: LossReport, seconds: float) -> IterationRecord:
    l_ret = report.l_ret if report.retention_active else None
    return IterationRecord(iteration, report.l_bi, l_ret, report.total, seconds)
