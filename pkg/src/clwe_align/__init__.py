"""Word alignment for very small parallel corpora with cross-lingual embeddings."""

__version__ = "0.1.0"

from .aligner import Alignment, align_corpus, directional_align, similarity_matrix, symmetrize_gdfa, symmetrize_intersection
from .corpus import GoldAlignment, ParallelCorpus, read_gold_alignments, read_parallel_corpus
from .embeddings import EmbeddingStore, load_bilingual, load_embeddings
from .evaluation import EvalResult, evaluate
from .objective import ObjectiveConfig, corpus_loss, loss_gradients
from .trainer import TrainConfig, finetune

__all__ = [
    "Alignment", "align_corpus", "directional_align", "similarity_matrix",
    "symmetrize_gdfa", "symmetrize_intersection",
    "GoldAlignment", "ParallelCorpus", "read_gold_alignments", "read_parallel_corpus",
    "EmbeddingStore", "load_bilingual", "load_embeddings",
    "EvalResult", "evaluate",
    "ObjectiveConfig", "corpus_loss", "loss_gradients",
    "TrainConfig", "finetune",
]
