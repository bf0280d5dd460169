"""Cross-lingual embedding storage, lookup and the trainable parameter view.

Vectors are kept unnormalized; cosine is computed at use sites. Unknown
words get a deterministic pseudo-random vector (seeded from the surface form)
scaled to the mean norm of the language's known vectors, so they stay
distinct from each other and remain trainable.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import ParallelCorpus

FOUND = "found"
FOUND_LOWER = "found-after-lowercase"
OOV = "oov"


class EmbeddingError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        prefix = ""
        if path is not None:
            prefix = f"{path}:" + (f"{line}: " if line is not None else " ")
        elif line is not None:
            prefix = f"line {line}: "
        super().__init__(prefix + message)


class BadHeader(EmbeddingError):
    pass


class DimensionMismatch(EmbeddingError):
    pass


class NonFiniteValue(EmbeddingError):
    pass


class _Table:
    """Word -> row of a float64 matrix, plus words added after loading."""

    def __init__(self, words: list[str], matrix: np.ndarray):
        self.index = {}
        for k, w in enumerate(words):
            self.index.setdefault(w, k)
        self.words = words
        self.matrix = matrix
        self.added: dict[str, np.ndarray] = {}
        norms = np.linalg.norm(matrix, axis=1) if len(matrix) else np.zeros(0)
        self.mean_norm = float(norms.mean()) if len(norms) else 1.0
        if not self.mean_norm > 0:
            self.mean_norm = 1.0

    def get(self, word: str) -> np.ndarray | None:
        k = self.index.get(word)
        if k is not None:
            return self.matrix[k]
        return self.added.get(word)

    def __contains__(self, word: str) -> bool:
        return word in self.index or word in self.added

    def set(self, word: str, vec: np.ndarray) -> None:
        k = self.index.get(word)
        if k is not None:
            self.matrix[k] = vec
        else:
            self.added[word] = np.array(vec, dtype=np.float64)

    def remove_added(self, word: str) -> None:
        self.added.pop(word, None)

    def items(self):
        for w, k in self.index.items():
            yield w, self.matrix[k]
        yield from self.added.items()


@dataclass
class TokenResolution:
    token: str
    status: str
    key: str
    vector: np.ndarray


def _oov_seed(word: str, seed: int) -> int:
    digest = hashlib.blake2b(word.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") ^ (seed & 0xFFFFFFFFFFFFFFFF)


class EmbeddingStore:
    """Embeddings for one or more language tags sharing one dimension."""

    def __init__(self, dim: int, oov_seed: int = 0):
        if dim < 2:
            raise ValueError(f"embedding dimension must be >= 2, got {dim}")
        self.dim = dim
        self.oov_seed = oov_seed
        self.trainable: set[tuple[str, str]] = set()
        self._tables: dict[str, _Table] = {}

    @property
    def languages(self) -> list[str]:
        return list(self._tables)

    def add_language(self, language: str, words: list[str], matrix: np.ndarray) -> None:
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[1] != self.dim or matrix.shape[0] != len(words):
            raise DimensionMismatch(f"matrix shape {matrix.shape} does not fit {len(words)} words x dim {self.dim}")
        self._tables[language] = _Table(list(words), matrix.copy())

    def merge(self, other: "EmbeddingStore") -> "EmbeddingStore":
        if other.dim != self.dim:
            raise DimensionMismatch(f"cannot merge dim {other.dim} into dim {self.dim}")
        for lang, table in other._tables.items():
            self._tables[lang] = table
        return self

    def vocabulary(self, language: str) -> list[str]:
        t = self._tables[language]
        return t.words + list(t.added)

    def get(self, language: str, word: str) -> np.ndarray | None:
        table = self._tables.get(language)
        return None if table is None else table.get(word)

    def set(self, language: str, word: str, vector: np.ndarray) -> None:
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (self.dim,):
            raise DimensionMismatch(f"vector shape {vector.shape}, expected ({self.dim},)")
        self._tables[language].set(word, vector)

    def items(self, language: str):
        return self._tables[language].items()

    def oov_vector(self, language: str, word: str) -> np.ndarray:
        rng = np.random.default_rng(_oov_seed(word, self.oov_seed))
        v = rng.standard_normal(self.dim)
        table = self._tables.get(language)
        scale = table.mean_norm if table is not None else 1.0
        return v * (scale / np.linalg.norm(v))

    def resolve(self, language: str, token: str) -> TokenResolution:
        vec = self.get(language, token)
        if vec is not None:
            return TokenResolution(token, FOUND, token, vec)
        lowered = token.lower()
        if lowered != token:
            vec = self.get(language, lowered)
            if vec is not None:
                return TokenResolution(token, FOUND_LOWER, lowered, vec)
        return TokenResolution(token, OOV, token, self.oov_vector(language, token))

    def copy(self) -> "EmbeddingStore":
        new = EmbeddingStore(self.dim, self.oov_seed)
        for lang, table in self._tables.items():
            t = _Table.__new__(_Table)
            t.index = dict(table.index)
            t.words = list(table.words)
            t.matrix = table.matrix.copy()
            t.added = {w: v.copy() for w, v in table.added.items()}
            t.mean_norm = table.mean_norm
            new._tables[lang] = t
        new.trainable = set(self.trainable)
        return new


def load_embeddings(path, language: str, limit: int | None = None, oov_seed: int = 0) -> EmbeddingStore:
    """Read a word2vec text file (``count dim`` header, then ``word v1 .. vdim``)."""
    path = Path(path)
    spath = str(path)
    words: list[str] = []
    rows: list[np.ndarray] = []
    with path.open(encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 2:
            raise BadHeader("expected header 'count dim'", line=1, path=spath)
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError:
            raise BadHeader(f"non-integer header {' '.join(header)!r}", line=1, path=spath) from None
        if count < 0 or dim < 2:
            raise BadHeader(f"invalid header values count={count} dim={dim}", line=1, path=spath)
        for lineno, line in enumerate(f, start=2):
            if limit is not None and len(words) >= limit:
                break
            parts = line.rstrip("\r\n").rstrip(" ").split(" ")
            if parts == [""]:
                continue
            if len(parts) != dim + 1:
                raise DimensionMismatch(f"expected {dim} values, got {len(parts) - 1}", line=lineno, path=spath)
            try:
                vec = np.array(parts[1:], dtype=np.float64)
            except ValueError:
                raise EmbeddingError("unparseable value", line=lineno, path=spath) from None
            if not np.all(np.isfinite(vec)):
                raise NonFiniteValue("non-finite value in vector", line=lineno, path=spath)
            words.append(parts[0])
            rows.append(vec)
    store = EmbeddingStore(dim, oov_seed)
    matrix = np.vstack(rows) if rows else np.zeros((0, dim))
    store.add_language(language, words, matrix)
    return store


def load_bilingual(src_path, tgt_path, src_lang: str = "src", tgt_lang: str = "tgt",
                   limit: int | None = None, oov_seed: int = 0) -> EmbeddingStore:
    store = load_embeddings(src_path, src_lang, limit, oov_seed)
    return store.merge(load_embeddings(tgt_path, tgt_lang, limit, oov_seed))


def embeddings_text(store: EmbeddingStore, language: str) -> str:
    """One language in word2vec text format; ``repr`` floats round-trip exactly."""
    items = list(store.items(language))
    lines = [f"{len(items)} {store.dim}"]
    lines += [word + " " + " ".join(repr(x) for x in vec.tolist()) for word, vec in items]
    return "".join(line + "\n" for line in lines)


def save_embeddings(store: EmbeddingStore, language: str, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(embeddings_text(store, language))


@dataclass
class ParameterTable:
    """Trainable vector slots for the word types of one corpus.

    ``keys[k]`` is ``(language, entry)`` where ``entry`` is the store word a
    token resolved to (the lowercased form for case-folded hits, the surface
    form for OOV). ``src_index[p]`` / ``tgt_index[p]`` map token positions of
    pair ``p`` to slots.
    """

    keys: list[tuple[str, str]]
    vectors: np.ndarray
    status: list[str]
    src_index: list[np.ndarray]
    tgt_index: list[np.ndarray]
    src_lang: str = "src"
    tgt_lang: str = "tgt"
    slot_of: dict[tuple[str, str], int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.keys)

    def pair_vectors(self, p: int, vectors: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
        v = self.vectors if vectors is None else vectors
        return v[self.src_index[p]], v[self.tgt_index[p]]


def corpus_parameter_view(store: EmbeddingStore, corpus: ParallelCorpus,
                          src_lang: str = "src", tgt_lang: str = "tgt") -> ParameterTable:
    keys: list[tuple[str, str]] = []
    status: list[str] = []
    rows: list[np.ndarray] = []
    slot_of: dict[tuple[str, str], int] = {}
    cache: dict[tuple[str, str], int] = {}

    def slot(lang: str, token: str) -> int:
        hit = cache.get((lang, token))
        if hit is not None:
            return hit
        res = store.resolve(lang, token)
        key = (lang, res.key)
        k = slot_of.get(key)
        if k is None:
            k = len(keys)
            slot_of[key] = k
            keys.append(key)
            status.append(res.status)
            rows.append(np.array(res.vector, dtype=np.float64))
        cache[(lang, token)] = k
        return k

    src_index, tgt_index = [], []
    for pair in corpus:
        src_index.append(np.array([slot(src_lang, w) for w in pair.source], dtype=np.intp))
        tgt_index.append(np.array([slot(tgt_lang, w) for w in pair.target], dtype=np.intp))
    vectors = np.vstack(rows) if rows else np.zeros((0, store.dim))
    store.trainable = set(keys)
    return ParameterTable(keys, vectors, status, src_index, tgt_index, src_lang, tgt_lang, slot_of)


def write_back(store: EmbeddingStore, table: ParameterTable, vectors: np.ndarray | None = None) -> None:
    """Copy slot vectors into the store (OOV slots become new entries)."""
    v = table.vectors if vectors is None else vectors
    for (lang, word), row in zip(table.keys, v):
        store.set(lang, word, row.copy())


_ABSENT = None


def snapshot(store: EmbeddingStore) -> dict[tuple[str, str], np.ndarray | None]:
    """Deep copy of every trainable vector; entries not yet in the store map to None."""
    snap = {}
    for lang, word in sorted(store.trainable):
        vec = store.get(lang, word)
        snap[(lang, word)] = _ABSENT if vec is None else vec.copy()
    return snap


def restore(store: EmbeddingStore, snap: dict) -> None:
    for (lang, word), vec in snap.items():
        if vec is _ABSENT:
            store._tables[lang].remove_added(word)
        else:
            store.set(lang, word, vec.copy())


def snapshots_equal(a: dict, b: dict) -> bool:
    if a.keys() != b.keys():
        return False
    for k in a:
        x, y = a[k], b[k]
        if x is None or y is None:
            if x is not y:
                return False
        elif x.tobytes() != y.tobytes():
            return False
    return True


def cosine_matrix(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Pairwise cosine between rows; rows with zero norm give similarity 0."""
    nx = np.linalg.norm(X, axis=1)
    ny = np.linalg.norm(Y, axis=1)
    Xn = X / np.where(nx > 0, nx, 1.0)[:, None]
    Yn = Y / np.where(ny > 0, ny, 1.0)[:, None]
    return np.clip(Xn @ Yn.T, -1.0, 1.0)
