"""Parallel corpus and gold alignment readers.

Corpus lines look like ``aaa bbb xxx ||| 111 000 222``. Gold lines hold
0-based links, ``i-j`` for sure and ``i?j`` for possible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

SEPARATOR = " ||| "


class CorpusError(ValueError):
    """Base class for malformed corpus or gold input."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class MissingSeparator(CorpusError):
    pass


class EmptySide(CorpusError):
    pass


class MalformedLink(CorpusError):
    def __init__(self, line: int, token: str, path: str | None = None):
        self.token = token
        super().__init__(f"malformed link {token!r}", line=line, path=path)


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[str, ...]

    def __post_init__(self):
        if len(self.tokens) == 0:
            raise ValueError("sentence must have at least one token")
        if any(t == "" for t in self.tokens):
            raise ValueError("empty token in sentence")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]


@dataclass(frozen=True)
class SentencePair:
    source: Sentence
    target: Sentence
    pair_id: int


@dataclass(frozen=True)
class ParallelCorpus:
    pairs: tuple[SentencePair, ...]

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("corpus is empty")
        for k, pair in enumerate(self.pairs):
            if pair.pair_id != k:
                raise ValueError(f"pair_id {pair.pair_id} at position {k}")

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, k: int) -> SentencePair:
        return self.pairs[k]

    @classmethod
    def from_token_lists(cls, pairs: Iterable[tuple[Iterable[str], Iterable[str]]]) -> "ParallelCorpus":
        return cls(tuple(
            SentencePair(Sentence(tuple(s)), Sentence(tuple(t)), k)
            for k, (s, t) in enumerate(pairs)
        ))

    def prefix(self, size: int) -> "ParallelCorpus":
        if size < 1 or size > len(self.pairs):
            raise ValueError(f"prefix size {size} outside 1..{len(self.pairs)}")
        return ParallelCorpus(self.pairs[:size])


@dataclass
class GoldAlignment:
    pair_id: int
    sure: set[tuple[int, int]] = field(default_factory=set)
    possible: set[tuple[int, int]] = field(default_factory=set)


def parse_corpus_line(line: str, lineno: int = 1, path: str | None = None) -> tuple[list[str], list[str]]:
    if line.count(SEPARATOR) != 1:
        raise MissingSeparator("expected exactly one ' ||| ' separator", line=lineno, path=path)
    left, right = line.split(SEPARATOR)
    src, tgt = left.split(), right.split()
    if not src or not tgt:
        raise EmptySide("source or target side is empty", line=lineno, path=path)
    return src, tgt


def read_parallel_corpus(path) -> ParallelCorpus:
    path = Path(path)
    pairs = []
    with path.open(encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            pairs.append(parse_corpus_line(line, lineno, str(path)))
    if not pairs:
        raise CorpusError("corpus file has no lines", path=str(path))
    return ParallelCorpus.from_token_lists(pairs)


def format_corpus_line(pair: SentencePair) -> str:
    return " ".join(pair.source) + SEPARATOR + " ".join(pair.target)


def write_parallel_corpus(corpus: ParallelCorpus, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for pair in corpus:
            f.write(format_corpus_line(pair) + "\n")


_LINK = re.compile(r"^(\d+)([-?])(\d+)$")


def parse_gold_line(line: str, pair_id: int, lineno: int | None = None, path: str | None = None) -> GoldAlignment:
    gold = GoldAlignment(pair_id)
    for token in line.split():
        m = _LINK.match(token)
        if m is None:
            raise MalformedLink(lineno if lineno is not None else pair_id + 1, token, path)
        link = (int(m.group(1)), int(m.group(3)))
        if m.group(2) == "-":
            gold.sure.add(link)
        else:
            gold.possible.add(link)
    gold.possible -= gold.sure
    return gold


def read_gold_alignments(path) -> list[GoldAlignment]:
    path = Path(path)
    with path.open(encoding="utf-8") as f:
        return [
            parse_gold_line(line, k, k + 1, str(path))
            for k, line in enumerate(f)
        ]


def validate_gold(corpus: ParallelCorpus, gold: list[GoldAlignment]) -> list[str]:
    """Return human-readable findings; an empty list means the gold file fits the corpus."""
    findings = []
    if len(corpus) != len(gold):
        findings.append(f"count mismatch: corpus has {len(corpus)} pairs, gold has {len(gold)} lines")
    for g, pair in zip(gold, corpus):
        n, m = len(pair.source), len(pair.target)
        for kind, links in (("sure", g.sure), ("possible", g.possible)):
            for i, j in sorted(links):
                if i >= n or j >= m:
                    findings.append(
                        f"pair {pair.pair_id}: {kind} link {i}-{j} out of range for {n}x{m} pair"
                    )
    return findings
