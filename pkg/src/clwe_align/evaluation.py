"""Precision / recall / F1 / AER against sure and possible gold links.

Counts are summed over the corpus before any ratio is taken. Ratios are
computed as exact fractions and converted to float once.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .aligner import Alignment
from .corpus import GoldAlignment


class PairCountMismatch(ValueError):
    pass


@dataclass(frozen=True)
class EvalResult:
    precision: float
    recall: float
    f1: float
    aer: float
    predicted: int
    sure: int
    hit_sure: int
    hit_possible: int

    def report(self) -> str:
        return (
            f"precision={self.precision:.6f} recall={self.recall:.6f} "
            f"f1={self.f1:.6f} aer={self.aer:.6f}\n"
            f"predicted={self.predicted} sure={self.sure} "
            f"hit_sure={self.hit_sure} hit_possible={self.hit_possible}\n"
        )


def from_counts(predicted: int, sure: int, hit_sure: int, hit_possible: int) -> EvalResult:
    # empty denominators: P = 1 when nothing is predicted, R = 1 when there is no sure link,
    # AER = 0 when both are empty
    p = Fraction(hit_possible, predicted) if predicted else Fraction(1)
    r = Fraction(hit_sure, sure) if sure else Fraction(1)
    f1 = 2 * p * r / (p + r) if p + r > 0 else Fraction(0)
    denom = predicted + sure
    aer = 1 - Fraction(hit_sure + hit_possible, denom) if denom else Fraction(0)
    return EvalResult(float(p), float(r), float(f1), float(aer), predicted, sure, hit_sure, hit_possible)


def _pair_counts(pred: Alignment, gold: GoldAlignment) -> tuple[int, int, int, int]:
    links = set(pred.links)
    sure = set(gold.sure)
    allowed = sure | set(gold.possible)
    return len(links), len(sure), len(links & sure), len(links & allowed)


def _check(predicted, gold):
    if len(predicted) != len(gold):
        raise PairCountMismatch(f"{len(predicted)} predicted alignments vs {len(gold)} gold")
    for a, g in zip(predicted, gold):
        if a.pair_id != g.pair_id:
            raise PairCountMismatch(f"pair id {a.pair_id} does not match gold pair id {g.pair_id}")


def per_pair_breakdown(predicted: list[Alignment], gold: list[GoldAlignment]) -> list[EvalResult]:
    _check(predicted, gold)
    return [from_counts(*_pair_counts(a, g)) for a, g in zip(predicted, gold)]


def evaluate(predicted: list[Alignment], gold: list[GoldAlignment]) -> EvalResult:
    _check(predicted, gold)
    totals = [0, 0, 0, 0]
    for a, g in zip(predicted, gold):
        for k, c in enumerate(_pair_counts(a, g)):
            totals[k] += c
    return from_counts(*totals)


def aggregate(results: list[EvalResult]) -> EvalResult:
    return from_counts(
        sum(r.predicted for r in results),
        sum(r.sure for r in results),
        sum(r.hit_sure for r in results),
        sum(r.hit_possible for r in results),
    )
