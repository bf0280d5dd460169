from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from clwe_align.aligner import Alignment
from clwe_align.corpus import GoldAlignment
from clwe_align.evaluation import PairCountMismatch, aggregate, evaluate, per_pair_breakdown


def A(links, k=0):
    return Alignment(k, frozenset(links))


def G(sure, possible=(), k=0):
    return GoldAlignment(k, set(sure), set(possible))


def test_perfect():
    r = evaluate([A({(0, 0), (1, 1)})], [G({(0, 0), (1, 1)})])
    assert (r.precision, r.recall, r.f1, r.aer) == (1.0, 1.0, 1.0, 0.0)


def test_empty_prediction():
    gold = [G({(k, k) for k in range(5)}, k=0), G({(k, k + 1) for k in range(5)}, k=1)]
    r = evaluate([A(set(), 0), A(set(), 1)], gold)
    assert (r.precision, r.recall, r.f1) == (1.0, 0.0, 0.0)
    assert r.sure == 10


def test_possible_links_count_for_precision_only():
    r = evaluate([A({(0, 0), (1, 1), (2, 2)})], [G({(0, 0), (1, 1)}, {(2, 2), (3, 3)})])
    assert (r.precision, r.recall, r.f1, r.aer) == (1.0, 1.0, 1.0, 0.0)
    assert (r.predicted, r.sure, r.hit_sure, r.hit_possible) == (3, 2, 2, 3)


def test_mismatch():
    with pytest.raises(PairCountMismatch):
        evaluate([A(set())], [])
    with pytest.raises(PairCountMismatch):
        evaluate([A(set(), 1)], [G(set(), k=0)])


def test_per_pair_single_equals_corpus():
    pred, gold = [A({(0, 0), (0, 1)})], [G({(0, 0)}, {(1, 1)})]
    assert per_pair_breakdown(pred, gold)[0] == evaluate(pred, gold)


def test_per_pair_counts_sum():
    pred = [A({(0, 0), (0, 1)}, 0), A({(1, 1)}, 1), A({(2, 2)}, 2)]
    gold = [G({(0, 0)}, {(0, 1)}, 0), G(set(), k=1), G({(2, 2), (3, 3)}, k=2)]
    parts = per_pair_breakdown(pred, gold)
    # empty-gold pair: recall convention applies per pair, but only counts are aggregated
    assert parts[1].recall == 1.0 and parts[1].sure == 0
    total = evaluate(pred, gold)
    assert aggregate(parts) == total
    assert total.sure == sum(p.sure for p in parts)
    assert total.recall == float(Fraction(2, 3))
    assert total.precision == float(Fraction(3, 4))


sure_links = st.sets(st.tuples(st.integers(0, 4), st.integers(0, 4)), max_size=8)


@given(sure_links, sure_links, sure_links, st.tuples(st.integers(0, 4), st.integers(0, 4)))
def test_adding_sure_link_never_raises_aer(pred, sure, possible, extra):
    possible = possible - sure
    sure = sure | {extra}
    before = evaluate([A(pred)], [G(sure, possible)])
    after = evaluate([A(pred | {extra})], [G(sure, possible)])
    assert after.hit_sure >= before.hit_sure and after.hit_possible >= before.hit_possible
    assert after.aer <= before.aer


@given(st.lists(st.tuples(sure_links, sure_links, sure_links), min_size=1, max_size=5), st.randoms())
def test_permutation_invariant(cases, rnd):
    pred = [A(p, k) for k, (p, _, _) in enumerate(cases)]
    gold = [G(s, q - s, k) for k, (_, s, q) in enumerate(cases)]
    order = list(range(len(cases)))
    rnd.shuffle(order)
    shuffled_pred = [A(pred[o].links, k) for k, o in enumerate(order)]
    shuffled_gold = [G(gold[o].sure, gold[o].possible, k) for k, o in enumerate(order)]
    assert evaluate(pred, gold) == evaluate(shuffled_pred, shuffled_gold)


@given(st.lists(st.tuples(sure_links, sure_links, sure_links), min_size=1, max_size=5))
def test_ratios_in_unit_interval(cases):
    pred = [A(p, k) for k, (p, _, _) in enumerate(cases)]
    gold = [G(s, q - s, k) for k, (_, s, q) in enumerate(cases)]
    r = evaluate(pred, gold)
    for value in (r.precision, r.recall, r.f1, r.aer):
        assert 0.0 <= value <= 1.0
    if r.precision + r.recall > 0:
        assert r.f1 == pytest.approx(2 * r.precision * r.recall / (r.precision + r.recall), rel=1e-12)


def test_report_format():
    text = evaluate([A({(0, 0)})], [G({(0, 0)})]).report()
    assert text.splitlines()[0] == "precision=1.000000 recall=1.000000 f1=1.000000 aer=0.000000"
    assert "predicted=1 sure=1 hit_sure=1 hit_possible=1" in text
