from __future__ import annotations

import itertools
from math import comb

import pytest
from hypothesis import given, strategies as st

from pdekit.errors import IndexOutOfRange
from pdekit.jetspace import (
    add_unit, class_of, count_jets, count_symbol, indices_of_order, indices_up_to, jet_compare,
    jet_key, jets_up_to,
)


def test_class_of():
    assert class_of((0, 0, 2)) == 3
    assert class_of((1, 0, 1)) == 1
    assert class_of((0, 0, 0)) is None


def test_add_unit():
    assert add_unit((1, 0), 2) == (1, 1)
    assert add_unit((0, 0, 0), 1) == (1, 0, 0)
    with pytest.raises(IndexOutOfRange):
        add_unit((0, 0), 3)
    with pytest.raises(IndexOutOfRange):
        add_unit((0, 0), 0)


def test_counts():
    assert count_jets(3, 1, 2) == 10 and count_symbol(3, 1, 2) == 6
    assert count_jets(2, 2, 1) == 6
    assert count_symbol(4, 1, 5) == 56
    for n, m, q in itertools.product(range(1, 4), range(1, 3), range(4)):
        assert count_jets(n, m, q) == len(jets_up_to(n, m, q)) == m * comb(n + q, q)
        assert count_symbol(n, m, q) == m * len(indices_of_order(n, q))


def _rule(a, b) -> int:
    """The ordering rule written out directly: order, then class, then the
    first differing exponent (smaller ranks higher), then lower unknown number
    greater."""
    (ka, ma), (kb, mb) = a, b
    for x, y in ((sum(ma), sum(mb)), (class_of(ma) or 0, class_of(mb) or 0)):
        if x != y:
            return -1 if x < y else 1
    if ma != mb:
        for x, y in zip(ma, mb):
            if x != y:
                return -1 if x > y else 1
    if ka != kb:
        return -1 if ka > kb else 1
    return 0


def test_second_order_classes_ordered():
    y = lambda mu: (0, mu)
    assert jet_compare(y((0, 0, 2)), y((0, 1, 1))) > 0
    assert jet_compare(y((0, 1, 1)), y((1, 0, 1))) > 0
    assert jet_compare(y((0, 0, 1)), y((2, 0, 0))) < 0


def test_ordering_matches_rule_exhaustively():
    jets = jets_up_to(3, 2, 3)
    for a, b in itertools.product(jets, repeat=2):
        assert jet_compare(a, b) == _rule(a, b)
        assert (jet_key(a) < jet_key(b)) == (_rule(a, b) < 0)


def test_class_after_adding_unit():
    for n in range(1, 5):
        for mu in indices_up_to(n, 4):
            if not any(mu):
                continue
            c = class_of(mu)
            for j in range(1, n + 1):
                assert class_of(add_unit(mu, j)) == (j if j < c else c)


mi = st.integers(1, 4).flatmap(lambda n: st.lists(st.integers(0, 3), min_size=n, max_size=n).map(tuple))


@given(mi, st.data())
def test_add_unit_commutes(mu, data):
    i = data.draw(st.integers(1, len(mu)))
    j = data.draw(st.integers(1, len(mu)))
    assert add_unit(add_unit(mu, i), j) == add_unit(add_unit(mu, j), i)
    assert sum(add_unit(mu, i)) == sum(mu) + 1


jet = st.tuples(st.integers(0, 1), st.lists(st.integers(0, 3), min_size=3, max_size=3).map(tuple))


@given(jet, jet, st.integers(1, 3))
def test_order_survives_differentiation(a, b, i):
    # leading jets of derived rows are the derived leading jets
    if jet_compare(a, b) < 0:
        assert jet_compare((a[0], add_unit(a[1], i)), (b[0], add_unit(b[1], i))) < 0


@given(jet, jet, jet)
def test_total_order(a, b, c):
    assert jet_compare(a, b) == -jet_compare(b, a)
    assert (jet_compare(a, b) == 0) == (a == b)
    if jet_compare(a, b) < 0 and jet_compare(b, c) < 0:
        assert jet_compare(a, c) < 0
