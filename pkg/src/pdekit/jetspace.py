"""Multi-indices, jet variables and the canonical jet ordering.

A multi-index is a tuple of n non-negative ints.  A jet variable is a pair
``(k, mu)`` with ``k`` the 0-based unknown index.  Variable indices in the
public helpers are 1-based, matching the usual x^1..x^n labels.

Ordering: order |mu| first; within one order a higher class is greater; within
one class compare the exponents from the last coordinate backwards (larger is
greater); finally the lower unknown index is greater.  Principal jets are the
greatest jets of their rows.
"""
from __future__ import annotations

import functools
import itertools
from math import comb
from typing import Iterator

from .errors import IndexOutOfRange

MultiIndex = tuple
Jet = tuple  # (k, mu)


def order(mu: MultiIndex) -> int:
    return sum(mu)


def class_of(mu: MultiIndex) -> int | None:
    """Smallest 1-based i with mu_i != 0, None for the zero index."""
    for i, e in enumerate(mu):
        if e:
            return i + 1
    return None


def add_unit(mu: MultiIndex, i: int) -> MultiIndex:
    if not 1 <= i <= len(mu):
        raise IndexOutOfRange(f"variable index {i} outside 1..{len(mu)}")
    return mu[: i - 1] + (mu[i - 1] + 1,) + mu[i:]


def sub_unit(mu: MultiIndex, i: int) -> MultiIndex | None:
    if not mu[i - 1]:
        return None
    return mu[: i - 1] + (mu[i - 1] - 1,) + mu[i:]


def zero_index(n: int) -> MultiIndex:
    return (0,) * n


def unit(n: int, i: int) -> MultiIndex:
    return add_unit(zero_index(n), i)


def mi_add(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def mi_sub(a: MultiIndex, b: MultiIndex) -> MultiIndex | None:
    out = tuple(x - y for x, y in zip(a, b))
    return None if any(x < 0 for x in out) else out


def mi_leq(a: MultiIndex, b: MultiIndex) -> bool:
    return all(x <= y for x, y in zip(a, b))


def mi_binomial(a: MultiIndex, b: MultiIndex) -> int:
    out = 1
    for x, y in zip(a, b):
        out *= comb(x, y)
    return out


@functools.lru_cache(maxsize=None)
def indices_of_order(n: int, q: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of length n and order exactly q, ascending jet order."""
    out = []
    for combo in itertools.combinations_with_replacement(range(n), q):
        mu = [0] * n
        for c in combo:
            mu[c] += 1
        out.append(tuple(mu))
    return tuple(sorted(out, key=index_key))


def indices_up_to(n: int, q: int) -> Iterator[MultiIndex]:
    for r in range(q + 1):
        yield from indices_of_order(n, r)


def sub_indices(mu: MultiIndex) -> Iterator[MultiIndex]:
    """All lambda <= mu componentwise."""
    for lam in itertools.product(*[range(e + 1) for e in mu]):
        yield lam


@functools.lru_cache(maxsize=None)
def index_key(mu: MultiIndex) -> tuple:
    """Degree, then class, then the first differing exponent with the smaller
    one ranking higher.  The last rule already implies the class rule and
    makes the order compatible with adding units."""
    cls = class_of(mu) or 0
    return (sum(mu), cls, tuple(-e for e in mu))


@functools.lru_cache(maxsize=None)
def jet_key(jet: Jet) -> tuple:
    k, mu = jet
    return index_key(mu) + (-k,)


def jet_compare(a: Jet, b: Jet) -> int:
    """-1, 0, 1 as a is smaller, equal, greater than b."""
    ka, kb = jet_key(a), jet_key(b)
    return (ka > kb) - (ka < kb)


def jets_up_to(n: int, m: int, q: int) -> list[Jet]:
    """All jets of order <= q in ascending jet order."""
    out = [(k, mu) for r in range(q + 1) for mu in indices_of_order(n, r) for k in range(m)]
    return sorted(out, key=jet_key)


def jets_of_order(n: int, m: int, q: int) -> list[Jet]:
    return sorted(((k, mu) for mu in indices_of_order(n, q) for k in range(m)), key=jet_key)


def count_jets(n: int, m: int, q: int) -> int:
    return m * comb(n + q, q)


def count_symbol(n: int, m: int, q: int) -> int:
    return m * comb(n + q - 1, q)


def count_class(n: int, q: int, i: int) -> int:
    """Number of multi-indices of order q >= 1 and class i."""
    return comb(q + n - i - 1, q - 1)


def jet_order(jet: Jet) -> int:
    return sum(jet[1])


def jet_class(jet: Jet) -> int | None:
    return class_of(jet[1])


def jet_shift(jet: Jet, i: int) -> Jet:
    return (jet[0], add_unit(jet[1], i))


def index_digits(mu: MultiIndex, labels: tuple[str, ...] | None = None) -> str:
    """'1113' style rendering; labels give the digit for each coordinate."""
    labels = labels or tuple(str(i + 1) for i in range(len(mu)))
    text = "".join(labels[i] * e for i, e in enumerate(mu))
    return text or "0"
