"""Property tests: each invariant on systems drawn from a hypothesis seed."""
from __future__ import annotations

import random

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from pdekit.pdesys import prolong, same_row_space, solved_form

from invariants import (all_checks, check_delta_squared, check_double_adjoint,
                        random_system)

seeds = st.integers(0, 2**32 - 1)
slow = settings(deadline=None, suppress_health_check=[HealthCheck.too_slow])


@settings(slow, max_examples=40)
@given(seeds)
def test_constant_coefficient_invariants(seed):
    s = random_system(random.Random(seed))
    assert all_checks(s, cap=3) == []


@settings(slow, max_examples=10)
@given(seeds)
def test_variable_coefficient_invariants(seed):
    s = random_system(random.Random(seed), variable_coefficients=True, max_n=2)
    assert check_delta_squared(s, levels=1) is None
    assert check_double_adjoint(s) is None


@settings(slow, max_examples=25)
@given(seeds, st.integers(0, 1), st.integers(0, 1))
def test_prolongations_compose(seed, a, b):
    s = random_system(random.Random(seed), max_n=2)
    once = prolong(s, a + b)
    twice = prolong(prolong(s, a), b)
    assert same_row_space(once.rows, twice.rows)


@settings(slow, max_examples=25)
@given(seeds)
def test_solved_form_is_idempotent(seed):
    s = random_system(random.Random(seed))
    sol = solved_form(s)
    again = solved_form(s.with_rows([r for _, r in sol.rows()], declared_order=sol.q))
    assert [j for j, _ in again.rows()] == [j for j, _ in sol.rows()]
    assert same_row_space([r for _, r in again.rows()], [r for _, r in sol.rows()])
