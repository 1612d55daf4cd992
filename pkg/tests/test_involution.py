from __future__ import annotations

from math import comb

import pytest

from pdekit.dsl import parse_system
from pdekit.errors import NotFormallyIntegrable, OrderCapExceeded
from pdekit.involution import (
    characters, complete_to_involution, delta_regular_search, hilbert_function, identity,
    involution_test, janet_board,
)
from pdekit.pdesys import apply_change, solved_form
from pdekit.symbolcalc import symbol

from conftest import load


def test_single_equation_board():
    sol = solved_form(parse_system("field Q\nvars x1 x2 x3\nunknowns y\neq y[0,0,2] = 0"))
    board = janet_board(sol)
    assert [r.multiplicative for r in board.rows] == [(1, 2, 3)]
    assert board.beta == (0, 0, 1)


def test_permuted_pair_board_and_characters():
    inv = complete_to_involution(load("permuted_pair"))
    board = janet_board(inv.solved)
    assert [r.cls for r in board.rows] == [3, 2, 2, 1]
    assert characters(board).alpha == (2, 0, 0)
    assert involution_test(inv.solved) == (True, None)


def test_first_order_board():
    inv = complete_to_involution(load("first_order_2u_ck"))
    assert sorted(r.cls for r in janet_board(inv.solved).rows) == [1, 2, 2]


def test_quadrics_not_involutive():
    ok, witness = involution_test(solved_form(load("quadrics_finite_type")))
    assert not ok and witness is not None


def test_involution_test_requires_integrability():
    s = parse_system("field Q\nvars x1 x2 x3\nunknowns y\neq y[2,0,0] = 0\neq y[1,0,1] - y[0,1,0] = 0")
    with pytest.raises(NotFormallyIntegrable):
        involution_test(solved_form(s))


def test_bilinear_quadric_after_change():
    A = ((1, 0, 0, 1), (0, 1, 1, 0), (0, 0, 1, 0), (0, 0, 0, 1))
    sol = solved_form(apply_change(load("bilinear_quad"), A))
    assert involution_test(sol)[0]
    assert characters(janet_board(sol)).alpha == (4, 2, 0, 0)


def test_regular_input_keeps_identity():
    inv = complete_to_involution(load("first_order_2u_ck"))
    change, _, _ = delta_regular_search(inv.solved)
    assert change == identity(2)


def test_monomial_pair_characters():
    inv = complete_to_involution(load("monomial_pair"))
    assert inv.q == 8 and inv.characters.alpha == (5, 0)


def test_rational_coefficient_completion():
    s = load("rational_coefficients")
    inv = complete_to_involution(s)
    assert inv.q == 3
    F = s.field
    assert inv.solved.contains({(0, (0, 1)): F.one})
    assert inv.solved.contains({(0, (3, 0)): F.one, (0, (0, 0)): -F.one})
    # every input equation survives in the completed system
    assert all(inv.solved.contains(r) for r in s.rows)


def test_hilbert_function_against_direct_count():
    inv = complete_to_involution(load("permuted_pair"))
    for r in range(4):
        assert hilbert_function(inv, r) == inv.solved.prolonged(r).dim_R()
    assert [hilbert_function(inv, r) for r in range(4)] == [6, 8, 10, 12]


def test_hilbert_function_finite_type():
    inv = complete_to_involution(load("quadrics_finite_type"))
    assert inv.solved.dim_R() == 1 + 3 + 3 + 1


def test_hilbert_function_empty_system():
    inv = complete_to_involution(parse_system("field Q\nvars x1 x2\nunknowns y\neq y[0,0] - y[0,0] = 0"))
    n, m = 2, 1
    for r in range(3):
        assert hilbert_function(inv, r) == m * comb(n + inv.q + r, inv.q + r)


def test_symbol_growth_matches_characters():
    for name in ("permuted_pair", "first_order_3u_ck", "janet_system"):
        inv = complete_to_involution(load(name))
        alpha = inv.characters.alpha
        for r in range(1, 4):
            want = sum(comb(r + i - 1, r) * alpha[i - 1] for i in range(1, inv.n + 1))
            assert symbol(inv.solved, r).dim == want, name


def test_order_cap():
    with pytest.raises(OrderCapExceeded):
        complete_to_involution(load("monomial_pair"), max_order=7)


def test_log_records_steps():
    inv = complete_to_involution(load("permuted_pair"))
    actions = [e["action"] for e in inv.log]
    assert "change" in actions
