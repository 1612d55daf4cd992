from __future__ import annotations

import random

from pdekit.exactalg import QQ_FIELD, ScalarField
from pdekit.jetspace import indices_up_to
from pdekit.operators import OperatorMatrix, adjoint, compose

Q = QQ_FIELD


def op(entries, vars, field=Q):
    return OperatorMatrix(entries, len(entries[0]), tuple(vars), field)


def test_adjoint_of_first_derivative_and_scalar():
    d1 = op([[{(1, 0): Q(1)}]], ("x1", "x2"))
    assert adjoint(d1).entries == [[{(1, 0): Q(-1)}]]
    a = op([[{(0, 0): Q(5)}]], ("x1", "x2"))
    assert adjoint(a).entries == [[{(0, 0): Q(5)}]]


def test_adjoint_moves_coefficients_through_derivatives():
    F = ScalarField(("x",))
    x = F.gen("x")
    # ad(x d) = -d o x = -x d - 1
    P = op([[{(1,): x}]], ("x",), F)
    assert adjoint(P).entries == [[{(1,): -x, (0,): -F.one}]]


def _random_operator(rng, rows, cols, field, vars, order):
    gens = [field.gen(v) for v in vars] if field.gens else []
    out = []
    for _ in range(rows):
        row = []
        for _ in range(cols):
            e = {}
            for mu in rng.sample(list(indices_up_to(len(vars), order)), 2):
                c = field(rng.randint(-3, 3))
                if gens and rng.random() < 0.5:
                    c = c * rng.choice(gens) + field(rng.randint(0, 2))
                if c:
                    e[mu] = c
            row.append(e)
        out.append(row)
    return OperatorMatrix(out, cols, tuple(vars), field)


def _norm(P):
    return [[{k: v for k, v in e.items() if v} for e in r] for r in P.entries]


def test_adjoint_is_an_involution():
    rng = random.Random(7)
    F = ScalarField(("x1", "x2"))
    for _ in range(15):
        P = _random_operator(rng, 2, 2, F, ("x1", "x2"), 3)
        assert _norm(adjoint(adjoint(P))) == _norm(P)


def test_adjoint_reverses_composition():
    rng = random.Random(11)
    F = ScalarField(("x1", "x2"))
    for _ in range(10):
        P = _random_operator(rng, 2, 2, F, ("x1", "x2"), 2)
        R = _random_operator(rng, 2, 2, F, ("x1", "x2"), 2)
        lhs = adjoint(compose(P, R))
        rhs = compose(adjoint(R), adjoint(P))
        assert _norm(lhs) == _norm(rhs)
