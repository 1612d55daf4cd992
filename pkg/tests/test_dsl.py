from __future__ import annotations

import pytest

from pdekit.dsl import parse_element, parse_system, render_system
from pdekit.errors import InconsistentArity, PdeSyntaxError, UndeclaredSymbol
from pdekit.exactalg import QQ_FIELD

from conftest import CORPUS

Q = QQ_FIELD


def test_quadrics_file():
    s = parse_system("field Q\nvars x1 x2 x3\nunknowns y\neq y[0,0,2] = 0\n"
                     "eq y[0,1,1] - y[2,0,0] = 0\neq y[0,2,0] = 0")
    assert (s.n, s.m, s.q) == (3, 1, 2)
    assert s.rows[1] == {(0, (0, 1, 1)): Q(1), (0, (2, 0, 0)): Q(-1)}


def test_airy_file():
    s = parse_system("field Q(x)\nvars x\nunknowns y\neq y[2] - x*y[0] = 0")
    x = s.field.gen("x")
    assert s.rows == ({(0, (2,)): s.field.one, (0, (0,)): -x},)


def test_rational_coefficients_and_powers():
    s = parse_system("field Q(x1,x2)\nvars x1 x2\nunknowns y\neq (x1^2 - 1/3)/x2*y[1,0] + 2*y[0,0] = 0")
    F = s.field
    x1, x2 = F.gen("x1"), F.gen("x2")
    assert s.rows[0][(0, (1, 0))] == (x1 ** 2 - F(1) / 3) / x2


def test_comments_and_blank_lines():
    s = parse_system("# header\nfield Q\n\nvars x\nunknowns y   # one unknown\neq y[1] = 0\n")
    assert len(s.rows) == 1


def test_arity_mismatch():
    with pytest.raises(InconsistentArity):
        parse_system("field Q\nvars x1 x2\nunknowns y\neq y[0,0,1] = 0")


def test_undeclared_unknown():
    with pytest.raises(UndeclaredSymbol):
        parse_system("field Q\nvars x1 x2\nunknowns y\neq z[0,0] = 0")


def test_coefficient_outside_field():
    with pytest.raises(PdeSyntaxError):
        parse_system("field Q\nvars x\nunknowns y\neq x*y[1] = 0")


@pytest.mark.parametrize("text, line", [
    ("field Q\nvars x\nunknowns y\neq y[1] + = 0", 4),
    ("field Q\nvars x\nunknowns y\neq y[1] = 1", 4),
    ("field Q\nvars x\nunknowns y\neq y[1] + 1 = 0", 4),
    ("field Q\nvars x\nunknowns y\neq y[1]*y[0] = 0", 4),
    ("field Q\nvars x\nunknowns y\neq y[1]/0 = 0", 4),
    ("field R\nvars x\nunknowns y", 1),
    ("field Q\nvars x\nunknowns y\nequation y[1] = 0", 4),
])
def test_syntax_errors_carry_position(text, line):
    with pytest.raises(PdeSyntaxError) as info:
        parse_system(text)
    assert info.value.line == line and info.value.column >= 1


def test_round_trip_on_corpus():
    files = sorted(CORPUS.glob("*.pde"))
    assert files
    for path in files:
        s = parse_system(path.read_text(encoding="utf-8"))
        again = parse_system(render_system(s))
        assert (again.vars, again.unknowns, again.field, again.rows) == (s.vars, s.unknowns, s.field, s.rows), path.name
        assert render_system(again) == render_system(s)


def test_element_parsing():
    s = parse_system("field Q\nvars x1 x2 x3\nunknowns y1 y2\neq y1[1,0,0] = 0")
    z = parse_element("y2[0,0,2] - y1[0,1,1] + y1[0,0,0]", s)
    assert z == {(1, (0, 0, 2)): Q(1), (0, (0, 1, 1)): Q(-1), (0, (0, 0, 0)): Q(1)}
    with pytest.raises(PdeSyntaxError):
        parse_element("3", s)
