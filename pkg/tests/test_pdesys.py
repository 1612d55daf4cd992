from __future__ import annotations

from pdekit.dsl import parse_system
from pdekit.exactalg import QQ_FIELD
from pdekit.pdesys import fi_step, project, prolong, same_row_space, solved_form

from conftest import load

Q = QQ_FIELD


def sys3(*eqs: str, field: str = "Q", vars: str = "x1 x2 x3"):
    body = "\n".join(f"eq {e} = 0" for e in eqs)
    return parse_system(f"field {field}\nvars {vars}\nunknowns y\n{body}")


def y(*mu, c=1):
    return {(0, tuple(mu)): Q(c)}


def test_prolong_drops_rank_generically():
    s = parse_system("field Q(x)\nvars x\nunknowns y\neq x*y[1] - y[0] = 0")
    p = prolong(s, 1)
    x = s.field.gen("x")
    assert {(0, (2,)): x} in p.rows


def test_prolong_second_order_ode():
    s = parse_system("field Q(x)\nvars x\nunknowns y\neq y[2] - x*y[0] = 0")
    F = s.field
    x = F.gen("x")
    want = {(0, (3,)): F.one, (0, (1,)): -x, (0, (0,)): -F.one}
    assert want in prolong(s, 1).rows


def test_prolong_constant_coefficients():
    p = prolong(sys3("y[0,0,2]"), 1)
    assert same_row_space(p.rows, [y(0, 0, 2), y(1, 0, 2), y(0, 1, 2), y(0, 0, 3)])


def test_solved_form_elimination():
    sol = solved_form(sys3("y[0,1,1] - y[2,0,0]", "y[0,1,1]"))
    assert [r for _, r in sol.rows()] in ([y(0, 1, 1), y(2, 0, 0)], [y(2, 0, 0), y(0, 1, 1)])
    assert sol.principal == {(0, (0, 1, 1)), (0, (2, 0, 0))}


def test_solved_form_principal_jets():
    sol = solved_form(sys3("y[2,0,0]", "y[1,0,1] - y[0,1,0]"))
    assert sol.principal == {(0, (1, 0, 1)), (0, (2, 0, 0))}
    s = load("quadrics_finite_type")
    sol = solved_form(s)
    assert same_row_space([r for _, r in sol.rows()], s.rows)
    assert sol.principal == {(0, (0, 0, 2)), (0, (0, 1, 1)), (0, (0, 2, 0))}


def test_project_finds_hidden_equations():
    s = sys3("y[2,0,0]", "y[1,0,1] - y[0,1,0]")
    low = project(prolong(s, 1), 2)
    assert solved_form(low).contains(y(1, 1, 0))
    # homogeneous systems have no lower-order consequences
    assert project(prolong(load("quadrics_finite_type"), 1), 1).rows == ()


def test_fi_step():
    s = sys3("y[2,0,0]", "y[1,0,1] - y[0,1,0]")
    closed, new = fi_step(s)
    assert not closed and same_row_space(new.rows, [y(1, 1, 0)])
    closed, new = fi_step(s.with_rows(list(s.rows) + list(new.rows)))
    assert not closed and same_row_space(new.rows, [y(0, 2, 0)])
    closed, _ = fi_step(s.with_rows(list(s.rows) + [y(1, 1, 0), y(0, 2, 0)]))
    assert closed
    assert fi_step(load("quadrics_finite_type"))[0]
    assert fi_step(parse_system("field Q\nvars x\nunknowns y\neq y[1] = 0"))[0]


def test_dimension_of_parametric_space():
    sol = solved_form(load("quadrics_finite_type"))
    assert sol.dim_R() == 10 - 3
    assert len(sol.parametric()) == sol.dim_R()
