from __future__ import annotations

import pytest

from pdekit.dsl import parse_element, parse_system
from pdekit.errors import ElementIsZero, NotConstantCoefficients, WrongCodimension
from pdekit.involution import complete_to_involution
from pdekit.modanalysis import (
    adjoint, codimension, element_codimension, purity_report, relative_localization, torsion_submodule,
)
from pdekit.operators import OperatorMatrix, compose
from pdekit.pdesys import apply_change

from conftest import load

CHANGE = ((1, 0, 0, 1), (0, 1, 1, 0), (0, 0, 1, 0), (0, 0, 0, 1))


def test_codimensions_from_characters():
    assert codimension(complete_to_involution(apply_change(load("bilinear_quad"), CHANGE))) == 2
    assert codimension(complete_to_involution(load("quadrics_finite_type"))) == 3
    inv = complete_to_involution(load("macaulay_order5"))
    assert codimension(inv) == 2 and inv.characters.alpha[1] == 9


def test_element_codimensions():
    s = load("purity_gap")
    assert element_codimension(s, parse_element("y[0,0,1]", s)).cd == 3
    assert element_codimension(s, parse_element("y[0,1,0]", s)).cd == 1
    empty = parse_system("field Q\nvars x1 x2\nunknowns y")
    assert element_codimension(empty, parse_element("y[0,0]", empty)).cd == 0


def test_zero_element_rejected():
    s = load("purity_gap")
    with pytest.raises(ElementIsZero):
        element_codimension(s, parse_element("y[0,0,2]", s))


def test_torsion_of_three_unknown_system():
    tr = torsion_submodule(load("first_order_3u_purity_a1"))
    assert not tr.torsion_free
    assert tr.as_dict(("y1", "y2", "y3"), ("x1", "x2"))["generators"] == ["y1[0,0]"]


def test_divergence_is_torsion_free():
    s = parse_system("field Q\nvars x1 x2\nunknowns y1 y2\neq y1[1,0] + y2[0,1] = 0")
    tr = torsion_submodule(s)
    assert tr.torsion_free and tr.generators == []
    # the parametrization found on the way is annihilated by the divergence
    D = OperatorMatrix.from_system(s)
    assert compose(D, tr.parametrization).is_zero()


def test_adjoint_row_count():
    s = load("torsion_3u")
    adj = adjoint(s)
    assert adj.p == len(s.rows) and adj.system.m == adj.p


def test_purity_gap_filtration():
    rep = purity_report(load("purity_gap"))
    assert rep.as_dict(("y",), ("x1", "x2", "x3"))["filtration"] == "0 = t_3 ⊂ t_2 = t_1 ⊂ t_0 = t(M) = M"


def test_pure_and_non_pure_codimension_two():
    pure = purity_report(load("pure_codim2"))
    assert pure.cd == 2 and pure.pure
    other = purity_report(load("nonpure_codim2")).as_dict(("y",), ("x1", "x2", "x3"))
    assert other["cd"] == 2 and not other["pure"] and other["non_pure_witness"] == "y[0,0,1]"


def test_localization_exposes_non_purity():
    loc = relative_localization(load("nonpure_codim2"), 2)
    assert "y[0,1]" in loc.as_dict()["rows"]


def test_localization_dimension_equals_character():
    for name in ("pure_codim2", "two_components", "macaulay_order5"):
        inv = complete_to_involution(load(name))
        r = codimension(inv)
        loc = relative_localization(load(name), r)
        assert loc.as_dict()["dim"] == inv.characters.alpha[inv.n - r - 1], name


def test_localization_preconditions():
    with pytest.raises(NotConstantCoefficients):
        relative_localization(load("airy"), 0)
    with pytest.raises(WrongCodimension):
        relative_localization(load("nonpure_codim2"), 1)
