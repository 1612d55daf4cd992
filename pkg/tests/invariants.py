"""Structural invariants shared by the property suites and the acceptance run.

Each check returns None on success or a short message naming the violation.
"""
from __future__ import annotations

import random

from pdekit.exactalg import QQ_FIELD, ScalarField
from pdekit.errors import OrderCapExceeded, SearchExhausted
from math import comb

from pdekit.ckdata import ck_data
from pdekit.involution import complete_to_involution, hilbert_function, janet_board
from pdekit.jetspace import jet_class, jet_order
from pdekit.inversesys import orthogonal, section_basis, spencer_apply
from pdekit.jetspace import indices_up_to
from pdekit.operators import OperatorMatrix, adjoint, compose
from pdekit.pdesys import System, same_row_space, solved_form
from pdekit.sequences import janet_sequence, spencer_form
from pdekit.symbolcalc import delta_cohomology, delta_map, symbol


def random_system(rng: random.Random, variable_coefficients: bool = False, max_n: int = 3) -> System:
    """n <= max_n, m <= 2, q <= 2, one to three equations with small coefficients."""
    n = rng.randint(1, max_n)
    m = rng.randint(1, 2)
    q = rng.randint(1, 2)
    vars = tuple(f"x{i + 1}" for i in range(n))
    unknowns = tuple(f"y{k + 1}" for k in range(m))
    field = ScalarField(vars) if variable_coefficients else QQ_FIELD
    jets = [(k, mu) for k in range(m) for mu in indices_up_to(n, q)]
    top = [j for j in jets if sum(j[1]) == q]
    rows = []
    for _ in range(rng.randint(1, 3)):
        row = {rng.choice(top): field(rng.choice((1, -1, 2)))}
        for _ in range(rng.randint(0, 2)):
            c = field(rng.choice((1, -1, 2, -3)))
            if variable_coefficients and rng.random() < 0.5:
                c = c * field.gen(rng.choice(vars))
            row[rng.choice(jets)] = c
        rows.append(row)
    return System(vars, unknowns, field, rows)


def try_complete(s: System, cap: int = 5):
    """The completed system or None when it needs more than `cap` orders."""
    try:
        return complete_to_involution(s, max_order=s.q + cap)
    except (OrderCapExceeded, SearchExhausted):
        return None


def _matmul(a, b, field):
    if not a or not b or not b[0]:
        return []
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), field.zero) for j in range(len(b[0]))]
            for i in range(len(a))]


def check_delta_squared(s, levels: int = 2):
    sol = solved_form(s)
    field = sol.field
    for level in range(sol.q, sol.q + levels):
        for deg in range(0, sol.n - 1):
            first = delta_map(sol, deg, level)          # wedge^deg g_{level+1} -> wedge^{deg+1} g_level
            second = delta_map(sol, deg + 1, level - 1)  # wedge^{deg+1} g_level -> wedge^{deg+2} g_{level-1}
            prod = _matmul(second, first, field)
            if any(v for row in prod for v in row):
                return f"delta^2 != 0 at level {level}, degree {deg}"
    return None


def check_sequence_composes(inv):
    rep = janet_sequence(inv)
    for a, b in zip(rep.operators, rep.operators[1:]):
        if not compose(b, a).is_zero():
            return "consecutive operators of the Janet sequence do not compose to zero"
    return None


def check_hilbert(inv, r_max: int = 3):
    for r in range(r_max + 1):
        direct = inv.solved.prolonged(r).dim_R(inv.q + r)
        if hilbert_function(inv, r) != direct:
            return f"Hilbert formula {hilbert_function(inv, r)} != parametric count {direct} at r={r}"
    return None


def check_euler(inv):
    rep = janet_sequence(inv)
    alt = rep.m + sum((-1) ** (i + 1) * d for i, d in enumerate(rep.fiber_dims))
    if alt != inv.characters.alpha[-1]:
        return f"alternating sum {alt} != alpha^n {inv.characters.alpha[-1]}"
    return None


def check_double_adjoint(s):
    op = OperatorMatrix.from_system(s)
    back = adjoint(adjoint(op))
    if not same_row_space(back.to_rows(), op.to_rows()):
        return "ad(ad(D)) is not row equivalent to D"
    return None


def check_spencer_commute(inv, r: int = 2):
    n = inv.n
    for f in section_basis(inv, r):
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                if spencer_apply(spencer_apply(f, i), j) != spencer_apply(spencer_apply(f, j), i):
                    return f"d_{i} d_{j} != d_{j} d_{i}"
    return None


def check_orthogonal(inv, r_max: int = 2):
    for r in range(r_max + 1):
        if not all(orthogonal(f) for f in section_basis(inv, r)):
            return f"a section at truncation q+{r} is not orthogonal to the equations"
    return None


def check_board_structure(inv):
    """Classes of top-order rows form a chain ending at n; characters decrease;
    class-i parametric jets of order q number alpha^i."""
    n, q = inv.n, inv.q
    if q == 0:
        return None
    board = janet_board(inv.solved)
    classes = {r.cls for r in board.rows if r.multiplicative}
    if classes and classes != set(range(min(classes), n + 1)):
        return f"board classes {sorted(classes)} do not end in a chain at {n}"
    alpha = inv.characters.alpha
    if any(a < b for a, b in zip(alpha, alpha[1:])):
        return f"characters {alpha} are not decreasing"
    top_par = [j for j in inv.solved.parametric(q) if jet_order(j) == q]
    for i in range(1, n + 1):
        if sum(1 for j in top_par if jet_class(j) == i) != alpha[i - 1]:
            return f"class-{i} parametric count differs from alpha^{i}"
    if q == 1 and not inv.solved.lower_rows():
        beta = inv.characters.beta
        if any(a > b for a, b in zip(beta, beta[1:])) or beta[-1] > inv.m:
            return f"first-order beta {beta} out of order"
    return None


def check_symbol_growth(inv, r_max: int = 3):
    alpha = inv.characters.alpha
    for r in range(1, r_max + 1):
        want = sum(comb(r + i - 1, r) * alpha[i - 1] for i in range(1, inv.n + 1))
        if symbol(inv.solved, r).dim != want:
            return f"dim g_(q+{r}) differs from the character formula"
    return None


def check_acyclic(inv):
    for s in range(1, inv.n + 1):
        if delta_cohomology(inv.solved, s, inv.q + 1).H:
            return f"involutive symbol has H^{s} != 0"
    return None


def check_spencer_characters(inv):
    if inv.q < 2:
        return None
    alpha = inv.characters.alpha
    same = spencer_form(inv, lift=0).characters().alpha
    if list(same) != list(alpha):
        return f"Spencer form characters {same} differ from {alpha} without lift"
    lifted = spencer_form(inv, lift=1).characters().alpha
    if list(lifted) != [sum(alpha[i:]) for i in range(inv.n)]:
        return f"lifted Spencer form characters {lifted} are not tail sums of {alpha}"
    return None


def check_ck_counts(inv, r_max: int = 3):
    data = ck_data(inv)
    for r in range(r_max + 1):
        if data.truncated_dim(r) != hilbert_function(inv, r):
            return f"CK data count differs from the Hilbert function at r={r}"
    return None


def check_section_count(inv, r_max: int = 2):
    for r in range(r_max + 1):
        if len(section_basis(inv, r)) != hilbert_function(inv, r):
            return f"section basis size differs from the Hilbert function at r={r}"
    return None


def all_checks(s: System, cap: int = 5) -> list[str]:
    """Every invariant on one system; completed-system checks are skipped when
    the completion needs too many prolongations."""
    out = [check_delta_squared(s), check_double_adjoint(s)]
    inv = try_complete(s, cap)
    if inv is not None:
        out += [check_sequence_composes(inv), check_hilbert(inv), check_euler(inv),
                check_spencer_commute(inv), check_orthogonal(inv), check_board_structure(inv),
                check_symbol_growth(inv), check_acyclic(inv), check_spencer_characters(inv),
                check_ck_counts(inv), check_section_count(inv)]
    return [m for m in out if m]
