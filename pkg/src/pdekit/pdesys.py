"""Linear PDE systems: prolongation, projection, solved forms.

A row (equation) is a dict mapping jets ``(k, mu)`` to nonzero scalars and
stands for ``sum c * y^k_mu = 0``.  Systems are homogeneous.  The solved form
of a system of order q works with its closure: every row of order t < q is
prolonged up to order q, so the echelon form spans the whole of R_q and the
principal/parametric split covers all jets of order <= q.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence

from .exactalg import Echelon, Row, ScalarField, row_add, inverse
from .jetspace import (
    Jet, add_unit, class_of, indices_of_order, jet_key, jets_up_to, jet_order,
    mi_binomial, mi_sub, sub_indices, count_jets,
)


def row_order(row: Row) -> int:
    return max((sum(mu) for _, mu in row), default=-1)


def row_leading(row: Row) -> Jet:
    return max(row, key=jet_key)


@dataclass(eq=False)
class System:
    """A homogeneous linear system over ``field`` in unknowns y^1..y^m of x^1..x^n."""

    vars: tuple[str, ...]
    unknowns: tuple[str, ...]
    field: ScalarField
    rows: tuple[Row, ...]
    declared_order: int | None = None

    def __post_init__(self):
        self.vars = tuple(self.vars)
        self.unknowns = tuple(self.unknowns)
        self.rows = tuple(r for r in ({j: c for j, c in r.items() if c} for r in self.rows) if r)

    @property
    def n(self) -> int:
        return len(self.vars)

    @property
    def m(self) -> int:
        return len(self.unknowns)

    @property
    def q(self) -> int:
        top = max((row_order(r) for r in self.rows), default=0)
        if self.declared_order is not None:
            return max(top, self.declared_order)
        return top

    def with_rows(self, rows: Iterable[Row], declared_order: int | None = None) -> "System":
        return System(self.vars, self.unknowns, self.field, tuple(rows), declared_order)

    def is_constant_coefficient(self) -> bool:
        return all(not self.field.depends_on(c, self.vars) for r in self.rows for c in r.values())


def derive_row(row: Row, i: int, vars: Sequence[str], field: ScalarField) -> Row:
    """Formal derivative d_i (1-based) of a row."""
    out: Row = {}
    name = vars[i - 1]
    for (k, mu), c in row.items():
        jet = (k, add_unit(mu, i))
        v = out.get(jet)
        out[jet] = c if v is None else v + c
        dc = field.diff(c, name)
        if dc:
            v = out.get((k, mu))
            out[(k, mu)] = dc if v is None else v + dc
    return {j: c for j, c in out.items() if c}


def derive_row_multi(row: Row, nu: Sequence[int], vars, field) -> Row:
    for i, e in enumerate(nu):
        for _ in range(e):
            row = derive_row(row, i + 1, vars, field)
    return row


def prolong_rows(rows: Iterable[Row], r: int, vars, field, max_order: int | None = None) -> list[Row]:
    """All d_nu applied to all rows for |nu| <= r (each nu once).

    With ``max_order`` a row of order t is only prolonged up to that order.
    """
    n = len(vars)
    out = []
    for row in rows:
        t = row_order(row)
        depth = r if max_order is None else min(r, max_order - t)
        if depth < 0:
            continue
        layer = [(row, 1)]
        out.append(row)
        for _ in range(depth):
            nxt = []
            for base, first in layer:
                for i in range(first, n + 1):
                    d = derive_row(base, i, vars, field)
                    nxt.append((d, i))
                    if d:
                        out.append(d)
            layer = nxt
    return out


def prolong(s: System, r: int) -> System:
    """The system of order q+r made of all derivatives up to order r of the rows."""
    q = s.q
    return s.with_rows(prolong_rows(s.rows, r, s.vars, s.field), declared_order=q + r)


def closure_rows(s: System, q: int | None = None) -> list[Row]:
    """Rows of s with every row of order t prolonged up to order q."""
    q = s.q if q is None else q
    return prolong_rows(s.rows, q, s.vars, s.field, max_order=q)


def echelon(rows: Iterable[Row]) -> Echelon:
    return Echelon(jet_key, rows)


def _closed_echelon(s: System, q: int) -> Echelon:
    """Echelon of all consequences of order <= q.  Elimination can lower the
    order of a row, so rows of order < q are differentiated until stable."""
    ech = echelon(closure_rows(s, q))
    done: set = set()
    while True:
        fresh = []
        for _, row in ech.sorted_rows():
            if row_order(row) >= q:
                continue
            sig = frozenset(row.items())
            if sig in done:
                continue
            done.add(sig)
            fresh.extend(derive_row(row, i, s.vars, s.field) for i in range(1, s.n + 1))
        added = False
        for d in fresh:
            if d and ech.insert(d) is not None:
                added = True
        if not added:
            return ech


class SolvedSystem:
    """Reduced echelon form of the closure of a system of order q."""

    def __init__(self, base: System, q: int | None = None, ech: Echelon | None = None):
        self.base = base
        self.q = base.q if q is None else q
        self.ech = ech if ech is not None else _closed_echelon(base, self.q)
        self._prolongations: dict[int, "SolvedSystem"] = {}

    # basic data ------------------------------------------------------------
    @property
    def n(self) -> int:
        return self.base.n

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def vars(self):
        return self.base.vars

    @property
    def field(self):
        return self.base.field

    def rows(self) -> list[tuple[Jet, Row]]:
        """(pivot, row) pairs in descending pivot order."""
        return self.ech.sorted_rows(descending=True)

    def top_rows(self) -> list[tuple[Jet, Row]]:
        return [(p, r) for p, r in self.rows() if jet_order(p) == self.q]

    def lower_rows(self) -> list[tuple[Jet, Row]]:
        return [(p, r) for p, r in self.rows() if jet_order(p) < self.q]

    @functools.cached_property
    def principal(self) -> frozenset:
        return frozenset(self.ech.rows)

    def parametric(self, upto: int | None = None) -> list[Jet]:
        upto = self.q if upto is None else upto
        if upto > self.q:
            return self.prolonged(upto - self.q).parametric(upto)
        return [j for j in jets_up_to(self.n, self.m, upto) if j not in self.ech.rows]

    def dim_R(self, t: int | None = None) -> int:
        """dim R_t for t <= q (projections), or of the prolongation for t > q."""
        t = self.q if t is None else t
        if t > self.q:
            return self.prolonged(t - self.q).dim_R(t)
        return count_jets(self.n, self.m, t) - sum(1 for p in self.ech.rows if jet_order(p) <= t)

    def as_system(self) -> System:
        return self.base.with_rows([r for _, r in self.rows()], declared_order=self.q)

    def reduce(self, row: Row) -> Row:
        """Normal form of a row of order <= q modulo R_q."""
        return self.ech.reduce(row)

    def contains(self, row: Row) -> bool:
        t = row_order(row)
        if t > self.q:
            return self.prolonged(t - self.q).contains(row)
        return not self.ech.reduce(row)

    def prolonged(self, r: int) -> "SolvedSystem":
        """Solved form of the closed prolongation R_{q+r}."""
        if r == 0:
            return self
        if r not in self._prolongations:
            prev = self.prolonged(r - 1)
            ech = prev.ech.copy()
            for _, row in prev.top_rows():
                for i in range(1, self.n + 1):
                    ech.insert(derive_row(row, i, self.vars, self.field))
            # lower rows: their derivatives already lie in prev
            self._prolongations[r] = SolvedSystem(self.base, self.q + r, ech)
        return self._prolongations[r]

    def solved_expression(self, jet: Jet) -> Row:
        """For a principal jet p, the row p - (combination of parametric jets)."""
        return self.ech.rows[jet]

    def key(self):
        """Canonical description used in equality tests."""
        return {p: dict(r) for p, r in self.ech.rows.items()}


def solved_form(s: System, q: int | None = None) -> SolvedSystem:
    return SolvedSystem(s, q)


def project(s: System, q_target: int) -> System:
    """Equations of order <= q_target implied by the rows of s (no prolongation)."""
    ech = echelon(s.rows)
    rows = [r for p, r in ech.sorted_rows() if jet_order(p) <= q_target]
    return s.with_rows(rows, declared_order=q_target)


def fi_step(s: System) -> tuple[bool, System]:
    """Prolong once, project back to order q, return the new independent rows."""
    sol = s if isinstance(s, SolvedSystem) else solved_form(s)
    q = sol.q
    nxt = sol.prolonged(1)
    new_rows = []
    ech = sol.ech.copy()
    for p, row in nxt.rows():
        if jet_order(p) <= q and ech.insert(row) is not None:
            new_rows.append(row)
    base = sol.base
    return (not new_rows), base.with_rows(new_rows, declared_order=q)


def same_row_space(a: Iterable[Row], b: Iterable[Row]) -> bool:
    ea, eb = echelon(a), echelon(b)
    if ea.rank != eb.rank:
        return False
    return all(eb.contains(r) for r in ea.rows.values())


# ---------------------------------------------------------------------------
# linear changes of independent variables and zero-order changes of unknowns

def _expand_index(mu, A, field) -> dict:
    """Coefficients of prod_i (sum_j A[i][j] d_j)^{mu_i} as index -> scalar."""
    n = len(mu)
    poly = {(0,) * n: field.one}
    for i, e in enumerate(mu):
        lin = {tuple(1 if t == j else 0 for t in range(n)): field(A[i][j]) for j in range(n) if A[i][j]}
        for _ in range(e):
            new: dict = {}
            for a, ca in poly.items():
                for b, cb in lin.items():
                    key = tuple(x + y for x, y in zip(a, b))
                    v = new.get(key, field.zero) + ca * cb
                    if v:
                        new[key] = v
                    else:
                        new.pop(key, None)
            poly = new
    return poly


def change_row(row: Row, A, vars, field, cache=None) -> Row:
    """Rewrite a row after d_i -> sum_j A[i][j] d_j, x -> A^{-T} x."""
    n = len(vars)
    cache = {} if cache is None else cache
    if "inv" not in cache:
        inv = inverse([[field(v) for v in r] for r in A], field)
        # x_i = sum_j Ainv[j][i] * xbar_j
        cache["inv"] = {vars[i]: {vars[j]: inv[j][i] for j in range(n) if inv[j][i]} for i in range(n)}
    images = cache["inv"]
    out: Row = {}
    for (k, mu), c in row.items():
        if mu not in cache:
            cache[mu] = _expand_index(mu, A, field)
        c2 = field.substitute(c, images)
        for nu, e in cache[mu].items():
            jet = (k, nu)
            v = out.get(jet, field.zero) + c2 * e
            if v:
                out[jet] = v
            else:
                out.pop(jet, None)
    return out


def apply_change(s: System, A) -> System:
    """The system in the coordinates given by d_i -> sum_j A[i][j] d_j."""
    cache: dict = {}
    return s.with_rows([change_row(r, A, s.vars, s.field, cache) for r in s.rows], s.declared_order)


def change_unknowns(s: System, S) -> System:
    """Substitute y^k = sum_l S[k][l] ybar^l (S invertible, entries in the field)."""
    field = s.field
    n = s.n
    out_rows = []
    for row in s.rows:
        out: Row = {}
        for (k, mu), c in row.items():
            for l in range(s.m):
                coeff = field(S[k][l]) if not hasattr(S[k][l], "numer") else S[k][l]
                if not coeff:
                    continue
                for lam in sub_indices(mu):
                    d = coeff
                    for i, e in enumerate(lam):
                        for _ in range(e):
                            d = field.diff(d, s.vars[i])
                    if not d:
                        continue
                    jet = (l, mi_sub(mu, lam))
                    row_add(out, {jet: d}, c * mi_binomial(mu, lam))
        out_rows.append(out)
    return s.with_rows(out_rows, s.declared_order)
