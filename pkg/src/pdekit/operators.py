"""Matrices of linear differential operators over the coefficient field.

An entry is a dict mapping multi-indices to scalars, meaning sum a^mu d_mu
with coefficients on the left.  Row r of an operator acting on y^1..y^m is
the equation sum_k P_rk y^k, which is how systems convert to operators.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .exactalg import ScalarField
from .jetspace import mi_add, mi_binomial, mi_sub, sub_indices, zero_index
from .pdesys import System, row_order

Entry = dict


def _add_into(out: Entry, mu, c) -> None:
    v = out.get(mu)
    v = c if v is None else v + c
    if v:
        out[mu] = v
    else:
        out.pop(mu, None)


def _diff_multi(field: ScalarField, a, lam, vars) -> object:
    for i, e in enumerate(lam):
        for _ in range(e):
            if not a:
                return a
            a = field.diff(a, vars[i])
    return a


@dataclass(eq=False)
class OperatorMatrix:
    entries: list          # rows of Entry
    ncols: int
    vars: tuple
    field: ScalarField

    @property
    def nrows(self) -> int:
        return len(self.entries)

    @classmethod
    def from_system(cls, s: System, rows=None) -> "OperatorMatrix":
        rows = s.rows if rows is None else rows
        ent = []
        for row in rows:
            r = [dict() for _ in range(s.m)]
            for (k, mu), c in row.items():
                r[k][mu] = c
            ent.append(r)
        return cls(ent, s.m, s.vars, s.field)

    def to_rows(self) -> list[dict]:
        """Rows as jet dicts in unknowns 0..ncols-1."""
        return [{(k, mu): c for k, e in enumerate(r) for mu, c in e.items()} for r in self.entries]

    def to_system(self, unknowns: Sequence[str] | None = None) -> System:
        names = tuple(unknowns) if unknowns else tuple(f"u{k + 1}" for k in range(self.ncols))
        return System(self.vars, names, self.field, self.to_rows())

    def is_zero(self) -> bool:
        return all(not e for r in self.entries for e in r)

    def order(self) -> int:
        return max((sum(mu) for r in self.entries for e in r for mu in e), default=-1)


def compose_entries(p: Entry, q: Entry, vars, field) -> Entry:
    """(a d_mu) o (b d_nu) = a sum_lambda C(mu,lambda) d_lambda(b) d_{mu-lambda+nu}."""
    out: Entry = {}
    for mu, a in p.items():
        for nu, b in q.items():
            for lam in sub_indices(mu):
                db = _diff_multi(field, b, lam, vars)
                if not db:
                    continue
                _add_into(out, mi_add(mi_sub(mu, lam), nu), a * db * mi_binomial(mu, lam))
    return out


def compose(p: OperatorMatrix, q: OperatorMatrix) -> OperatorMatrix:
    """The product P o Q (P acts after Q)."""
    if p.ncols != q.nrows:
        raise ValueError("operator shapes do not compose")
    field = p.field
    ent = []
    for prow in p.entries:
        r = []
        for k in range(q.ncols):
            acc: Entry = {}
            for j, pe in enumerate(prow):
                if pe and q.entries[j][k]:
                    for mu, c in compose_entries(pe, q.entries[j][k], p.vars, field).items():
                        _add_into(acc, mu, c)
            r.append(acc)
        ent.append(r)
    return OperatorMatrix(ent, q.ncols, p.vars, field)


def adjoint_entry(e: Entry, vars, field) -> Entry:
    """ad(sum a^mu d_mu) = sum (-1)^|mu| d_mu o a^mu, in normal form."""
    out: Entry = {}
    for mu, a in e.items():
        sign = -1 if sum(mu) % 2 else 1
        for lam in sub_indices(mu):
            da = _diff_multi(field, a, lam, vars)
            if da:
                _add_into(out, mi_sub(mu, lam), da * (sign * mi_binomial(mu, lam)))
    return out


def adjoint(p: OperatorMatrix) -> OperatorMatrix:
    """Transpose of the entrywise formal adjoint."""
    ent = [[adjoint_entry(p.entries[r][k], p.vars, p.field) for r in range(p.nrows)]
           for k in range(p.ncols)]
    return OperatorMatrix(ent, p.nrows, p.vars, p.field)


def identity_operator(n_unknowns: int, vars, field) -> OperatorMatrix:
    z = zero_index(len(vars))
    ent = [[({z: field.one} if i == j else {}) for j in range(n_unknowns)] for i in range(n_unknowns)]
    return OperatorMatrix(ent, n_unknowns, vars, field)
