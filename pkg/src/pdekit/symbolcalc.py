"""Symbols, the delta map and delta cohomology.

The symbol g_l at a level l >= q is described by its parametric jets of order
l: a symbol vector is determined by its values there, the principal values
following from the top parts of the solved rows.  Below q the symbol is the
full space S_l T* (x) E.  Forms in wedge^s T* are indexed by sorted tuples of
1-based variable indices in lexicographic order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .exactalg import rank as mat_rank
from .jetspace import Jet, add_unit, count_symbol, jet_order, jets_of_order
from .pdesys import SolvedSystem, System, solved_form


@dataclass
class SymbolSpace:
    level: int
    jets: list            # all jets of order `level`, ascending
    parametric: list      # basis coordinates
    relations: dict       # principal jet -> {parametric jet: coefficient}
    field: object

    @property
    def dim(self) -> int:
        return len(self.parametric)

    def basis(self) -> list[dict]:
        """One vector per parametric jet, as jet -> value over all order-l jets."""
        return [self.extend({p: self.field.one}) for p in self.parametric]

    def extend(self, values: dict) -> dict:
        out = {j: v for j, v in values.items() if v}
        for pri, rel in self.relations.items():
            v = self.field.zero
            for j, c in rel.items():
                x = values.get(j)
                if x:
                    v += c * x
            if v:
                out[pri] = v
        return out


def _as_solved(s) -> SolvedSystem:
    return s if isinstance(s, SolvedSystem) else solved_form(s)


def symbol_at(s, level: int) -> SymbolSpace:
    sol = _as_solved(s)
    field = sol.field
    jets = jets_of_order(sol.n, sol.m, level)
    if level < sol.q:
        return SymbolSpace(level, jets, list(jets), {}, field)
    pro = sol.prolonged(level - sol.q)
    relations = {}
    for p, row in pro.top_rows():
        relations[p] = {j: -c for j, c in row.items() if j != p and jet_order(j) == level}
    par = [j for j in jets if j not in relations]
    return SymbolSpace(level, jets, par, relations, field)


def symbol(s, r: int) -> SymbolSpace:
    """The symbol g_{q+r}."""
    sol = _as_solved(s)
    return symbol_at(sol, sol.q + r)


def forms(n: int, s: int) -> list[tuple]:
    return list(itertools.combinations(range(1, n + 1), s))


def delta_map(s, form_degree: int, level: int):
    """Matrix of delta: wedge^s (x) g_{level+1} -> wedge^{s+1} (x) g_level.

    Columns are (I, parametric jet of g_{level+1}), rows (J, parametric jet of
    g_level), both ordered form-major.
    """
    sol = _as_solved(s)
    n = sol.n
    field = sol.field
    src = symbol_at(sol, level + 1)
    dst = symbol_at(sol, level)
    src_forms = forms(n, form_degree)
    dst_forms = forms(n, form_degree + 1)
    row_index = {}
    for J in dst_forms:
        for p in dst.parametric:
            row_index[(J, p)] = len(row_index)
    dst_par = set(dst.parametric)
    cols = []
    for I in src_forms:
        for vec in src.basis():
            col = {}
            for i in range(1, n + 1):
                if i in I:
                    continue
                J = tuple(sorted(I + (i,)))
                sign = -1 if J.index(i) % 2 else 1
                # (w)_mu = v_{mu + 1_i}
                for (k, mu) in dst.parametric:
                    v = vec.get((k, add_unit(mu, i)))
                    if v:
                        key = row_index[(J, (k, mu))]
                        col[key] = col.get(key, field.zero) + (v if sign > 0 else -v)
            cols.append(col)
    nrows = len(row_index)
    return [[cols[c].get(r, field.zero) for c in range(len(cols))] for r in range(nrows)]


@dataclass
class DeltaComplexReport:
    level: int
    s: int
    Z: int
    B: int
    H: int
    dim: int = 0          # dim of wedge^s (x) g_level
    rank_out: int = 0     # rank of delta leaving it

    def as_dict(self):
        return {"level": self.level, "s": self.s, "dim": self.dim, "rank_out": self.rank_out,
                "Z": self.Z, "B": self.B, "H": self.H}


def _rank(m, field) -> int:
    if not m or not m[0]:
        return 0
    return mat_rank(m)


def delta_cohomology(s, form_degree: int, level: int) -> DeltaComplexReport:
    """Cohomology at wedge^s (x) g_level of
    wedge^{s-1} g_{level+1} -> wedge^s g_level -> wedge^{s+1} g_{level-1}."""
    sol = _as_solved(s)
    n = sol.n
    field = sol.field
    g = symbol_at(sol, level)
    size = len(forms(n, form_degree)) * g.dim
    if form_degree < n and level >= 1:
        out = delta_map(sol, form_degree, level - 1)
        rank_out = _rank(out, field)
    else:
        rank_out = 0
    Z = size - rank_out
    if form_degree >= 1:
        inc = delta_map(sol, form_degree - 1, level)
        B = _rank(inc, field)
    else:
        B = 0
    return DeltaComplexReport(level, form_degree, Z, B, Z - B, size, rank_out)


def finite_type(s, r_cap: int) -> tuple[bool, int | None]:
    """First r <= r_cap with g_{q+r} = 0."""
    sol = _as_solved(s)
    for r in range(r_cap + 1):
        if symbol(sol, r).dim == 0:
            return True, r
    return False, None


def empty_symbol_dim(n: int, m: int, level: int) -> int:
    return count_symbol(n, m, level)
