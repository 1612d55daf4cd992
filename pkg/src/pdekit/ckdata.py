"""Cartan-Kaehler initial data read off Janet boards."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import comb

from .errors import NotFirstOrder, NotInvolutive
from .involution import InvolutiveSystem, characters, involution_test, janet_board
from .jetspace import jet_class, jet_order
from .pdesys import SolvedSystem, solved_form
from .sequences import SpencerFormSystem


@dataclass
class CKBlock:
    var_count: int            # functions of x^1..x^i
    count: int
    unknown: int | None = None   # 0-based unknown for first-order data
    jets: list = dc_field(default_factory=list)

    def render(self, n: int, name: str = "f", var_names=None) -> str:
        var_names = var_names or tuple(f"x{i + 1}" for i in range(n))
        args = [var_names[i] if i < self.var_count else "0" for i in range(n)]
        label = f"{name}{self.unknown + 1}" if self.unknown is not None else name
        return f"{label}({','.join(args)})"

    def as_dict(self):
        return {"vars": self.var_count, "count": self.count, "unknown": self.unknown,
                "jets": [list(j[1]) + [j[0]] for j in self.jets]}


@dataclass
class CKData:
    blocks: list
    base_point_dims: int
    n: int
    form: str                 # "first-order" or "theorem"
    q: int = 1

    def render(self, name: str = "f") -> list[str]:
        if self.form == "first-order":
            return [b.render(self.n, name) for b in self.blocks]
        out = [f"{self.base_point_dims} constants"] if self.base_point_dims else []
        for b in self.blocks:
            out.append(f"{b.count} functions of {b.var_count} variables")
        return out

    def series_counts(self) -> dict:
        """Number of series per number of variables."""
        out: dict = {}
        for b in self.blocks:
            out[b.var_count] = out.get(b.var_count, 0) + b.count
        return out

    def truncated_dim(self, r: int) -> int:
        """Dimension of the data truncated at degree r (matches dim R_{q+r})."""
        if self.form == "first-order":
            # one full series per unknown, so every jet up to order q + r counts
            return sum(b.count * comb(self.q + r + b.var_count, b.var_count) for b in self.blocks)
        return self.base_point_dims + sum(b.count * comb(r + b.var_count, b.var_count)
                                          for b in self.blocks)

    def as_dict(self):
        return {"form": self.form, "base_point_dims": self.base_point_dims,
                "blocks": [b.as_dict() for b in self.blocks], "rendered": self.render()}


def _solved(x) -> SolvedSystem:
    if isinstance(x, InvolutiveSystem):
        return x.solved
    if isinstance(x, SpencerFormSystem):
        return x.solved()
    return x if isinstance(x, SolvedSystem) else solved_form(x)


def ck_data_theorem(inv) -> CKData:
    sol = _solved(inv)
    if not involution_test(sol, check_fi=False)[0]:
        raise NotInvolutive("CK data need an involutive system")
    alpha = characters(janet_board(sol)).alpha
    q = sol.q
    par_top = [j for j in sol.parametric(q) if jet_order(j) == q]
    blocks = []
    for i in range(sol.n, 0, -1):
        if alpha[i - 1]:
            jets = [j for j in par_top if jet_class(j) == i]
            blocks.append(CKBlock(i, alpha[i - 1], None, jets))
    base = sol.dim_R(q - 1) if q >= 1 else 0
    return CKData(blocks, base, sol.n, "theorem", q)


def ck_data_first_order(sf) -> CKData:
    """One block per unknown: constants, then functions of x^1..x^i, then of all."""
    sol = _solved(sf)
    if sol.q != 1 or sol.lower_rows():
        raise NotFirstOrder("first-order data need a first-order system without zero-order rows")
    if not involution_test(sol, check_fi=False)[0]:
        raise NotInvolutive("CK data need an involutive system")
    n = sol.n
    P = [set() for _ in range(n + 1)]
    for p, _ in sol.top_rows():
        P[jet_class(p)].add(p[0])
    acc = [set() for _ in range(n + 1)]
    for i in range(1, n + 1):
        acc[i] = acc[i - 1] | P[i]
    blocks = []
    for k in range(sol.m):
        if k in acc[1]:
            v = 0
        else:
            v = next((i - 1 for i in range(2, n + 1) if k in acc[i]), n)
        blocks.append(CKBlock(v, 1, k))
    blocks.sort(key=lambda b: (b.var_count, b.unknown))
    return CKData(blocks, 0, n, "first-order", 1)


def ck_data(inv) -> CKData:
    """First-order corollary form when applicable, else the theorem form."""
    sol = _solved(inv)
    if sol.q == 1 and not sol.lower_rows():
        return ck_data_first_order(sol)
    return ck_data_theorem(sol)
