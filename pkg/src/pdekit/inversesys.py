"""The inverse system: truncated sections, the Spencer operator on them,
modular equations, generating bases and finite-type subsystem lattices."""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field as dc_field

from .errors import CertificateFailed, DimensionMismatch, IndexOutOfRange, TruncationExhausted
from .exactalg import Echelon, solve_nullspace
from .involution import InvolutiveSystem
from .jetspace import add_unit, index_digits, jet_key, jet_order, jets_up_to
from .pdesys import SolvedSystem, System, prolong_rows, solved_form
from .report import _balanced


def _solved(x) -> SolvedSystem:
    if isinstance(x, InvolutiveSystem):
        return x.solved
    return x if isinstance(x, SolvedSystem) else solved_form(x)


@dataclass(eq=False)
class Section:
    """Values on every jet of order <= N (zeros omitted)."""

    sol: SolvedSystem
    N: int
    values: dict

    @property
    def field(self):
        return self.sol.field

    def get(self, jet):
        return self.values.get(jet, self.field.zero)

    def vector(self, jets) -> list:
        return [self.get(j) for j in jets]

    def restrict(self, T: int) -> "Section":
        return Section(self.sol, T, {j: v for j, v in self.values.items() if jet_order(j) <= T})

    def __add__(self, other: "Section") -> "Section":
        N = min(self.N, other.N)
        out = dict(self.restrict(N).values)
        for j, v in other.restrict(N).values.items():
            w = out.get(j, self.field.zero) + v
            if w:
                out[j] = w
            else:
                out.pop(j, None)
        return Section(self.sol, N, out)

    def scale(self, c) -> "Section":
        c = self.field(c)
        if not c:
            return Section(self.sol, self.N, {})
        return Section(self.sol, self.N, {j: v * c for j, v in self.values.items()})

    def __sub__(self, other: "Section") -> "Section":
        return self + other.scale(-self.field.one)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Section):
            return NotImplemented
        N = min(self.N, other.N)
        return self.restrict(N).values == other.restrict(N).values

    def is_zero(self) -> bool:
        return not self.values


def section_from_parametric(sol, N: int, par_values: dict) -> Section:
    """Section with the given parametric values (others zero) at truncation N."""
    sol = _solved(sol)
    field = sol.field
    top = sol.prolonged(max(N - sol.q, 0)) if N >= sol.q else sol
    vals = {j: field(v) for j, v in par_values.items() if v and jet_order(j) <= N}
    for p, row in top.ech.rows.items():
        if jet_order(p) > N:
            continue
        if p in vals:
            raise ValueError(f"jet {p} is principal")
        acc = field.zero
        for j, c in row.items():
            if j != p:
                x = vals.get(j)
                if x:
                    acc -= c * x
        if acc:
            vals[p] = acc
    return Section(sol, N, vals)


def parametric_jets(sol, N: int) -> list:
    sol = _solved(sol)
    if N >= sol.q:
        return sol.prolonged(N - sol.q).parametric(N)
    return sol.parametric(N)


def section_basis(inv, r: int) -> list[Section]:
    """Indicator sections of the parametric jets of order <= q + r."""
    sol = _solved(inv)
    N = sol.q + r
    field = sol.field
    return [section_from_parametric(sol, N, {p: field.one}) for p in parametric_jets(sol, N)]


def _var_index(sol: SolvedSystem, i) -> int:
    if isinstance(i, str):
        if i not in sol.vars:
            raise IndexOutOfRange(f"unknown variable {i}")
        return sol.vars.index(i) + 1
    if not 1 <= i <= sol.n:
        raise IndexOutOfRange(f"variable index {i} outside 1..{sol.n}")
    return i


def spencer_apply(f: Section, i) -> Section:
    """(d_i f)_mu = d/dx^i f_mu - f_{mu + 1_i} at truncation N - 1."""
    if f.N < 1:
        raise TruncationExhausted("cannot apply the Spencer operator at truncation 0")
    sol = f.sol
    i = _var_index(sol, i)
    name = sol.vars[i - 1]
    field = f.field
    out = {}
    for jet in jets_up_to(sol.n, sol.m, f.N - 1):
        k, mu = jet
        v = field.diff(f.get(jet), name) - f.get((k, add_unit(mu, i)))
        if v:
            out[jet] = v
    return Section(sol, f.N - 1, out)


def is_formal_solution(f: Section) -> bool:
    return all(spencer_apply(f, i).is_zero() for i in range(1, f.sol.n + 1))


def contraction(row: dict, f: Section):
    acc = f.field.zero
    for j, c in row.items():
        v = f.values.get(j)
        if v:
            acc += c * v
    return acc


def orthogonal(f: Section) -> bool:
    """Every prolonged equation of order <= N contracts to zero with f."""
    sol = f.sol
    rows = prolong_rows(sol.base.rows, f.N, sol.vars, sol.field, max_order=f.N)
    return all(not contraction(r, f) for r in rows)


def modular_render(f: Section, labels=None, symbol: str = "a") -> str:
    """Macaulay's form sum f_mu a^mu = 0, terms in ascending jet order."""
    sol = f.sol
    field = f.field
    labels = labels or tuple(str(i + 1) for i in range(sol.n))
    terms = []
    for jet in sorted(f.values, key=jet_key):
        k, mu = jet
        sym = f"{symbol}^{{{index_digits(mu, labels)}}}"
        if sol.m > 1:
            sym += f"_{k + 1}"
        c = field.fmt(f.values[jet])
        if " " in c and not (c.startswith("(") and c.endswith(")") and _balanced(c[1:-1])):
            neg, term = False, f"({c})*{sym}"
        else:
            neg = c.startswith("-")
            body = c[1:] if neg else c
            term = sym if body == "1" else f"{body}*{sym}"
        terms.append((neg, term))
    if not terms:
        return "0 = 0"
    out = ("-" if terms[0][0] else "") + terms[0][1]
    for neg, t in terms[1:]:
        out += (" - " if neg else " + ") + t
    return out + " = 0"


def _split_terms(body: str) -> list[tuple[bool, str]]:
    """Top-level ' + ' / ' - ' separated terms with their signs."""
    out, depth, start, neg = [], 0, 0, False
    if body.startswith("-"):
        neg, start = True, 1
    i = start
    while i < len(body):
        ch = body[i]
        depth += (ch == "(") - (ch == ")")
        if depth == 0 and body[i:i + 3] in (" + ", " - "):
            out.append((neg, body[start:i]))
            neg, start = body[i + 1] == "-", i + 3
            i += 3
            continue
        i += 1
    out.append((neg, body[start:]))
    return out


def parse_modular(text: str, inv, N: int, symbol: str = "a") -> Section:
    """Inverse of ``modular_render`` with the default digit labels (n <= 9)."""
    sol = _solved(inv)
    field = sol.field
    body = text.strip()
    if not body.endswith("= 0"):
        raise ValueError(f"not a modular equation: {text!r}")
    body = body[:-3].strip()
    values: dict = {}
    if body == "0":
        return Section(sol, N, values)
    term_re = re.compile(r"^(?:(.+)\*)?" + re.escape(symbol) + r"\^\{([0-9]+)\}(?:_([0-9]+))?$")
    for neg, term in _split_terms(body):
        m = term_re.match(term.strip())
        if m is None:
            raise ValueError(f"cannot read term {term!r}")
        coef, digits, k = m.groups()
        c = field.parse(coef) if coef else field.one
        mu = [0] * sol.n
        if digits != "0":
            for d in digits:
                mu[int(d) - 1] += 1
        jet = ((int(k) - 1) if k else 0, tuple(mu))
        values[jet] = -c if neg else c
    return Section(sol, N, values)


# ---------------------------------------------------------------------------
# generating bases

@dataclass
class GeneratingBasis:
    generators: list
    certificate: list          # dicts: truncation, rank, dim, depth
    r_max: int

    def as_dict(self, labels=None):
        return {"generators": [modular_render(g, labels) for g in self.generators],
                "certificate": self.certificate, "r_max": self.r_max}


def _shifts(g: Section, depth: int) -> list[Section]:
    """All d_nu g with |nu| <= depth (nu as sorted index tuples)."""
    n = g.sol.n
    out = [g]
    layer = [(g, 1)]
    for _ in range(depth):
        nxt = []
        for s, first in layer:
            for i in range(first, n + 1):
                t = spencer_apply(s, i)
                nxt.append((t, i))
                out.append(t)
        layer = nxt
    return out


def span_rank(sections: list[Section], jets: list) -> int:
    ech = Echelon(lambda c: -c)
    for s in sections:
        row = {idx: v for idx, v in enumerate(s.vector(jets)) if v}
        if row:
            ech.insert(row)
    return ech.rank


def _certify(gens_par: list[dict], sol: SolvedSystem, r_max: int, depth_cap: int):
    """Certificate rows or (None, deficit, truncation)."""
    cert = []
    q = sol.q
    for T in range(q, q + r_max + 1):
        jets = parametric_jets(sol, T)
        need = len(jets)
        best = -1
        for depth in range(0, depth_cap + 1):
            secs = []
            for pv in gens_par:
                g = section_from_parametric(sol, T + depth, pv)
                secs.extend(s.restrict(T) for s in _shifts(g, depth))
            best = span_rank(secs, jets)
            if best == need:
                cert.append({"truncation": T, "rank": best, "dim": need, "depth": depth})
                break
        else:
            return None, need - best, T
    return cert, 0, None


def generating_sections(inv, r_max: int = 3, candidates=None, depth_cap: int = 4,
                        minimize: bool = True) -> GeneratingBasis:
    """Greedy small generating family of sections, certified up to q + r_max.

    Candidates are dicts of parametric values; default: the indicators of the
    parametric jets of order <= q."""
    sol = _solved(inv)
    field = sol.field
    if candidates is None:
        candidates = [{p: field.one} for p in parametric_jets(sol, sol.q)]
    else:
        candidates = [c.values if isinstance(c, Section) else c for c in candidates]
        candidates = [{j: v for j, v in c.items() if j not in _principal_set(sol, c)} for c in candidates]
    cert, deficit, T = _certify(candidates, sol, r_max, depth_cap)
    if cert is None:
        raise CertificateFailed(f"span deficit {deficit} at truncation {T}", deficit, T)
    cur = list(candidates)
    if minimize:
        order = sorted(range(len(cur)), key=lambda i: max(jet_key(j) for j in cur[i]), reverse=True)
        for i in order:
            trial = [c for k, c in enumerate(cur) if k != i and c is not None]
            if not trial:
                continue
            c2, _, _ = _certify(trial, sol, r_max, depth_cap)
            if c2 is not None:
                cur[i] = None
                cert = c2
        cur = [c for c in cur if c is not None]
        changed = True
        while changed and len(cur) > 1:
            changed = False
            for a, b in itertools.combinations(range(len(cur)), 2):
                for t in (1, -1, 2, -2):
                    merged = dict(cur[a])
                    for j, v in cur[b].items():
                        w = merged.get(j, field.zero) + v * t
                        if w:
                            merged[j] = w
                        else:
                            merged.pop(j, None)
                    if not merged:
                        continue
                    trial = [c for k, c in enumerate(cur) if k not in (a, b)] + [merged]
                    c2, _, _ = _certify(trial, sol, r_max, depth_cap)
                    if c2 is not None:
                        cur, cert, changed = trial, c2, True
                        break
                if changed:
                    break
    N = sol.q + r_max
    gens = [section_from_parametric(sol, N, c) for c in cur]
    return GeneratingBasis(gens, cert, r_max)


def _principal_set(sol, values) -> set:
    top = max((jet_order(j) for j in values), default=0)
    s = sol.prolonged(max(top - sol.q, 0)) if top >= sol.q else sol
    return set(s.ech.rows)


def certify_generators(inv, generators: list, r_max: int = 3, depth_cap: int = 4) -> list:
    """Certificate for a given family; raises CertificateFailed on a deficit."""
    sol = _solved(inv)
    pars = []
    for g in generators:
        vals = g.values if isinstance(g, Section) else g
        principal = _principal_set(sol, vals)
        pars.append({j: v for j, v in vals.items() if j not in principal})
    cert, deficit, T = _certify(pars, sol, r_max, depth_cap)
    if cert is None:
        raise CertificateFailed(f"span deficit {deficit} at truncation {T}", deficit, T)
    return cert


# ---------------------------------------------------------------------------
# finite-type subsystems

@dataclass
class Subspace:
    """A subspace of the section space of a finite-type system R,
    in coordinates given by the parametric jets of R."""

    base: SolvedSystem
    jets: list
    basis: list               # vectors over `jets`
    truncation: int

    @property
    def dim(self) -> int:
        return len(self.basis)

    def annihilator(self) -> list[dict]:
        """Equations (on the parametric jets) vanishing on the subspace."""
        field = self.base.field
        if not self.basis:
            return [{j: field.one} for j in self.jets]
        null = solve_nullspace(self.basis, len(self.jets), field)
        return [{self.jets[i]: c for i, c in enumerate(v) if c} for v in null]

    def as_system(self) -> System:
        rows = [r for _, r in self.base.rows()] + self.annihilator()
        return self.base.base.with_rows(rows)


def _finite_truncation(sol: SolvedSystem, cap: int = 12) -> int:
    prev = None
    for N in range(sol.q, sol.q + cap):
        d = sol.dim_R(N)
        if d == prev and all(jet_order(j) < N for j in parametric_jets(sol, N)):
            return N
        prev = d
    raise DimensionMismatch("system is not of finite type within the truncation cap")


def subspace_of(base, sub) -> Subspace:
    """Sections of the subsystem `sub` as a subspace of the sections of `base`."""
    b = _solved(base)
    s = _solved(sub)
    if b.n != s.n or b.m != s.m or b.field != s.field:
        raise DimensionMismatch("subsystem lives in a different jet space")
    N = max(_finite_truncation(b), _finite_truncation(s))
    jets = parametric_jets(b, N)
    vecs = []
    for f in section_basis(s, N - s.q):
        rows = prolong_rows(b.base.rows, N, b.vars, b.field, max_order=N)
        if any(contraction(r, f) for r in rows):
            raise DimensionMismatch("subsystem is not contained in the base system")
        vecs.append(f.vector(jets))
    ech = Echelon(lambda c: -c)
    basis = []
    for v in vecs:
        if ech.insert({i: x for i, x in enumerate(v) if x}) is not None:
            basis.append(v)
    return Subspace(b, jets, basis, N)


def _check(a: Subspace, b: Subspace):
    if a.jets != b.jets or a.base.base is not b.base.base and a.jets != b.jets:
        raise DimensionMismatch("subspaces of different systems")


def subsystem_sum(a: Subspace, b: Subspace) -> Subspace:
    _check(a, b)
    ech = Echelon(lambda c: -c)
    basis = []
    for v in a.basis + b.basis:
        if ech.insert({i: x for i, x in enumerate(v) if x}) is not None:
            basis.append(v)
    return Subspace(a.base, a.jets, basis, a.truncation)


def subsystem_intersect(a: Subspace, b: Subspace) -> Subspace:
    _check(a, b)
    field = a.base.field
    if not a.basis or not b.basis:
        return Subspace(a.base, a.jets, [], a.truncation)
    # x A = y B  <=>  (x, -y) [A; B] = 0
    rows = a.basis + [[-x for x in v] for v in b.basis]
    # nullspace of the transpose
    mat = [[rows[r][c] for r in range(len(rows))] for c in range(len(a.jets))]
    null = solve_nullspace(mat, len(rows), field)
    vecs = []
    for coeffs in null:
        v = [field.zero] * len(a.jets)
        for r, c in enumerate(coeffs[:len(a.basis)]):
            if c:
                v = [x + c * y for x, y in zip(v, a.basis[r])]
        vecs.append(v)
    ech = Echelon(lambda c: -c)
    basis = []
    for v in vecs:
        if ech.insert({i: x for i, x in enumerate(v) if x}) is not None:
            basis.append(v)
    return Subspace(a.base, a.jets, basis, a.truncation)
