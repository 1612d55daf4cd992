"""Module-theoretic analysis: adjoints, codimension, torsion, localization, purity."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

from .errors import (
    ElementIsZero, NotConstantCoefficients, OrderCapExceeded, WrongCodimension,
)
from .exactalg import Echelon, ScalarField, solve_nullspace
from .involution import InvolutiveSystem, complete_to_involution
from .jetspace import index_key, jet_class, jet_key, jet_order, zero_index
from .operators import OperatorMatrix, adjoint as op_adjoint
from .pdesys import SolvedSystem, System, derive_row_multi, prolong_rows, row_order, solved_form
from .jetspace import indices_up_to


def _as_system(x) -> System:
    if isinstance(x, InvolutiveSystem):
        return x.system
    if isinstance(x, SolvedSystem):
        return x.as_system()
    return x


def _inv(x, seed: int = 0) -> InvolutiveSystem:
    return x if isinstance(x, InvolutiveSystem) else complete_to_involution(_as_system(x), seed=seed)


# ---------------------------------------------------------------------------
# adjoint

@dataclass
class AdjointSystem:
    operator: OperatorMatrix      # rows = unknowns of the source, cols = lambda
    system: System

    @property
    def p(self) -> int:
        return self.operator.ncols


def adjoint(s, prefix: str = "lambda") -> AdjointSystem:
    """ad of the operator of a system, as a system in lambda^1..lambda^p."""
    s = _as_system(s)
    op = op_adjoint(OperatorMatrix.from_system(s))
    names = tuple(f"{prefix}{i + 1}" for i in range(op.ncols))
    return AdjointSystem(op, op.to_system(names))


# ---------------------------------------------------------------------------
# codimension

def codimension(inv) -> int:
    """n minus the largest i with alpha^i != 0 (n for finite type)."""
    inv = _inv(inv)
    alpha = inv.characters.alpha
    top = max((i + 1 for i, a in enumerate(alpha) if a), default=0)
    if inv.q == 0:
        # zero-order system: the module is a vector space of functions of all x
        free = inv.m - len(inv.solved.rows())
        return 0 if free else inv.n
    return inv.n - top


@dataclass
class ElementCodim:
    cd: int
    system: System | None         # annihilating system of Dz in the unknown u
    truncation: int


def _as_row(z, m: int) -> dict:
    if isinstance(z, tuple) and len(z) == 2 and isinstance(z[1], tuple):
        return {z: 1}
    return dict(z)


def _cyclic_rows(s: System, z: dict, N: int) -> list[dict]:
    """Rows in u alone that follow from s and u = z, eliminating y up to order N."""
    m, n = s.m, s.n
    field = s.field
    zo = row_order(z)
    key = lambda j: (j[0] < m,) + jet_key(j)
    ech = Echelon(key)
    for r in prolong_rows(s.rows, N, s.vars, field, max_order=N):
        ech.insert(r)
    gen = {(m, zero_index(n)): field.one}
    for j, c in z.items():
        gen[j] = gen.get(j, field.zero) - field(c)
    gen = {j: c for j, c in gen.items() if c}
    for nu in indices_up_to(n, N - zo):
        ech.insert(derive_row_multi(gen, nu, s.vars, field))
    out = []
    for p, row in ech.rows.items():
        if p[0] == m:
            out.append({(0, mu): c for (_, mu), c in row.items()})
    return out


def element_codimension(inv, z, cap: int = 4, seed: int = 0) -> ElementCodim:
    """cd(Dz): eliminate y from the system and u - z, complete the u-system.

    The truncation grows until two consecutive orders give the same result."""
    s = _as_system(inv)
    field = s.field
    z = {j: field(c) for j, c in _as_row(z, s.m).items() if c}
    zo = max(row_order(z), 0)
    sol = solved_form(s, max(s.q, zo)) if s.rows else None
    if not z or (sol is not None and not sol.reduce(z)):
        raise ElementIsZero("element vanishes modulo the system")
    prev = None
    for N in range(max(s.q, zo) + 1, max(s.q, zo) + cap + 2):
        rows = _cyclic_rows(s, z, N)
        if not rows:
            res = (0, None, ())
        else:
            us = System(s.vars, ("u",), field, rows)
            ui = complete_to_involution(us, seed=seed)
            hilb = tuple(ui.solved.prolonged(max(0, t - ui.q)).dim_R(t) if t >= ui.q else ui.solved.dim_R(t)
                         for t in range(0, N - zo + 1))
            res = (codimension(ui), us, hilb[:max(s.q, zo) + 1])
        if prev is not None and prev[0] == res[0] and prev[2] == res[2]:
            return ElementCodim(res[0], res[1], N)
        prev = res
    return ElementCodim(prev[0], prev[1], N)


# ---------------------------------------------------------------------------
# syzygies and torsion

def left_syzygies(op: OperatorMatrix, T: int) -> OperatorMatrix:
    """Operators C with C o op = 0, found among prolongations of order <= T.

    Returned as a generating family modulo prolongation within the bound."""
    field = op.field
    vars = op.vars
    n = len(vars)
    rows = op.to_rows()

    def pkey(c):
        if c[0] == "p":
            return (0, index_key(c[2]), c[1])
        return (1,) + jet_key(c)

    ech = Echelon(pkey)
    for tau, row in enumerate(rows):
        t = max(row_order(row), 0)
        for nu in indices_up_to(n, T - t):
            d = dict(derive_row_multi(row, nu, vars, field))
            d[("p", tau, nu)] = field.one
            ech.insert(d)
    syz = [r for p, r in ech.rows.items() if p[0] == "p"]
    syz.sort(key=lambda r: max(index_key(c[2]) for c in r))
    # keep a generating family: drop those spanned by prolongations of kept ones
    kept = []
    span = Echelon(pkey)
    for r in syz:
        if span.contains(r):
            continue
        kept.append(r)
        top = max(sum(c[2]) for c in r)
        for nu in indices_up_to(n, T - top):
            span.insert(_derive_prov(r, nu, op, field))
    ent = []
    for r in kept:
        e = [dict() for _ in range(op.nrows)]
        for (_, tau, nu), c in r.items():
            e[tau][nu] = c
        ent.append(e)
    return OperatorMatrix(ent, op.nrows, vars, field)


def _derive_prov(r: dict, nu, op: OperatorMatrix, field) -> dict:
    """d_nu applied to a provenance row sum c d_lambda (tau), in normal form."""
    from .operators import compose_entries
    out: dict = {}
    d_nu = {nu: field.one}
    groups: dict = {}
    for (_, tau, lam), c in r.items():
        groups.setdefault(tau, {})[lam] = c
    for tau, e in groups.items():
        for mu, c in compose_entries(d_nu, e, op.vars, field).items():
            key = ("p", tau, mu)
            v = out.get(key, field.zero) + c
            if v:
                out[key] = v
            else:
                out.pop(key, None)
    return out


@dataclass
class TorsionResult:
    generators: list              # rows in the unknowns of the system
    torsion_free: bool
    truncation: int
    parametrization: OperatorMatrix | None = None

    def as_dict(self, unknowns=None, vars=None):
        from .report import render_row
        return {"torsion_free": self.torsion_free, "truncation": self.truncation,
                "generators": [render_row(g, unknowns, vars) for g in self.generators]}


def _torsion_at(s: System, T: int):
    D = OperatorMatrix.from_system(s)
    A = op_adjoint(D)
    C = left_syzygies(A, T)
    if C.nrows == 0:
        D0 = None
        Dpp_rows = [{(k, zero_index(s.n)): s.field.one} for k in range(s.m)]
    else:
        D0 = op_adjoint(C)
        Dpp_rows = left_syzygies(D0, T + s.q).to_rows()
    top = max([row_order(r) for r in Dpp_rows] + [s.q])
    # low-order rows of a deeper prolongation catch hidden integrability conditions
    sol = solved_form(s, top).prolonged(T - s.q + 1) if s.rows else None
    resid = Echelon(jet_key)
    gens = []
    for r in sorted(Dpp_rows, key=lambda r: jet_key(max(r, key=jet_key))):
        red = sol.reduce(r) if sol is not None else dict(r)
        if not red:
            continue
        # skip rows generated by earlier torsion elements
        if resid.contains(red):
            continue
        gens.append(red)
        extra = prolong_rows([red], top - row_order(red), s.vars, s.field, max_order=top)
        for e in extra:
            e2 = sol.reduce(e) if sol is not None else e
            if e2:
                resid.insert(e2)
    return gens, D0


def torsion_submodule(inv, cap: int = 3) -> TorsionResult:
    """Double-dual test: D0 with D o D0 = 0 from the syzygies of ad(D),
    D'' = CC(D0); rows of D'' outside the row space of D give t(M)."""
    s = _as_system(inv.original if isinstance(inv, InvolutiveSystem) and inv.original is not None else inv)
    prev = None
    for T in range(s.q + 1, s.q + cap + 2):
        gens, D0 = _torsion_at(s, T)
        if prev is not None and len(gens) == len(prev[0]):
            return TorsionResult(gens, not gens, T, D0)
        prev = (gens, D0)
    if prev is None:
        raise OrderCapExceeded("torsion search did not run")
    return TorsionResult(prev[0], not prev[0], T, prev[1])


# ---------------------------------------------------------------------------
# relative localization

@dataclass
class LocalizedSystem:
    system: System
    inv: InvolutiveSystem | None
    field: ScalarField
    chis: tuple
    dim: int
    parametric: list = dc_field(default_factory=list)

    def as_dict(self):
        from .report import render_row
        rows = [r for _, r in self.inv.solved.rows()] if self.inv else list(self.system.rows)
        return {"field": repr(self.field), "vars": list(self.system.vars), "dim": self.dim,
                "rows": [render_row(r, self.system.unknowns, self.system.vars, self.field) for r in rows],
                "parametric": [render_row({j: self.field.one}, self.system.unknowns, self.system.vars)
                               for j in self.parametric]}


def localize_rows(s: System, r: int, chi_prefix: str = "chi"):
    """d_i -> chi_i for i <= n - r; returns (system over k(chi), chi names)."""
    if s.field.gens:
        raise NotConstantCoefficients("localization needs coefficients in Q")
    n = s.n
    loc = n - r
    chis = tuple(f"{chi_prefix}{i + 1}" for i in range(loc))
    K = ScalarField(chis)
    gens = [K.gen(c) for c in chis]
    rows = []
    for row in s.rows:
        out: dict = {}
        for (k, mu), c in row.items():
            w = K(c)
            for i in range(loc):
                w = w * gens[i] ** mu[i]
            j = (k, mu[loc:])
            v = out.get(j, K.zero) + w
            if v:
                out[j] = v
            else:
                out.pop(j, None)
        if out:
            rows.append(out)
    return System(s.vars[loc:], s.unknowns, K, rows), chis


def relative_localization(inv, r: int | None = None, seed: int = 0) -> LocalizedSystem:
    from .inversesys import _finite_truncation, parametric_jets
    s = _as_system(inv)
    if not s.is_constant_coefficient() or s.field.gens:
        raise NotConstantCoefficients("localization needs coefficients in Q")
    cd = codimension(_inv(inv, seed))
    if r is None:
        r = cd
    if r != cd:
        raise WrongCodimension(f"module has codimension {cd}, not {r}")
    ls, chis = localize_rows(s, r)
    if r == 0:
        sol = solved_form(ls, 0) if ls.rows else None
        dim = ls.m - (sol.ech.rank if sol else 0)
        par = [j for j in ((k, ()) for k in range(ls.m)) if sol is None or j not in sol.ech.rows]
        return LocalizedSystem(ls, None, ls.field, chis, dim, par)
    li = complete_to_involution(ls, seed=seed)
    N = _finite_truncation(li.solved)
    par = parametric_jets(li.solved, N)
    return LocalizedSystem(ls, li, ls.field, chis, len(par), par)


def localization_kernel(inv, r: int, t: int, seed: int = 0) -> list[dict]:
    """Basis over Q of the elements of M_t (parametric jets of order <= t)
    mapping to zero in k(chi') (x) M."""
    s = _as_system(inv)
    sol = solved_form(s, max(s.q, t))
    from .inversesys import parametric_jets
    par = parametric_jets(sol, t)
    loc = relative_localization(s, r, seed)
    K = loc.field
    n = s.n
    k = n - r
    gens = [K.gen(c) for c in loc.chis]
    lsol = loc.inv.solved if loc.inv is not None else (solved_form(loc.system, 0) if loc.system.rows else None)
    images = []
    for (u, mu) in par:
        w = K.one
        for i in range(k):
            w = w * gens[i] ** mu[i]
        row = {(u, mu[k:]): w}
        if lsol is not None:
            top = jet_order((u, mu[k:]))
            tgt = lsol.prolonged(max(0, top - lsol.q)) if top >= lsol.q else lsol
            row = tgt.reduce(row)
        images.append(row)
    # split coefficients over monomials in chi to get a Q-linear system
    keys = sorted({j for im in images for j in im}, key=jet_key)
    den = K.one
    for im in images:
        for c in im.values():
            den = den * K(c.denom)
    ring_rows: dict = {}
    for col, im in enumerate(images):
        for j, c in im.items():
            poly = (c * den)
            num = poly.numer.quo_ground(poly.denom.LC) if poly.denom.is_ground else poly.numer
            for mono, coef in num.terms():
                ring_rows.setdefault((j, mono), {})[col] = coef
    from .exactalg import QQ_FIELD
    mat = [[row.get(c, QQ_FIELD.zero) for c in range(len(par))] for row in ring_rows.values()]
    null = solve_nullspace(mat, len(par), QQ_FIELD) if par else []
    return [{par[i]: c for i, c in enumerate(v) if c} for v in null]


# ---------------------------------------------------------------------------
# purity

@dataclass
class PurityReport:
    cd: int
    pure: bool
    certified: str
    statuses: list                # status of t_s for s = 0..n
    relations: list               # relation between t_{s+1} and t_s, s = 0..n-1
    witnesses: dict
    gaps: list
    filtration: str
    non_pure_witness: dict | None = None

    def as_dict(self, unknowns=None, vars=None):
        from .report import render_row
        return {
            "cd": self.cd, "pure": self.pure, "certified": self.certified,
            "filtration": self.filtration, "gaps": self.gaps,
            "statuses": self.statuses,
            "witnesses": {str(s): [render_row(w, unknowns, vars) for w in ws]
                          for s, ws in self.witnesses.items()},
            "non_pure_witness": render_row(self.non_pure_witness, unknowns, vars)
            if self.non_pure_witness else None,
        }


def _render_filtration(n: int, zero: list, is_M: list, rel: list, M_rel: str) -> str:
    out = f"0 = t_{n}"
    for s in range(n - 1, -1, -1):
        out += f" {rel[s]} t_{s}"
    out += f" = t(M) {M_rel} M"
    return out


def purity_report(inv, probes: Sequence | None = None, seed: int = 0) -> PurityReport:
    s = _as_system(inv)
    I = _inv(inv, seed)
    n = s.n
    cd = codimension(I)
    sol = I.solved if I.change == tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)) \
        else solved_form(s)
    if probes is None:
        from .inversesys import parametric_jets
        probes = [{j: s.field.one} for j in parametric_jets(solved_form(s), s.q)]
    probe_cd = []
    for z in probes:
        try:
            probe_cd.append((dict(_as_row(z, s.m)), element_codimension(s, z, seed=seed).cd))
        except ElementIsZero:
            continue
    # purity at level cd
    witness = None
    if cd >= n:
        pure, cert = True, "finite type: n-pure"
    elif s.is_constant_coefficient() and not s.field.gens:
        ker = []
        for t in range(0, s.q + 1):
            ker = localization_kernel(s, cd, t, seed)
            if ker:
                break
        pure = not ker
        witness = ker[0] if ker else None
        cert = f"localization kernel checked through order {s.q}"
    else:
        from .sequences import spencer_form
        sf = spencer_form(I)
        low = [r for p, r in sf.solved().rows() if (jet_class(p) or 0) <= n - cd]
        tors = torsion_submodule(sf.system.with_rows(low))
        pure = tors.torsion_free
        witness = tors.generators[0] if tors.generators else None
        cert = "Spencer form class test"
    # t_s statuses from characters and probes
    statuses, witnesses = [], {}
    for s_ in range(n + 1):
        ws = [z for z, c in probe_cd if c > s_]
        witnesses[s_] = ws
        if s_ < cd:
            statuses.append("equals-M")
        elif s_ >= n or (pure and s_ >= cd):
            statuses.append("zero")
        elif ws or (s_ == cd and witness is not None):
            if s_ == cd and witness is not None and not ws:
                witnesses[s_] = [witness]
            statuses.append("strictly-between")
        else:
            statuses.append("zero")
    rel = []
    for s_ in range(n):
        a, b = statuses[s_ + 1], statuses[s_]
        if a == b and a in ("zero", "equals-M"):
            rel.append("=")
        elif a != b:
            rel.append("⊂")
        else:
            exact = any(c == s_ + 1 for _, c in probe_cd)
            rel.append("⊂" if exact else "=")
    gaps = [s_ for s_ in range(1, n + 1) if rel[s_ - 1] == "="]
    M_rel = "=" if statuses[0] == "equals-M" else "⊂"
    text = _render_filtration(n, None, None, rel, M_rel)
    return PurityReport(cd, pure, cert, statuses, rel, witnesses, gaps, text, witness)
