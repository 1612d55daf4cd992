"""Compatibility conditions, Janet sequences, Spencer forms.

Compatibility conditions are found by reducing every non-multiplicative
prolongation d_j Phi against the multiplicative ones while carrying along
provenance columns, so the residue is directly the operator identity
d_j Phi - (combination) = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import comb

from .errors import (
    CertificateFailed, NotConstantCoefficients, NotFirstOrder, NotInvolutive,
)
from .exactalg import Echelon, Row, solve_nullspace
from .involution import InvolutiveSystem, JanetBoard, characters, involution_test, janet_board
from .jetspace import (
    add_unit, class_of, index_key, indices_of_order, jet_class, jet_key, jet_order,
    mi_add, sub_unit, unit, zero_index,
)
from .operators import OperatorMatrix, compose
from .pdesys import SolvedSystem, System, change_unknowns, derive_row, echelon, solved_form
from .symbolcalc import delta_map, symbol_at, _rank


def _prov_key(c):
    if c[0] == "p":
        return (0, c[1], index_key(c[2]))
    return (1, jet_key(c))


def numbered_rows(sol: SolvedSystem) -> list[tuple]:
    """(pivot, row) pairs numbered by order, class, index, then unknown ascending."""
    return sorted(sol.rows(), key=lambda t: index_key(t[0][1]) + (t[0][0],))


def _is_top(pivot, q) -> bool:
    return jet_order(pivot) == q


@dataclass
class CCResult:
    operator: OperatorMatrix         # rows = conditions, cols = the input rows
    origins: list                    # (tau, j) per condition, 1-based
    system: System                   # the conditions as a first-order system
    board: JanetBoard | None


def cc_from_rows(pivots: list, rows: list[Row], q: int, vars, field) -> tuple[list[dict], list]:
    """Core construction on an involutive family of rows spanning R_q."""
    n = len(vars)
    ech = Echelon(_prov_key)
    z = zero_index(n)
    gens = []
    for tau, row in enumerate(rows):
        gens.append({**row, ("p", tau, z): field.one})
    for tau, (p, row) in enumerate(zip(pivots, rows)):
        if _is_top(p, q):
            for i in range(1, jet_class(p) + 1):
                gens.append({**derive_row(row, i, vars, field), ("p", tau, unit(n, i)): field.one})
    for g in gens:
        r = ech.reduce(g)
        if any(c[0] != "p" for c in r):
            ech.insert(r)
    out, origins = [], []
    dots = []
    for tau, (p, row) in enumerate(zip(pivots, rows)):
        first = jet_class(p) + 1 if (_is_top(p, q) and q > 0) else 1
        for j in range(first, n + 1):
            dots.append((j, tau))
    for j, tau in sorted(dots):
        target = {**derive_row(rows[tau], j, vars, field), ("p", tau, unit(n, j)): field.one}
        res = ech.reduce(target)
        if any(c[0] != "p" for c in res):
            raise NotInvolutive(f"d_{j} of row {tau + 1} does not reduce")
        out.append(res)
        origins.append((tau + 1, j))
    return out, origins


def _to_operator(prov_rows: list[dict], ncols: int, vars, field) -> OperatorMatrix:
    ent = []
    for r in prov_rows:
        e = [dict() for _ in range(ncols)]
        for (_, tau, nu), c in r.items():
            e[tau][nu] = c
        ent.append(e)
    return OperatorMatrix(ent, ncols, vars, field)


def _cc_stage(pivots, rows, q, vars, field, prefix: str) -> CCResult:
    prov, origins = cc_from_rows(pivots, rows, q, vars, field)
    op = _to_operator(prov, len(rows), vars, field)
    names = tuple(f"{prefix}{i + 1}" for i in range(len(rows)))
    s = op.to_system(names)
    board = janet_board(solved_form(s)) if s.rows else None
    return CCResult(op, origins, s, board)


def compatibility_conditions(inv) -> CCResult:
    sol = inv.solved if isinstance(inv, InvolutiveSystem) else inv
    ok, _ = involution_test(sol, check_fi=False)
    if not ok:
        raise NotInvolutive("compatibility conditions need an involutive system")
    numbered = numbered_rows(sol)
    return _cc_stage([p for p, _ in numbered], [r for _, r in numbered], sol.q,
                     sol.vars, sol.field, "Phi")


@dataclass
class JanetSequenceReport:
    m: int
    fiber_dims: list                  # F_0, F_1, ...
    operators: list                   # D_0 (the system), D_1, ...
    boards: list
    euler: int
    stage_kind: list = dc_field(default_factory=list)
    degrees: list = dc_field(default_factory=list)
    composition_zero: bool = True

    def as_dict(self):
        return {"m": self.m, "F": list(self.fiber_dims), "euler": self.euler,
                "stages": list(self.stage_kind), "degrees": [list(d) for d in self.degrees],
                "compositions_vanish": self.composition_zero}


def _euler(m, dims) -> int:
    return m + sum((-1) ** (i + 1) * d for i, d in enumerate(dims))


def janet_sequence(inv) -> JanetSequenceReport:
    sol = inv.solved if isinstance(inv, InvolutiveSystem) else inv
    ok, _ = involution_test(sol, check_fi=False)
    if not ok:
        raise NotInvolutive("the Janet sequence needs an involutive system")
    numbered = numbered_rows(sol)
    pivots = [p for p, _ in numbered]
    rows = [r for _, r in numbered]
    d0 = OperatorMatrix.from_system(sol.base, rows)
    ops, dims, boards, kinds = [d0], [len(rows)], [janet_board(sol)], ["involutive"]
    q = sol.q
    prefix = ["Phi", "Psi", "Omega"]
    stage = 0
    zero = True
    while rows and stage < sol.n:
        res = _cc_stage(pivots, rows, q, sol.vars, sol.field, prefix[min(stage, 2)] if stage < 3 else f"F{stage}_")
        if not res.operator.nrows:
            break
        zero = zero and compose(res.operator, ops[-1]).is_zero()
        ops.append(res.operator)
        dims.append(res.operator.nrows)
        boards.append(res.board)
        kinds.append("involutive")
        # next stage works on the conditions themselves, kept in their order
        nxt = res.operator.to_rows()
        s_next = res.system
        sol_next = solved_form(s_next)
        ok, _ = involution_test(sol_next, check_fi=False)
        if not ok:
            raise NotInvolutive(f"stage {stage + 1} conditions are not involutive")
        piv = [max(r, key=jet_key) for r in nxt]
        if sorted(piv, key=jet_key) != sorted(sol_next.ech.rows, key=jet_key) or \
                any(sol_next.ech.rows[p] != {c: v / r[p] for c, v in r.items()} for p, r in zip(piv, nxt)):
            numbered = numbered_rows(sol_next)
            piv = [p for p, _ in numbered]
            nxt = [r for _, r in numbered]
        pivots, rows, q = piv, nxt, 1
        stage += 1
    return JanetSequenceReport(sol.m, dims, ops, boards, _euler(sol.m, dims), kinds, [], zero)


# ---------------------------------------------------------------------------
# graded resolution for homogeneous constant-coefficient systems

def _monomials(n: int, d: int):
    return indices_of_order(n, d) if d >= 0 else ()


def _poly_mul(a: dict, b: dict) -> dict:
    out = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            k = mi_add(m1, m2)
            v = out.get(k)
            v = c1 * c2 if v is None else v + c1 * c2
            if v:
                out[k] = v
            else:
                out.pop(k)
    return out


def _syzygies(gens: list, degs: list, col_shifts: list, n: int, field, cap: int):
    """Minimal homogeneous syzygies of the rows `gens` (lists of polynomials)."""
    found: list = []   # (vector of polynomials, degree)
    start = min(degs) + 1 if degs else 0
    for e in range(start, cap + 1):
        unknowns = [(r, mu) for r, d in enumerate(degs) if e - d >= 0 for mu in _monomials(n, e - d)]
        if not unknowns:
            continue
        uidx = {u: i for i, u in enumerate(unknowns)}
        eqs = {}
        for ui, (r, mu) in enumerate(unknowns):
            for k, poly in enumerate(gens[r]):
                for nu, c in poly.items():
                    key = (k, mi_add(mu, nu))
                    eqs.setdefault(key, {})
                    eqs[key][ui] = eqs[key].get(ui, field.zero) + c
        mat = [[row.get(i, field.zero) for i in range(len(unknowns))] for row in eqs.values()]
        null = solve_nullspace(mat, len(unknowns), field) if mat else \
            [[field.one if i == j else field.zero for i in range(len(unknowns))] for j in range(len(unknowns))]
        span = Echelon(lambda c: -c)
        for vec, dg in found:
            for mono in _monomials(n, e - dg):
                v = {}
                for r, poly in enumerate(vec):
                    for mu, c in poly.items():
                        key = (r, mi_add(mu, mono))
                        if key in uidx:
                            v[uidx[key]] = c
                span.insert(v)
        for vec in null:
            row = {i: c for i, c in enumerate(vec) if c}
            if span.insert(row) is not None:
                polys = [dict() for _ in gens]
                for i, c in row.items():
                    r, mu = unknowns[i]
                    polys[r][mu] = c
                found.append((polys, e))
    return found


def _hilbert_free(n: int, degrees: list, t: int) -> int:
    return sum(comb(t - d + n - 1, n - 1) for d in degrees if t - d >= 0)


def fi_resolution(s: System, cap: int | None = None) -> JanetSequenceReport:
    """Graded free resolution of a homogeneous constant-coefficient system.

    Used for formally integrable stages that are not involutive; certified
    by comparing Hilbert functions with the parametric jet counts."""
    if not s.is_constant_coefficient():
        raise NotConstantCoefficients("graded resolution needs constant coefficients")
    n, m, field = s.n, s.m, s.field
    ech = echelon(s.rows)
    rows = [r for _, r in sorted(ech.rows.items(), key=lambda t: index_key(t[0][1]) + (t[0][0],))]
    degs = []
    for r in rows:
        orders = {sum(mu) for _, mu in r}
        if len(orders) != 1:
            raise NotConstantCoefficients("graded resolution needs homogeneous rows")
        degs.append(orders.pop())
    sol = solved_form(s)
    vanish = None
    for lvl in range(sol.q, sol.q + 8):
        if symbol_at(sol, lvl).dim == 0:
            vanish = lvl
            break
    reg = (vanish - 1) if vanish is not None else 2 * sol.q + n
    gens = [[{mu: c for (k, mu), c in r.items() if k == kk} for kk in range(m)] for r in rows]
    ops = [OperatorMatrix([[dict(p) for p in g] for g in gens], m, s.vars, field)]
    dims, all_degs = [len(gens)], [list(degs)]
    shifts = [0] * m
    stage = 1
    while gens and stage <= n:
        c = cap if cap is not None else reg + stage + 1
        syz = _syzygies(gens, degs, shifts, n, field, c)
        if not syz:
            break
        new_gens = [v for v, _ in syz]
        new_degs = [d for _, d in syz]
        ops.append(OperatorMatrix([[dict(p) for p in v] for v in new_gens], len(gens), s.vars, field))
        dims.append(len(new_gens))
        all_degs.append(new_degs)
        shifts, gens, degs = degs, new_gens, new_degs
        stage += 1
    zero = all(compose(ops[i + 1], ops[i]).is_zero() for i in range(len(ops) - 1))
    top = max((max(d) for d in all_degs if d), default=0) + n + 1
    for t in range(top + 1):
        expect = symbol_at(sol, t).dim
        got = m * comb(t + n - 1, n - 1)
        for i, dl in enumerate(all_degs):
            got += (-1) ** (i + 1) * _hilbert_free(n, dl, t)
        if got != expect:
            raise CertificateFailed(f"Hilbert function mismatch at degree {t}", abs(got - expect), t)
    kinds = ["formally-integrable"] * len(dims)
    return JanetSequenceReport(m, dims, ops, [], _euler(m, dims), kinds, all_degs, zero)


# ---------------------------------------------------------------------------
# Spencer form

@dataclass
class SpencerFormSystem:
    system: System
    labels: list          # y-jet represented by each unknown z
    reduced: bool = False
    dropped: list = dc_field(default_factory=list)
    order: int = 0        # the order q' with R_{q'} inside J_1(R_{q'-1})

    def solved(self) -> SolvedSystem:
        return solved_form(self.system)

    def characters(self):
        return characters(janet_board(self.solved()))


def spencer_form(inv, lift: int = 0, drop_potentials: bool = False) -> SpencerFormSystem:
    """First-order system R_{q+lift} inside J_1(R_{q+lift-1}) in the unknowns z.

    Each z stands for a parametric jet of order <= q+lift-1."""
    sol = inv.solved if isinstance(inv, InvolutiveSystem) else inv
    if not involution_test(sol, check_fi=False)[0]:
        raise NotInvolutive("Spencer form needs an involutive system")
    Q = sol.q + lift
    if Q < 1:
        raise NotFirstOrder("order zero system has no Spencer form")
    sq = sol.prolonged(lift)
    field, n = sol.field, sol.n
    params = sq.parametric(Q - 1)
    idx = {p: a for a, p in enumerate(params)}
    z0 = zero_index(n)

    def zj(a, i):
        return (a, unit(n, i))

    def expr(jet) -> dict:
        if jet_order(jet) < Q:
            return {(idx[jet], z0): field.one}
        c = jet_class(jet)
        return {zj(idx[(jet[0], sub_unit(jet[1], c))], c): field.one}

    def add(out, d, c):
        for k, v in d.items():
            w = out.get(k, field.zero) + c * v
            if w:
                out[k] = w
            else:
                out.pop(k, None)

    rows, definitional = [], {}
    for a, (k, lam) in enumerate(params):
        for i in range(1, n + 1):
            t = (k, add_unit(lam, i))
            row = {zj(a, i): field.one}
            if t in sq.ech.rows:
                for j, c in sq.ech.rows[t].items():
                    if j != t:
                        add(row, expr(j), c)
            elif jet_order(t) < Q:
                add(row, expr(t), -field.one)
                if not any(lam):
                    definitional.setdefault(a, []).append(len(rows))
            else:
                if i <= (class_of(lam) or n + 1):
                    continue
                add(row, expr(t), -field.one)
            rows.append(row)
    dropped = []
    if drop_potentials:
        for a, rlist in definitional.items():
            k, lam = params[a]
            if len(rlist) != n:
                continue
            used = any((a, z0) in r for ri, r in enumerate(rows) if ri not in rlist)
            if not used:
                dropped.append(a)
        drop_rows = {ri for a in dropped for ri in definitional[a]}
        rows = [r for ri, r in enumerate(rows) if ri not in drop_rows]
        keep = [a for a in range(len(params)) if a not in dropped]
        ren = {a: b for b, a in enumerate(keep)}
        rows = [{(ren[a], mu): c for (a, mu), c in r.items()} for r in rows]
        labels = [params[a] for a in keep]
    else:
        labels = list(params)
    names = tuple(f"z{i + 1}" for i in range(len(labels)))
    ech = echelon(rows)
    srows = [r for _, r in ech.sorted_rows()]
    system = System(sol.vars, names, field, srows, declared_order=1)
    return SpencerFormSystem(system, labels, False, [params[a] for a in dropped], Q)


def _principal_sets(sol: SolvedSystem) -> list[set]:
    """P_i: unknowns with a principal first-order jet of class i (1-based list)."""
    out = [set() for _ in range(sol.n + 1)]
    for p, _ in sol.top_rows():
        out[jet_class(p)].add(p[0])
    return out


def _reduced_violations(sol: SolvedSystem) -> list:
    """Entries breaking the reduced shape: class-n rows use unknowns outside
    P_n only through jets of class < n, lower classes avoid them entirely."""
    n = sol.n
    outside = set(range(sol.m)) - _principal_sets(sol)[n]
    bad = []
    for p, row in sol.top_rows():
        c = jet_class(p)
        for (k, mu) in row:
            if k not in outside:
                continue
            if c < n or (class_of(mu) or 0) >= n:
                bad.append((p, (k, mu)))
    return bad


def reduce_spencer_form(s) -> SpencerFormSystem:
    """Absorb class-i parametric derivatives of non-principal unknowns by
    zero-order changes z^k -> z^k + a z^l, from class n downwards."""
    sf = s if isinstance(s, SpencerFormSystem) else None
    system = sf.system if sf else s
    if system.q != 1 or any(row_max_order(r) != 1 for r in system.rows):
        raise NotFirstOrder("reduction applies to first-order systems without zero-order rows")
    sol = solved_form(system)
    if sol.lower_rows():
        raise NotFirstOrder("system has zero-order equations")
    if not involution_test(sol, check_fi=False)[0]:
        raise NotInvolutive("reduction needs an involutive system")
    n, m, field = sol.n, sol.m, sol.field
    for _ in range(n):
        P = _principal_sets(sol)
        change = None
        for i in range(n, 0, -1):
            S = [[field.one if a == b else field.zero for b in range(m)] for a in range(m)]
            hit = False
            for p, row in sol.top_rows():
                if jet_class(p) != i:
                    continue
                k = p[0]
                for (l, mu), c in row.items():
                    if l not in P[i] and mu == unit(n, i):
                        S[k][l] = S[k][l] - c
                        hit = True
            if hit:
                change = S
                break
        if change is None:
            break
        system = change_unknowns(sol.as_system(), change)
        sol = solved_form(system)
    reduced = not _reduced_violations(sol)
    out_sys = sol.as_system()
    labels = sf.labels if sf else [None] * m
    return SpencerFormSystem(out_sys, labels, reduced, sf.dropped if sf else [], sf.order if sf else 1)


def row_max_order(row) -> int:
    return max(sum(mu) for _, mu in row)


def spencer_bundle_dims(inv) -> list[int]:
    """dim C_r = C(n,r) dim R_q - rank(delta: wedge^{r-1} g_{q+1} -> wedge^r g_q)."""
    sol = inv.solved if isinstance(inv, InvolutiveSystem) else inv
    n, q = sol.n, sol.q
    dim_r = sol.dim_R(q)
    out = [dim_r]
    for r in range(1, n + 1):
        rk = _rank(delta_map(sol, r - 1, q), sol.field)
        out.append(comb(n, r) * dim_r - rk)
    return out
