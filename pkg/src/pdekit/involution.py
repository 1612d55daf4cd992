"""Janet boards, characters, the involution test and completion to involution."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field
from math import comb

from .errors import NotFormallyIntegrable, OrderCapExceeded, SearchExhausted
from .exactalg import Echelon
from .jetspace import Jet, class_of, count_class, jet_class, jet_key, jet_order
from .pdesys import (
    SolvedSystem, System, apply_change, derive_row, echelon, fi_step, solved_form,
)

Matrix = tuple  # tuple of tuples of ints / Fractions


def identity(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def mat_product(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)) for i in range(n))


def transvection(n: int, i: int, j: int, c: int = 1) -> Matrix:
    """x^i -> x^i + c x^j in the d_i -> d_i + c d_j sense (1-based)."""
    m = [list(r) for r in identity(n)]
    m[i - 1][j - 1] += c
    return tuple(tuple(r) for r in m)


def permutation_matrix(perm: tuple) -> Matrix:
    """d_i -> d_{perm[i]} (0-based perm)."""
    n = len(perm)
    return tuple(tuple(1 if perm[i] == j else 0 for j in range(n)) for i in range(n))


# ---------------------------------------------------------------------------

@dataclass
class BoardRow:
    jet: Jet
    cls: int | None
    multiplicative: tuple

    def as_dict(self):
        return {"jet": self.jet, "class": self.cls, "multiplicative": list(self.multiplicative)}


@dataclass
class JanetBoard:
    rows: list            # BoardRow, top rows class-descending then lower rows
    beta: tuple           # beta^1..beta^n
    q: int
    n: int
    m: int

    def render(self, labels=None) -> list[str]:
        out = []
        for r in self.rows:
            cells = [str(i) if i in r.multiplicative else "•" for i in range(1, self.n + 1)]
            out.append(" ".join(cells))
        return out


def janet_board(sol: SolvedSystem) -> JanetBoard:
    top, low = [], []
    for p, _ in sol.rows():
        if jet_order(p) == sol.q:
            c = jet_class(p)
            top.append(BoardRow(p, c, tuple(range(1, c + 1))))
        else:
            low.append(BoardRow(p, jet_class(p), ()))
    top.sort(key=lambda r: (r.cls, jet_key(r.jet)), reverse=True)
    beta = tuple(sum(1 for r in top if r.cls == i) for i in range(1, sol.n + 1))
    return JanetBoard(top + low, beta, sol.q, sol.n, sol.m)


@dataclass
class Characters:
    alpha: tuple   # alpha^1..alpha^n
    beta: tuple
    q: int
    n: int
    m: int

    def as_dict(self):
        return {"alpha": list(self.alpha), "beta": list(self.beta), "q": self.q}


def characters(board: JanetBoard) -> Characters:
    n, m, q = board.n, board.m, board.q
    if q == 0:
        alpha = tuple(0 for _ in range(n))
    else:
        alpha = tuple(m * count_class(n, q, i) - board.beta[i - 1] for i in range(1, n + 1))
    return Characters(alpha, board.beta, q, n, m)


def _multiplicative_echelon(sol: SolvedSystem) -> Echelon:
    ech = sol.ech.copy()
    for p, row in sol.top_rows():
        for i in range(1, jet_class(p) + 1):
            ech.insert(derive_row(row, i, sol.vars, sol.field))
    return ech


def involution_test(sol: SolvedSystem, check_fi: bool = True):
    """(involutive, witness); the witness is (pivot, j, residue) of a failing d_j."""
    if check_fi and not fi_step(sol)[0]:
        raise NotFormallyIntegrable("system is not formally integrable at its order")
    if sol.q == 0:
        return True, None
    ech = _multiplicative_echelon(sol)
    for p, row in sorted(sol.top_rows(), key=lambda t: jet_key(t[0])):
        for j in range(jet_class(p) + 1, sol.n + 1):
            res = ech.reduce(derive_row(row, j, sol.vars, sol.field))
            if res:
                return False, (p, j, res)
    return True, None


# ---------------------------------------------------------------------------
# delta-regular coordinates

def beta_score(sol: SolvedSystem) -> tuple:
    b = janet_board(sol).beta
    return tuple(reversed(b))


def _score_bound(sol: SolvedSystem) -> tuple:
    """Greedy upper bound for (beta^n, ..., beta^1)."""
    n, m, q = sol.n, sol.m, sol.q
    left = len(sol.top_rows())
    out = []
    for i in range(n, 0, -1):
        b = min(m * count_class(n, q, i), left) if q else 0
        out.append(b)
        left -= b
    return tuple(out)


def candidate_changes(n: int, seed: int):
    """Deterministic stream then seeded random unimodular matrices.

    Yields (matrix, is_random)."""
    yield identity(n), False
    perms = [p for p in itertools.permutations(range(n)) if p != tuple(range(n))]
    perms.sort(key=lambda p: (sum(1 for i, x in enumerate(p) if i != x), p))
    for p in perms:
        yield permutation_matrix(p), False
    pairs = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]
    for i, j in pairs:
        yield transvection(n, i, j), False
    for a, b in itertools.combinations(pairs, 2):
        if len({a[0], a[1], b[0], b[1]}) == 4:
            yield mat_product(transvection(n, *a), transvection(n, *b)), False
    rng = random.Random(seed)
    while True:
        m = [list(r) for r in identity(n)]
        # product of random elementary operations keeps determinant +-1
        for _ in range(2 * n):
            i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
            if i == j:
                continue
            c = rng.randint(-3, 3)
            for k in range(n):
                m[i][k] += c * m[j][k]
        if all(abs(v) <= 3 for r in m for v in r):
            yield tuple(tuple(r) for r in m), True


def delta_regular_search(sol: SolvedSystem, seed: int = 0, max_tries: int = 50, window: int = 5):
    """Lexicographically maximize (beta^n, ..., beta^1) over linear changes.

    Returns (matrix, solved system in the new coordinates, tries used).
    """
    n = sol.n
    base = sol.as_system()
    best = (identity(n), sol)
    best_score = beta_score(sol)
    bound = _score_bound(sol)
    if best_score == bound or n == 1:
        return best[0], best[1], 1
    tries = 0
    calm = 0
    for A, is_random in candidate_changes(n, seed):
        if A == identity(n):
            continue
        if is_random:
            tries += 1
            if tries > max_tries:
                raise SearchExhausted(f"no stable maximum after {max_tries} random changes")
        cand = solved_form(apply_change(base, A), sol.q)
        sc = beta_score(cand)
        if sc > best_score:
            best, best_score, calm = (A, cand), sc, 0
            if sc == bound:
                break
        elif is_random:
            calm += 1
            if calm >= window:
                break
    return best[0], best[1], tries


# ---------------------------------------------------------------------------
# completion

@dataclass
class InvolutiveSystem:
    solved: SolvedSystem
    board: JanetBoard
    characters: Characters
    change: Matrix
    log: list = dc_field(default_factory=list)
    original: System | None = None

    @property
    def q(self) -> int:
        return self.solved.q

    @property
    def n(self) -> int:
        return self.solved.n

    @property
    def m(self) -> int:
        return self.solved.m

    @property
    def system(self) -> System:
        return self.solved.as_system()


def _saturate(sol: SolvedSystem, log: list) -> SolvedSystem:
    while True:
        closed, new = fi_step(sol)
        if closed:
            return sol
        log.append({"action": "new-equations", "order": sol.q, "count": len(new.rows)})
        rows = [r for _, r in sol.rows()] + list(new.rows)
        sol = solved_form(sol.base.with_rows(rows, sol.q), sol.q)


def make_involutive(sol: SolvedSystem, change: Matrix, log: list, original=None) -> InvolutiveSystem:
    board = janet_board(sol)
    return InvolutiveSystem(sol, board, characters(board), change, log, original)


def _try_order(sol: SolvedSystem, seed, max_tries, log):
    A, cand, _ = delta_regular_search(sol, seed, max_tries)
    ok, _ = involution_test(cand, check_fi=False)
    return ok, A, cand


def complete_to_involution(s: System, max_order: int | None = None, seed: int = 0,
                           max_tries: int = 50) -> InvolutiveSystem:
    cap = (s.q + 6) if max_order is None else max_order
    log: list = []
    change = identity(s.n)
    sol = solved_form(s)
    log.append({"action": "start", "order": sol.q, "rows": sol.ech.rank})
    while True:
        sol = _saturate(sol, log)
        A, cand, _ = delta_regular_search(sol, seed, max_tries)
        if A != identity(s.n):
            change = mat_product(change, A)
            log.append({"action": "change", "order": sol.q, "matrix": [list(r) for r in A]})
        sol = cand
        ok, witness = involution_test(sol, check_fi=False)
        if ok:
            break
        if sol.q + 1 > cap:
            raise OrderCapExceeded(f"no involutive system up to order {cap}")
        log.append({"action": "prolong", "order": sol.q + 1})
        nxt = sol.prolonged(1)
        sol = SolvedSystem(sol.as_system().with_rows([r for _, r in nxt.rows()], sol.q + 1),
                           sol.q + 1, nxt.ech.copy())
    sol, change = _lower_order(sol, change, seed, max_tries, log)
    log.append({"action": "involutive", "order": sol.q})
    return make_involutive(sol, change, log, s)


def _lower_order(sol: SolvedSystem, change, seed, max_tries, log):
    """Smallest order q' whose projection regenerates R_Q and is involutive."""
    Q = sol.q
    for qq in range(1, Q):
        rows = [r for p, r in sol.rows() if jet_order(p) <= qq]
        low = solved_form(sol.base.with_rows(rows, qq), qq)
        if low.prolonged(Q - qq).dim_R(Q) != sol.dim_R(Q):
            continue
        if not fi_step(low)[0]:
            continue
        A, cand, _ = delta_regular_search(low, seed, max_tries)
        ok, _ = involution_test(cand, check_fi=False)
        if ok:
            if A != identity(sol.n):
                change = mat_product(change, A)
                log.append({"action": "change", "order": qq, "matrix": [list(r) for r in A]})
            log.append({"action": "project", "order": qq})
            return cand, change
    return sol, change


def hilbert_function(inv: InvolutiveSystem, r: int) -> int:
    """dim R_{q+r} from the characters."""
    n, q = inv.n, inv.q
    if q == 0:
        # only zero-order rows: the free unknowns carry full jet spaces
        return (inv.m - len(inv.solved.rows())) * comb(n + r, r)
    base = inv.solved.dim_R(q - 1) if q >= 1 else 0
    return base + sum(comb(r + i, i) * inv.characters.alpha[i - 1] for i in range(1, n + 1))


def nonmultiplicative_parametric(inv: InvolutiveSystem) -> int:
    """Parametric jets with no multiplicative variable, i.e. those of order < q."""
    return inv.solved.dim_R(inv.q - 1) if inv.q >= 1 else 0
