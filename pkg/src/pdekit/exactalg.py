"""Exact scalars and exact linear algebra.

Scalars live in either the rationals or a field of rational functions
QQ(g1, ..., gk).  Both are provided by sympy's polys domains; the rationals are
backed by gmpy2 and the function fields normalise by multivariate gcd.  A
ScalarField bundles the domain with the generator names so that the formal
derivative d/dx_i of a coefficient is just differentiation with respect to the
generator called x_i, and is zero when no generator carries that name (this is
how localisation constants chi_j behave).

Linear algebra is sparse Gauss-Jordan elimination on dict rows.  The pivot of
a row is its greatest column under a caller-supplied key, so the same code
serves plain matrices (pivot_order given as a permutation) and jet systems
(pivots are the greatest jets).
"""
from __future__ import annotations

import functools
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import sympy
from sympy import QQ

from .errors import DivisionByZero, FieldMismatch, IndexOutOfRange

Row = dict  # column -> scalar, never stores zeros


@functools.lru_cache(maxsize=None)
def _domain(gens: tuple[str, ...]):
    if not gens:
        return QQ
    return QQ.frac_field(*[sympy.Symbol(g) for g in gens])


class ScalarField:
    """QQ when ``gens`` is empty, otherwise QQ(gens)."""

    __slots__ = ("gens", "domain", "zero", "one", "_index")

    def __init__(self, gens: Sequence[str] = ()):
        self.gens = tuple(gens)
        if len(set(self.gens)) != len(self.gens):
            raise ValueError(f"repeated generator in {self.gens}")
        self.domain = _domain(self.gens)
        self.zero = self.domain.zero
        self.one = self.domain.one
        self._index = {g: i for i, g in enumerate(self.gens)}

    def __eq__(self, other):
        return isinstance(other, ScalarField) and other.gens == self.gens

    def __hash__(self):
        return hash(("ScalarField", self.gens))

    def __repr__(self):
        return "QQ" if not self.gens else f"QQ({', '.join(self.gens)})"

    @property
    def is_rational(self) -> bool:
        return not self.gens

    def __call__(self, value) -> object:
        """Convert ints, Fractions, strings, sympy expressions and elements."""
        if isinstance(value, Fraction):
            return self.domain.convert(QQ(value.numerator, value.denominator))
        if isinstance(value, str):
            return self.parse(value)
        if isinstance(value, sympy.Basic):
            return self.domain.from_sympy(value)
        if self.gens and hasattr(value, "field") and value.field != self.domain.field:
            # element of another function field: go through sympy
            return self.domain.from_sympy(value.as_expr())
        return self.domain.convert(value)

    def gen(self, name: str):
        """The generator called ``name`` as an element."""
        if name not in self._index:
            raise IndexOutOfRange(f"{name} is not a generator of {self!r}")
        return self.domain.field.gens[self._index[name]] if self.gens else None

    def parse(self, text: str):
        symbols = {g: sympy.Symbol(g) for g in self.gens}
        expr = sympy.sympify(text.replace("^", "**"), locals=symbols)
        if expr.has(sympy.zoo, sympy.nan):
            raise DivisionByZero(f"{text!r} divides by zero")
        if expr.free_symbols - set(symbols.values()):
            raise FieldMismatch(f"{text!r} uses symbols outside {self!r}")
        return self.domain.from_sympy(expr)

    def diff(self, a, name: str):
        """Partial derivative with respect to the generator ``name``.

        Derivations not matching a generator (constant fields, localisation
        constants) give zero.
        """
        if not self.gens or name not in self._index or not a:
            return self.zero
        return a.diff(self.domain.field.gens[self._index[name]])

    def is_constant(self, a) -> bool:
        if not self.gens:
            return True
        return a.numer.is_ground and a.denom.is_ground

    def depends_on(self, a, names: Iterable[str]) -> bool:
        return any(self.diff(a, v) for v in names)

    def _rational(self, c):
        """A constant of this field (or a plain number) as an element of QQ."""
        if hasattr(c, "numer") and hasattr(c.numer, "LC"):
            return QQ.convert(c.numer.LC) / QQ.convert(c.denom.LC)
        return QQ.convert(c)

    def substitute(self, a, images: Mapping[str, Mapping[str, object]]):
        """Replace generator g by the linear form sum_h c_gh * h (simultaneously)."""
        if not self.gens or not a or self.is_constant(a):
            return a
        ring = self.domain.field.ring
        pairs = []
        for g, form in images.items():
            if g not in self._index:
                continue
            poly = ring.zero
            for h, c in form.items():
                poly += ring.gens[self._index[h]] * self._rational(c)
            pairs.append((ring.gens[self._index[g]], poly))
        if not pairs:
            return a
        num = a.numer.compose(pairs)
        den = a.denom.compose(pairs)
        return self.domain.field(num) / self.domain.field(den)

    def fmt(self, a) -> str:
        """Canonical text, e.g. ``-3/2`` or ``x1^2*x2 - 1/3``."""
        if not self.gens:
            return str(a)
        num, den = a.numer, a.denom
        lc = den.LC
        num = num.quo_ground(lc)
        den = den.quo_ground(lc)
        text = str(num).replace("**", "^")
        if den == 1:
            return text
        dtext = str(den).replace("**", "^")
        if len(num.terms()) > 1:
            text = f"({text})"
        if len(den.terms()) > 1 or "*" in dtext:
            dtext = f"({dtext})"
        return f"{text}/{dtext}"

    def coefficient_terms(self, a) -> tuple[dict, dict]:
        """(numerator terms, denominator terms) as monomial -> rational dicts."""
        if not self.gens:
            return {(): a}, {(): QQ.one}
        return dict(a.numer.terms()), dict(a.denom.terms())

    def to_sympy(self, a):
        return self.domain.to_sympy(a)


QQ_FIELD = ScalarField()


def scalar_arith(field: ScalarField, a, b, op: str):
    """Exact field operation; ``op`` is one of add, sub, mul, div."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if not b:
            raise DivisionByZero("division by zero scalar")
        return a / b
    raise ValueError(f"unknown operation {op}")


def partial_derivative(field: ScalarField, a, i: int, var_names: Sequence[str]):
    """d/dx_i of ``a`` where x_1..x_n are ``var_names`` (1-based ``i``)."""
    if not 1 <= i <= len(var_names):
        raise IndexOutOfRange(f"variable index {i} outside 1..{len(var_names)}")
    return field.diff(a, var_names[i - 1])


# ---------------------------------------------------------------------------
# sparse rows

def row_add(dst: Row, src: Row, c) -> None:
    """dst += c*src in place, dropping cancelled entries."""
    for col, v in src.items():
        w = dst.get(col)
        if w is None:
            dst[col] = c * v
        else:
            w = w + c * v
            if w:
                dst[col] = w
            else:
                del dst[col]


def row_scale(row: Row, c) -> Row:
    return {col: c * v for col, v in row.items()} if c else {}


def row_combination(terms: Iterable[tuple[object, Row]]) -> Row:
    out: Row = {}
    for c, row in terms:
        if c:
            row_add(out, row, c)
    return out


class Echelon:
    """Incrementally maintained reduced row echelon form.

    Every stored row has pivot coefficient 1 and contains no other pivot
    column, so reduction of a new row needs a single pass.
    """

    def __init__(self, key: Callable[[Hashable], object], rows: Iterable[Row] = ()):
        self.key = key
        self.rows: dict[Hashable, Row] = {}
        self._users: dict[Hashable, set] = {}  # non-pivot column -> pivots of rows using it
        for r in rows:
            self.insert(r)

    def __len__(self):
        return len(self.rows)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def pivots(self) -> list:
        return sorted(self.rows, key=self.key)

    def copy(self) -> "Echelon":
        new = Echelon(self.key)
        new.rows = {p: dict(r) for p, r in self.rows.items()}
        new._users = {c: set(s) for c, s in self._users.items()}
        return new

    def reduce(self, row: Row) -> Row:
        out = dict(row)
        for col in [c for c in out if c in self.rows]:
            c = out.get(col)
            if c:
                row_add(out, self.rows[col], -c)
        return out

    def contains(self, row: Row) -> bool:
        return not self.reduce(row)

    def leading(self, row: Row):
        return max(row, key=self.key)

    def insert(self, row: Row):
        """Add a row; returns the new pivot or None when it was dependent."""
        r = self.reduce(row)
        if not r:
            return None
        p = max(r, key=self.key)
        inv = 1 / r[p]
        if inv != 1:
            r = {col: v * inv for col, v in r.items()}
        for q in list(self._users.get(p, ())):
            other = self.rows[q]
            c = other.get(p)
            if c:
                self._unindex(q, other)
                row_add(other, r, -c)
                self._index(q, other)
        self._users.pop(p, None)
        self.rows[p] = r
        self._index(p, r)
        return p

    def _index(self, p, row):
        for col in row:
            if col != p:
                self._users.setdefault(col, set()).add(p)

    def _unindex(self, p, row):
        for col in row:
            if col != p:
                s = self._users.get(col)
                if s is not None:
                    s.discard(p)
                    if not s:
                        del self._users[col]

    def sorted_rows(self, descending: bool = True) -> list[tuple[Hashable, Row]]:
        return [(p, self.rows[p]) for p in sorted(self.rows, key=self.key, reverse=descending)]


# ---------------------------------------------------------------------------
# dense matrix helpers

def _to_rows(m: Sequence[Sequence[object]]) -> list[Row]:
    return [{j: v for j, v in enumerate(r) if v} for r in m]


def row_reduce(m: Sequence[Sequence[object]], pivot_order: Sequence[int] | None = None,
               field: ScalarField = QQ_FIELD):
    """Reduced row echelon form of a dense matrix.

    ``pivot_order`` lists the column indices in the order pivots are to be
    chosen (first entry preferred).  Returns (rank, reduced matrix, pivot
    columns) with pivot entries equal to 1.
    """
    ncols = len(m[0]) if m else 0
    order = list(range(ncols)) if pivot_order is None else list(pivot_order)
    if sorted(order) != list(range(ncols)):
        raise ValueError("pivot_order must be a permutation of the column indices")
    preference = {c: -pos for pos, c in enumerate(order)}
    ech = Echelon(lambda c: preference[c])
    for r in _to_rows(m):
        ech.insert(r)
    pivots = [p for p, _ in ech.sorted_rows()]
    reduced = [[ech.rows[p].get(j, field.zero) for j in range(ncols)] for p in pivots]
    return len(pivots), reduced, pivots


def rank(m: Sequence[Sequence[object]]) -> int:
    ech = Echelon(lambda c: -c)
    for r in _to_rows(m):
        ech.insert(r)
    return ech.rank


def solve_nullspace(m: Sequence[Sequence[object]], ncols: int | None = None,
                    field: ScalarField = QQ_FIELD) -> list[list[object]]:
    """Basis of the right null space, one vector per free column."""
    if ncols is None:
        ncols = len(m[0]) if m else 0
    ech = Echelon(lambda c: -c)
    for r in _to_rows(m):
        ech.insert(r)
    free = [j for j in range(ncols) if j not in ech.rows]
    basis = []
    for f in free:
        v = [field.zero] * ncols
        v[f] = field.one
        for p, row in ech.rows.items():
            c = row.get(f)
            if c:
                v[p] = -c
        basis.append(v)
    return basis


def mat_vec(m: Sequence[Sequence[object]], v: Sequence[object], field: ScalarField = QQ_FIELD):
    out = []
    for r in m:
        s = field.zero
        for a, b in zip(r, v):
            if a and b:
                s = s + a * b
        out.append(s)
    return out


def mat_mul(a: Sequence[Sequence[object]], b: Sequence[Sequence[object]], field: ScalarField = QQ_FIELD):
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    out = [[field.zero] * cols for _ in a]
    for i, r in enumerate(a):
        for k in range(inner):
            x = r[k]
            if not x:
                continue
            bk = b[k]
            for j in range(cols):
                y = bk[j]
                if y:
                    out[i][j] = out[i][j] + x * y
    return out


def inverse(m: Sequence[Sequence[object]], field: ScalarField = QQ_FIELD):
    """Inverse of a square matrix; raises DivisionByZero when singular."""
    n = len(m)
    aug = [list(r) + [field.one if i == j else field.zero for j in range(n)] for i, r in enumerate(m)]
    r, red, piv = row_reduce(aug, list(range(2 * n)), field)
    rows = {p: red[k] for k, p in enumerate(piv)}
    if any(i not in rows for i in range(n)):
        raise DivisionByZero("singular matrix")
    return [rows[i][n:] for i in range(n)]
