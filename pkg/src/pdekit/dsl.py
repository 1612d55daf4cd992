"""Line-oriented input format for linear systems.

    field Q(x1,x2)          # or: field Q
    vars x1 x2
    unknowns y z
    constants chi1          # optional: extra constants adjoined to the field
    eq y[0,2] - x2*z[1,0] = 0

Coefficients are rational expressions in the field generators built from
integers, ``+ - * / ^`` and parentheses.  Every equation must be linear and
homogeneous in the jets.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import InconsistentArity, PdeSyntaxError, UndeclaredSymbol
from .exactalg import ScalarField
from .pdesys import System
from .report import render_row

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


@dataclass
class Token:
    kind: str      # num, name, op, end
    text: str
    col: int


def _tokenize(text: str, line: int, offset: int) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1):
            out.append(Token("num", m.group(1), offset + m.start(1) + 1))
        elif m.group(2):
            out.append(Token("name", m.group(2), offset + m.start(2) + 1))
        elif m.group(3):
            ch = m.group(3)
            if ch not in "+-*/^()[],=":
                raise PdeSyntaxError(f"unexpected character {ch!r}", line, offset + m.start(3) + 1)
            out.append(Token("op", ch, offset + m.start(3) + 1))
        pos = m.end()
    out.append(Token("end", "", offset + len(text) + 1))
    return out


class _Lin:
    """scalar + sum c_j * jet_j while parsing."""

    __slots__ = ("scalar", "jets")

    def __init__(self, scalar, jets=None):
        self.scalar = scalar
        self.jets = jets or {}


class _ExprParser:
    def __init__(self, tokens, line, field, vars, unknowns):
        self.toks = tokens
        self.i = 0
        self.line = line
        self.field = field
        self.vars = vars
        self.unknowns = unknowns

    def peek(self) -> Token:
        return self.toks[self.i]

    def take(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.take()
        if t.text != text:
            raise PdeSyntaxError(f"expected {text!r}, found {t.text or 'end of line'!r}", self.line, t.col)
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return PdeSyntaxError(msg, self.line, tok.col)

    # expr := term (('+'|'-') term)*
    def expr(self) -> _Lin:
        acc = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            rhs = self.term()
            acc = self._add(acc, rhs, 1 if op == "+" else -1)
        return acc

    def term(self) -> _Lin:
        acc = self.unary()
        while self.peek().text in ("*", "/"):
            tok = self.take()
            rhs = self.unary()
            if tok.text == "*":
                acc = self._mul(acc, rhs, tok)
            else:
                if rhs.jets:
                    raise self.error("division by a jet is not linear", tok)
                if not rhs.scalar:
                    raise self.error("division by zero", tok)
                acc = self._scale(acc, 1 / rhs.scalar)
        return acc

    def unary(self) -> _Lin:
        if self.peek().text in ("+", "-"):
            op = self.take().text
            v = self.unary()
            return v if op == "+" else self._scale(v, -self.field.one)
        return self.power()

    def power(self) -> _Lin:
        base = self.atom()
        if self.peek().text == "^":
            tok = self.take()
            neg = False
            if self.peek().text == "-":
                self.take()
                neg = True
            e = self.take()
            if e.kind != "num":
                raise self.error("exponent must be an integer", e)
            if base.jets:
                raise self.error("powers of jets are not linear", tok)
            k = int(e.text)
            v = base.scalar ** k
            if neg:
                if not v:
                    raise self.error("division by zero", tok)
                v = 1 / v
            return _Lin(v)
        return base

    def atom(self) -> _Lin:
        t = self.take()
        F = self.field
        if t.kind == "num":
            return _Lin(F(int(t.text)))
        if t.text == "(":
            v = self.expr()
            self.expect(")")
            return v
        if t.kind == "name":
            if t.text in self.unknowns:
                return _Lin(F.zero, {self.jet(t): F.one})
            if t.text in F.gens:
                return _Lin(F.gen(t.text))
            if t.text in self.vars:
                raise UndeclaredSymbol(f"{t.text} is a variable but the field has no generator {t.text}",
                                       self.line, t.col)
            raise UndeclaredSymbol(f"undeclared symbol {t.text}", self.line, t.col)
        raise self.error(f"unexpected {t.text or 'end of line'!r}", t)

    def jet(self, name_tok: Token):
        k = self.unknowns.index(name_tok.text)
        open_tok = self.expect("[")
        mu = []
        while True:
            t = self.take()
            if t.kind != "num":
                raise self.error("multi-index entries must be integers", t)
            mu.append(int(t.text))
            sep = self.take()
            if sep.text == "]":
                break
            if sep.text != ",":
                raise self.error("expected ',' or ']'", sep)
        if len(mu) != len(self.vars):
            raise InconsistentArity(f"multi-index of length {len(mu)} but {len(self.vars)} variables",
                                    self.line, open_tok.col)
        return (k, tuple(mu))

    def _add(self, a: _Lin, b: _Lin, sign) -> _Lin:
        jets = dict(a.jets)
        for j, c in b.jets.items():
            v = jets.get(j, self.field.zero) + c * sign
            if v:
                jets[j] = v
            else:
                jets.pop(j, None)
        return _Lin(a.scalar + b.scalar * sign, jets)

    def _scale(self, a: _Lin, c) -> _Lin:
        return _Lin(a.scalar * c, {j: v * c for j, v in a.jets.items() if v * c})

    def _mul(self, a: _Lin, b: _Lin, tok) -> _Lin:
        if a.jets and b.jets:
            raise self.error("product of two jets is not linear", tok)
        if a.jets:
            return self._scale(a, b.scalar)
        return self._scale(b, a.scalar)


def _names(rest: str, line: int, col: int, what: str) -> tuple[str, ...]:
    names = rest.split()
    for nm in names:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", nm):
            raise PdeSyntaxError(f"bad {what} name {nm!r}", line, col + rest.find(nm) + 1)
    if len(set(names)) != len(names):
        raise PdeSyntaxError(f"repeated {what} name", line, col)
    return tuple(names)


def parse_system(text: str) -> System:
    field_gens = None
    vars: tuple = ()
    unknowns: tuple = ()
    constants: tuple = ()
    eqs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.lstrip()
        indent = len(line) - len(stripped)
        head, _, rest = stripped.partition(" ")
        col = indent + len(head) + 1
        if head == "field":
            m = re.fullmatch(r"\s*Q\s*(?:\(([^)]*)\))?\s*", rest)
            if not m:
                raise PdeSyntaxError("field must be Q or Q(<names>)", lineno, col + 1)
            inner = m.group(1)
            field_gens = tuple(g.strip() for g in inner.split(",")) if inner and inner.strip() else ()
        elif head == "vars":
            vars = _names(rest, lineno, col, "variable")
        elif head == "unknowns":
            unknowns = _names(rest, lineno, col, "unknown")
        elif head == "constants":
            constants = _names(rest, lineno, col, "constant")
        elif head == "eq":
            eqs.append((lineno, rest, col))
        else:
            raise PdeSyntaxError(f"unknown directive {head!r}", lineno, indent + 1)
    if field_gens is None:
        raise PdeSyntaxError("missing field declaration", 1, 1)
    if not vars:
        raise PdeSyntaxError("missing vars declaration", 1, 1)
    if not unknowns:
        raise PdeSyntaxError("missing unknowns declaration", 1, 1)
    clash = set(vars) & set(unknowns) | set(constants) & (set(vars) | set(unknowns))
    if clash:
        raise PdeSyntaxError(f"name used twice: {sorted(clash)[0]}", 1, 1)
    for g in field_gens:
        if g not in vars and g not in constants:
            raise UndeclaredSymbol(f"field generator {g} is neither a variable nor a constant", 1, 1)
    gens = tuple(field_gens) + tuple(c for c in constants if c not in field_gens)
    field = ScalarField(gens)
    rows = []
    for lineno, rest, col in eqs:
        if "=" not in rest:
            raise PdeSyntaxError("equation must end with '= 0'", lineno, col + len(rest) + 1)
        toks = _tokenize(rest, lineno, col)
        p = _ExprParser(toks, lineno, field, vars, unknowns)
        lhs = p.expr()
        p.expect("=")
        rhs = p.expr()
        end = p.peek()
        if end.kind != "end":
            raise PdeSyntaxError(f"unexpected {end.text!r}", lineno, end.col)
        if rhs.jets or rhs.scalar:
            raise PdeSyntaxError("right-hand side must be 0", lineno, col)
        if lhs.scalar:
            raise PdeSyntaxError("equation is not homogeneous", lineno, col)
        rows.append(lhs.jets)
    return System(vars, unknowns, field, rows)


def render_system(s: System, constants: tuple = ()) -> str:
    gens = [g for g in s.field.gens if g in s.vars]
    consts = tuple(constants) or tuple(g for g in s.field.gens if g not in s.vars)
    field_gens = gens + list(consts)
    lines = [f"field Q({','.join(field_gens)})" if field_gens else "field Q",
             f"vars {' '.join(s.vars)}", f"unknowns {' '.join(s.unknowns)}"]
    if consts:
        lines.append(f"constants {' '.join(consts)}")
    for r in s.rows:
        lines.append(f"eq {render_row(r, s.unknowns, s.vars, s.field)} = 0")
    return "\n".join(lines) + "\n"


def parse_element(text: str, s: System) -> dict:
    """A linear combination of jets, e.g. ``y2[0,0,2] - y1[0,1,1] + y1[0,0,0]``."""
    toks = _tokenize(text, 1, 0)
    p = _ExprParser(toks, 1, s.field, s.vars, s.unknowns)
    v = p.expr()
    end = p.peek()
    if end.kind != "end":
        raise PdeSyntaxError(f"unexpected {end.text!r}", 1, end.col)
    if v.scalar:
        raise PdeSyntaxError("element must be a combination of jets", 1, 1)
    return v.jets
