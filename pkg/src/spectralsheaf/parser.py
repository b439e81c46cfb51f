"""Operator expressions such as "(d^2 + z^3 + 1)^2 + 2*z".

Grammar: sums and products of rationals, z, d, named series and parentheses,
with integer powers (negative powers allowed for pure series) and division by
series.  Products are operator composition, so "d*z" is z d + 1.
"""
from __future__ import annotations

import re
from typing import Mapping

from gmpy2 import mpq

from .diffop import DiffOp, do_mul
from .errors import ParseError
from .scalars import parse_rational
from .series import LaurentSeries, ls_invert

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def _tokens(text: str):
    pos, out = 0, []
    while pos < len(text):
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", *_loc(text, pos))
        start = m.start(m.lastindex)
        kind = ("num", "name", "op")[m.lastindex - 1]
        val = m.group(m.lastindex)
        out.append((kind, "^" if val == "**" else val, start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


def _loc(text, pos):
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _is_series(op: DiffOp) -> bool:
    return op.order <= 0 and len(op.coeffs) <= 1


def _series(op: DiffOp) -> LaurentSeries:
    return op.coeffs[0] if op.coeffs else LaurentSeries.zero(op.field)


class _Parser:
    def __init__(self, text, names, terms):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0
        self.names = names
        self.terms = terms

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, *_loc(self.text, tok[2]))

    def expect(self, val):
        t = self.take()
        if t[1] != val:
            self.fail(f"expected {val!r}", t)

    def parse(self) -> DiffOp:
        if self.peek()[0] == "end":
            self.fail("empty expression")
        e = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return e

    def expr(self):
        sign = 1
        if self.peek()[1] in "+-" and self.peek()[0] == "op":
            sign = -1 if self.take()[1] == "-" else 1
        acc = self.term()
        if sign < 0:
            acc = -acc
        while self.peek()[0] == "op" and self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self):
        acc = self.power()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            tok = self.take()
            rhs = self.power()
            if tok[1] == "*":
                acc = do_mul(acc, rhs)
            else:
                if not _is_series(rhs):
                    self.fail("can only divide by a series", tok)
                s = _series(rhs)
                if s.is_exact_zero():
                    self.fail("division by zero", tok)
                acc = acc.left_scale(ls_invert(s, self.terms))
        return acc

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            tok = self.take()
            neg = False
            if self.peek()[1] == "-":
                self.take()
                neg = True
            t = self.take()
            if t[0] != "num":
                self.fail("exponent must be an integer", t)
            k = int(t[1])
            if neg:
                if not _is_series(base):
                    self.fail("negative powers only for series", tok)
                s = ls_invert(_series(base), self.terms)
                return DiffOp([s**k]) if k else DiffOp.scalar(1)
            out = DiffOp.scalar(1)
            for _ in range(k):
                out = do_mul(out, base)
            return out
        return base

    def atom(self):
        t = self.take()
        kind, val, _ = t
        if kind == "num":
            return DiffOp.scalar(parse_rational(val))
        if kind == "name":
            if val == "d":
                return DiffOp.d()
            if val == "z":
                return DiffOp([LaurentSeries.monomial(mpq(1), 1)])
            if val in self.names:
                s = self.names[val]
                return s if isinstance(s, DiffOp) else DiffOp([s])
            self.fail(f"unknown name {val!r}", t)
        if val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if val == "-":
            return -self.power()
        self.fail(f"unexpected {val!r}" if val else "unexpected end of input", t)


def parse_operator(text: str, names: Mapping | None = None, terms: int | None = None) -> DiffOp:
    return _Parser(text, dict(names or {}), terms).parse()


def parse_series(text: str, names: Mapping | None = None, terms: int | None = None) -> LaurentSeries:
    op = parse_operator(text, names, terms)
    if not _is_series(op):
        raise ParseError("expected a series, found an operator involving d", 1, 1)
    return _series(op)
