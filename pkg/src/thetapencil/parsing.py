"""Expression grammar shared by the CLI and the bracket file formats.

Identifiers ``u``, ``lambda``, ``eps``; function application ``g(u)`` with
derivatives written as primes ``g'(u)``, ``g''(u)`` or as ``D[g,k](u)``;
``sqrt(<positive rational>)``; integer and rational literals ``p/q``;
operators ``+ - * / ^`` and parentheses.  Whitespace is insignificant.

Density coefficients additionally admit jet variables ``u1, u2, ...``
(``ux``, ``uxx`` are accepted aliases for ``u1``, ``u2``), named after the
bracket's coordinate when that is not ``u``.  Lattice bracket coefficients
use the point atoms ``u(x)``, ``u(y)``, ``u(x+eps)``, ``u(x-2*eps)``, ...
"""

from __future__ import annotations

import re
from fractions import Fraction

from .coeff import CoeffExpr

RESERVED = ("u", "lambda", "eps", "sqrt", "log", "D", "x", "y")

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)('*)|(.))")


class ParseError(ValueError):
    """Syntax or symbol error, carrying the offending position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


def _tokenize(text: str):
    tokens = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if not m or m.end() == i:
            raise ParseError("cannot tokenize", i)
        num, name, primes, op = m.groups()
        pos = m.start(1) if num else (m.start(2) if name else m.start(4))
        if num:
            tokens.append(("num", int(num), pos))
        elif name:
            tokens.append(("name", name, pos))
            if primes:
                tokens.append(("primes", len(primes), pos))
        elif op in "+-*/^()[],":
            tokens.append(("op", op, pos))
        else:
            raise ParseError(f"unexpected character {op!r}", m.start(4))
        i = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    """Recursive-descent parser; atom semantics are delegated to a context."""

    def __init__(self, text: str, context):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.ctx = context

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.next()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", pos)

    def expect_name(self) -> tuple[str, int]:
        kind, val, pos = self.next()
        if kind != "name":
            raise ParseError("expected an identifier", pos)
        return val, pos

    def parse(self):
        value = self.expr()
        kind, _, pos = self.peek()
        if kind != "end":
            raise ParseError("trailing input", pos)
        return value

    def expr(self):
        value = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                rhs = self.term()
                value = value + rhs if val == "+" else value - rhs
            else:
                return value

    def term(self):
        value = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.next()
                rhs = self.unary()
                if val == "*":
                    value = value * rhs
                else:
                    kindp, _, pos = self.peek()
                    try:
                        value = value / rhs
                    except ValueError as exc:
                        raise ParseError(str(exc), pos) from exc
            else:
                return value

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return -self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.next()
            return base ** self.exponent()
        return base

    def exponent(self) -> int:
        kind, val, pos = self.next()
        sign = 1
        parenthesized = False
        if kind == "op" and val == "(":
            parenthesized = True
            kind, val, pos = self.next()
        if kind == "op" and val == "-":
            sign = -1
            kind, val, pos = self.next()
        if kind != "num":
            raise ParseError("expected an integer exponent", pos)
        if parenthesized:
            self.expect_op(")")
        return sign * val

    def atom(self):
        kind, val, pos = self.next()
        if kind == "num":
            return self.ctx.number(Fraction(val))
        if kind == "op" and val == "(":
            value = self.expr()
            self.expect_op(")")
            return value
        if kind == "name":
            if val == "D":
                return self._bracket_derivative(pos)
            order = 0
            kindp, nprimes, _ = self.peek()
            if kindp == "primes":
                self.next()
                order = nprimes
            kindp, valp, _ = self.peek()
            if kindp == "op" and valp == "(":
                self.next()
                return self.ctx.call(val, order, self, pos)
            if order:
                raise ParseError("derivative needs an argument list", pos)
            return self.ctx.name(val, pos)
        raise ParseError("expected a value", pos)

    def _bracket_derivative(self, pos: int):
        # D[f,k](u)
        self.expect_op("[")
        name, _ = self.expect_name()
        self.expect_op(",")
        kind, order, opos = self.next()
        if kind != "num":
            raise ParseError("expected a derivative order", opos)
        self.expect_op("]")
        self.expect_op("(")
        return self.ctx.call(name, order, self, pos)


class ScalarContext:
    """Atoms of the plain coefficient grammar, valued in CoeffExpr."""

    def __init__(self, symbols=("g", "c"), base_name: str = "u"):
        self.symbols = set(symbols)
        self.base_name = base_name

    def number(self, value: Fraction) -> CoeffExpr:
        return CoeffExpr.rational(value)

    def name(self, name: str, pos: int) -> CoeffExpr:
        if name == self.base_name or name == "u":
            return CoeffExpr.var_u()
        if name == "lambda":
            return CoeffExpr.var_lambda()
        if name == "eps":
            return CoeffExpr.var_eps()
        raise ParseError(f"unknown symbol {name!r}", pos)

    def call(self, name: str, order: int, parser: _Parser, pos: int) -> CoeffExpr:
        if name == "sqrt":
            arg = parser.expr()
            parser.expect_op(")")
            try:
                return CoeffExpr.sqrt(arg.as_fraction())
            except ValueError as exc:
                raise ParseError(str(exc), pos) from exc
        if name not in self.symbols:
            raise ParseError(f"unknown symbol {name!r}", pos)
        arg_name, apos = parser.expect_name()
        if arg_name != self.base_name and arg_name != "u":
            raise ParseError(f"function argument must be {self.base_name!r}", apos)
        parser.expect_op(")")
        return CoeffExpr.func(name, order)


def parse_coeff(text: str, symbols=("g", "c"), base_name: str = "u") -> CoeffExpr:
    """Parse a plain scalar expression."""
    return _Parser(text, ScalarContext(symbols, base_name)).parse()


# -- rendering ---------------------------------------------------------

def _render_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _render_power(base: str, exp: int) -> str:
    if exp == 1:
        return base
    return f"{base}^{exp}" if exp > 1 else f"{base}^({exp})"


def _func_atom(name: str, order: int, base_name: str) -> str:
    if order == 0:
        return f"{name}({base_name})"
    if order <= 3:
        return f"{name}{chr(39) * order}({base_name})"
    return f"D[{name},{order}]({base_name})"


def render_term(key, coef: Fraction, base_name: str = "u") -> tuple[bool, str]:
    """Render one term key; returns (negative, unsigned string)."""
    rad, u_pow, lam, eps, log, u1p, funcs = key
    factors = []
    mag = abs(coef)
    if rad != 1:
        factors.append(f"sqrt({rad})")
    if u_pow:
        factors.append(_render_power(base_name, u_pow))
    if lam:
        factors.append(_render_power("lambda", lam))
    if eps:
        factors.append(_render_power("eps", eps))
    if log:
        factors.append(_render_power(f"log({base_name}1)", log))
    if u1p:
        factors.append(_render_power(f"{base_name}1", u1p))
    for (name, order), exp in funcs:
        factors.append(_render_power(_func_atom(name, order, base_name), exp))
    if not factors:
        return coef < 0, _render_fraction(mag)
    body = "*".join(factors)
    if mag != 1:
        body = f"{_render_fraction(mag)}*{body}"
    return coef < 0, body


def render_coeff(e: CoeffExpr, base_name: str = "u") -> str:
    if e.is_zero():
        return "0"
    parts = []
    for key, coef in sorted(e.terms(), key=lambda t: t[0]):
        neg, body = render_term(key, coef, base_name)
        if not parts:
            parts.append(f"-{body}" if neg else body)
        else:
            parts.append(f"- {body}" if neg else f"+ {body}")
    return " ".join(parts)


# -- densities (differential polynomials with jets) ----------------------

_JET_RE = re.compile(r"^(?P<base>[A-Za-z_]+?)(?:(?P<num>\d+)|(?P<x>x+))$")


class DensityContext:
    """Atoms of the density grammar, valued in p = 0 ThetaPoly elements."""

    def __init__(self, symbols=("g", "c"), coordinate: str = "u",
                 allow_theta: bool = True):
        from .algebra import ThetaPoly
        self.poly = ThetaPoly
        self.symbols = set(symbols)
        self.coordinate = coordinate
        self.allow_theta = allow_theta

    def number(self, value: Fraction):
        return self.poly.from_coeff(CoeffExpr.rational(value))

    def name(self, name: str, pos: int):
        if name == self.coordinate or name == "u":
            return self.poly.from_coeff(CoeffExpr.var_u())
        if name == "lambda":
            return self.poly.from_coeff(CoeffExpr.var_lambda())
        if name == "eps":
            return self.poly.from_coeff(CoeffExpr.var_eps())
        if self.allow_theta and name.startswith("theta"):
            tail = name[5:]
            if tail.isdigit():
                return self.poly.theta(int(tail))
        m = _JET_RE.match(name)
        if m and m.group("base") in (self.coordinate, "u"):
            index = int(m.group("num")) if m.group("num") else len(m.group("x"))
            if index >= 1:
                return self.poly.jet(index)
        raise ParseError(f"unknown symbol {name!r}", pos)

    def call(self, name: str, order: int, parser: _Parser, pos: int):
        if name == "sqrt":
            arg = parser.expr()
            parser.expect_op(")")
            try:
                value = arg.as_coeff().as_fraction()
            except ValueError as exc:
                raise ParseError(str(exc), pos) from exc
            return self.poly.from_coeff(CoeffExpr.sqrt(value))
        if name not in self.symbols:
            raise ParseError(f"unknown symbol {name!r}", pos)
        arg_name, apos = parser.expect_name()
        if arg_name != self.coordinate and arg_name != "u":
            raise ParseError(f"function argument must be {self.coordinate!r}", apos)
        parser.expect_op(")")
        return self.poly.from_coeff(CoeffExpr.func(name, order))


def parse_density(text: str, symbols=("g", "c"), coordinate: str = "u",
                  allow_theta: bool = True):
    """Parse a differential-polynomial expression (jets allowed)."""
    return _Parser(text, DensityContext(symbols, coordinate, allow_theta)).parse()


def render_poly(p, base_name: str = "u") -> str:
    """Canonical flat rendering of a ThetaPoly, parseable by parse_density."""
    entries = []
    for mono, key, q in p.flat_terms():
        entries.append(((mono.odds, mono.evens, key), mono, key, q))
    if not entries:
        return "0"
    entries.sort(key=lambda t: t[0])
    parts = []
    for _, mono, key, q in entries:
        neg, body = render_term(key, q, base_name)
        factors = [] if body == "1" else [body]
        for s, e in mono.evens:
            factors.append(_render_power(f"{base_name}{s}", e))
        for s in mono.odds:
            factors.append(f"theta{s}")
        text = "*".join(factors) if factors else "1"
        if not parts:
            parts.append(f"-{text}" if neg else text)
        else:
            parts.append(f"- {text}" if neg else f"+ {text}")
    return " ".join(parts)
