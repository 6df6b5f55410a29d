"""Exact scalar expressions: the coefficient ring of the whole package.

A ``CoeffExpr`` is a finite sum of terms.  Each term is

    q * sqrt(r) * u^a * lambda^b * eps^c * log(u1)^d * u1^e * prod F^(k)(u)^m

with q a rational number, r a positive squarefree integer, a, e integers,
b, c, d nonnegative integers, and F ranging over formal function symbols
(g, c, user-declared).  Function symbols are never expanded or evaluated;
their derivatives F', F'', ... are independent atoms linked only by d/du.

lambda and eps occur polynomially only.  The log(u1) and negative-u1
atoms are the "extended mode" atoms used by the dispersive deformation
generator; u1 is treated there as an opaque positive quantity, and the
jet algebra is responsible for folding these powers with its own u1
exponents.  Everything is immutable and safe to share between threads.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterator, Mapping


def _squarefree_split(n: int) -> tuple[int, int]:
    """Return (s, r) with n = s^2 * r and r squarefree, for n >= 1."""
    s, r, d = 1, 1, 2
    while d * d <= n:
        while n % (d * d) == 0:
            n //= d * d
            s *= d
        if n % d == 0:
            n //= d
            r *= d
        d += 1
    return s, r * n


# A term key: (radicand, u_pow, lam_pow, eps_pow, log_pow, u1_pow, funcs)
# where funcs is a sorted tuple of ((name, order), exponent) with nonzero
# integer exponents.
Key = tuple[int, int, int, int, int, int, tuple]

_ONE_KEY: Key = (1, 0, 0, 0, 0, 0, ())


def _mul_keys(k1: Key, k2: Key) -> tuple[Key, Fraction]:
    """Multiply two term keys; returns the new key and a rational carry."""
    rad1, u1p, l1, e1, lg1, j1, f1 = k1
    rad2, u2p, l2, e2, lg2, j2, f2 = k2
    carry = Fraction(1)
    rad = rad1 * rad2
    if rad != 1:
        sq, rad = _squarefree_split(rad)
        carry *= sq
    funcs: dict = dict(f1)
    for atom, exp in f2:
        new = funcs.get(atom, 0) + exp
        if new == 0:
            funcs.pop(atom)
        else:
            funcs[atom] = new
    key = (rad, u1p + u2p, l1 + l2, e1 + e2, lg1 + lg2, j1 + j2,
           tuple(sorted(funcs.items())))
    return key, carry


class CoeffExpr:
    """An exact scalar expression in canonical (expanded, collected) form."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Key, Fraction] | None = None):
        clean = {}
        if terms:
            for key, coef in terms.items():
                if coef:
                    clean[key] = coef
        self._terms = clean

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero() -> "CoeffExpr":
        return CoeffExpr()

    @staticmethod
    def rational(p, q=1) -> "CoeffExpr":
        val = Fraction(p, q)
        return CoeffExpr({_ONE_KEY: val}) if val else CoeffExpr()

    @staticmethod
    def one() -> "CoeffExpr":
        return CoeffExpr.rational(1)

    @staticmethod
    def var_u(power: int = 1) -> "CoeffExpr":
        return CoeffExpr({(1, power, 0, 0, 0, 0, ()): Fraction(1)})

    @staticmethod
    def var_lambda() -> "CoeffExpr":
        return CoeffExpr({(1, 0, 1, 0, 0, 0, ()): Fraction(1)})

    @staticmethod
    def var_eps(power: int = 1) -> "CoeffExpr":
        return CoeffExpr({(1, 0, 0, power, 0, 0, ()): Fraction(1)})

    @staticmethod
    def sqrt(r) -> "CoeffExpr":
        """Exact square root of a positive rational."""
        r = Fraction(r)
        if r <= 0:
            raise ValueError("radicand must be a positive rational")
        # sqrt(p/q) = sqrt(p*q)/q
        n = r.numerator * r.denominator
        s, rad = _squarefree_split(n)
        return CoeffExpr({(rad, 0, 0, 0, 0, 0, ()): Fraction(s, r.denominator)})

    @staticmethod
    def func(name: str, order: int = 0, exponent: int = 1) -> "CoeffExpr":
        """The formal atom F^(order)(u) raised to an integer power."""
        if exponent == 0:
            return CoeffExpr.one()
        key = (1, 0, 0, 0, 0, 0, (((name, order), exponent),))
        return CoeffExpr({key: Fraction(1)})

    @staticmethod
    def log_u1(power: int = 1) -> "CoeffExpr":
        """Extended-mode atom log(u1)^power."""
        return CoeffExpr({(1, 0, 0, 0, power, 0, ()): Fraction(1)})

    @staticmethod
    def u1_power(k: int) -> "CoeffExpr":
        """Extended-mode atom u1^k (normally k < 0)."""
        return CoeffExpr({(1, 0, 0, 0, 0, k, ()): Fraction(1)})

    # -- ring structure -----------------------------------------------

    def __add__(self, other) -> "CoeffExpr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms = dict(self._terms)
        for key, coef in other._terms.items():
            new = terms.get(key, 0) + coef
            if new:
                terms[key] = new
            else:
                terms.pop(key, None)
        return CoeffExpr(terms)

    __radd__ = __add__

    def __neg__(self) -> "CoeffExpr":
        return CoeffExpr({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other) -> "CoeffExpr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms: dict = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                key, carry = _mul_keys(k1, k2)
                new = terms.get(key, 0) + c1 * c2 * carry
                if new:
                    terms[key] = new
                else:
                    terms.pop(key, None)
        return CoeffExpr(terms)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "CoeffExpr":
        if not isinstance(n, int):
            raise TypeError("only integer powers are defined")
        if n < 0:
            return self.inverse() ** (-n)
        result = CoeffExpr.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def inverse(self) -> "CoeffExpr":
        """Invert a single-term expression; lambda/eps/log must be absent."""
        if len(self._terms) != 1:
            raise ValueError("can only invert a single-term expression")
        (key, coef), = self._terms.items()
        rad, u_pow, lam, eps, log, u1p, funcs = key
        if lam or eps or log:
            raise ValueError("cannot invert lambda, eps or log atoms")
        # 1/sqrt(r) = sqrt(r)/r
        inv_coef = 1 / (coef * rad)
        inv_key = (rad, -u_pow, 0, 0, 0, -u1p,
                   tuple(sorted((atom, -e) for atom, e in funcs)))
        return CoeffExpr({inv_key: inv_coef})

    def __truediv__(self, other) -> "CoeffExpr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return _coerce(other) * self.inverse()

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __repr__(self) -> str:
        return f"CoeffExpr({self.render()})"

    # -- queries -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self._terms

    def terms(self) -> Iterator[tuple[Key, Fraction]]:
        return iter(self._terms.items())

    def has_extension_atoms(self) -> bool:
        return any(k[4] or k[5] for k in self._terms)

    def is_rational(self) -> bool:
        return all(k == _ONE_KEY for k in self._terms)

    def as_fraction(self) -> Fraction:
        if not self._terms:
            return Fraction(0)
        if not self.is_rational():
            raise ValueError("not a rational constant")
        return self._terms[_ONE_KEY]

    def lambda_degree(self) -> int:
        return max((k[2] for k in self._terms), default=0)

    def eps_degree(self) -> int:
        return max((k[3] for k in self._terms), default=0)

    def lambda_coefficient(self, power: int) -> "CoeffExpr":
        """Coefficient of lambda^power, as a lambda-free expression."""
        out = {}
        for key, coef in self._terms.items():
            if key[2] == power:
                out[key[:2] + (0,) + key[3:]] = coef
        return CoeffExpr(out)

    def eps_coefficient(self, power: int) -> "CoeffExpr":
        out = {}
        for key, coef in self._terms.items():
            if key[3] == power:
                out[key[:3] + (0,) + key[4:]] = coef
        return CoeffExpr(out)

    # -- calculus ------------------------------------------------------

    def ddu(self) -> "CoeffExpr":
        """Formal d/du at fixed lambda; extension atoms are u-independent."""
        terms: dict = {}

        def put(key, coef):
            if coef:
                new = terms.get(key, 0) + coef
                if new:
                    terms[key] = new
                else:
                    terms.pop(key, None)

        for key, coef in self._terms.items():
            rad, u_pow, lam, eps, log, u1p, funcs = key
            if u_pow:
                put((rad, u_pow - 1, lam, eps, log, u1p, funcs), coef * u_pow)
            for i, (atom, exp) in enumerate(funcs):
                name, order = atom
                bumped: dict = dict(funcs)
                if exp == 1:
                    bumped.pop(atom)
                else:
                    bumped[atom] = exp - 1
                up = (name, order + 1)
                bumped[up] = bumped.get(up, 0) + 1
                if bumped[up] == 0:
                    bumped.pop(up)
                put((rad, u_pow, lam, eps, log, u1p,
                     tuple(sorted(bumped.items()))), coef * exp)
        return CoeffExpr(terms)

    def dlambda(self) -> "CoeffExpr":
        """Polynomial d/dlambda."""
        terms = {}
        for key, coef in self._terms.items():
            if key[2]:
                new = key[:2] + (key[2] - 1,) + key[3:]
                terms[new] = terms.get(new, 0) + coef * key[2]
        return CoeffExpr(terms)

    def subst_lambda(self, value: "CoeffExpr") -> "CoeffExpr":
        """Replace lambda by a lambda-free expression."""
        if value.lambda_degree():
            raise ValueError("substitution value must be lambda-free")
        out = CoeffExpr.zero()
        for power in range(self.lambda_degree() + 1):
            part = self.lambda_coefficient(power)
            if part:
                out = out + part * value ** power
        return out

    def du1_extended(self) -> "CoeffExpr":
        """d/du1 on the extension atoms only (log(u1) and u1 powers)."""
        terms: dict = {}
        for key, coef in self._terms.items():
            rad, u_pow, lam, eps, log, u1p, funcs = key
            if log:
                k = (rad, u_pow, lam, eps, log - 1, u1p - 1, funcs)
                terms[k] = terms.get(k, 0) + coef * log
            if u1p:
                k = (rad, u_pow, lam, eps, log, u1p - 1, funcs)
                terms[k] = terms.get(k, 0) + coef * u1p
        return CoeffExpr(terms)

    # -- rendering -----------------------------------------------------

    def render(self, base_name: str = "u") -> str:
        from .parsing import render_coeff
        return render_coeff(self, base_name)


def _coerce(x) -> CoeffExpr:
    if isinstance(x, CoeffExpr):
        return x
    if isinstance(x, (int, Fraction)):
        return CoeffExpr.rational(x)
    return NotImplemented


# Convenient module-level singletons.
ZERO = CoeffExpr.zero()
ONE = CoeffExpr.one()
U = CoeffExpr.var_u()
LAM = CoeffExpr.var_lambda()
EPS = CoeffExpr.var_eps()


def qq(p, q=1) -> CoeffExpr:
    """Shorthand rational constructor."""
    return CoeffExpr.rational(p, q)


def sym(name: str, order: int = 0) -> CoeffExpr:
    """Shorthand formal function atom."""
    return CoeffExpr.func(name, order)


def is_zero(e: CoeffExpr) -> bool:
    return e.is_zero()


def ddu(e: CoeffExpr) -> CoeffExpr:
    return e.ddu()


def subst_lambda(e: CoeffExpr, v: CoeffExpr) -> CoeffExpr:
    return e.subst_lambda(v)
