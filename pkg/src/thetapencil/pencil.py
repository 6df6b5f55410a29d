"""Brackets in the delta-function formalism and their deformations.

A bracket {u(x), u(y)} = sum_e,k eps^e A_{e,k} delta^(k)(x-y) is stored
through its operator K = sum A_k d^k (eps kept inside the coefficients);
skewness means K conjugated by integration by parts equals -K.  The
correspondence with bivector densities is

    P = sum_{k>=1} A_k theta0 theta^k   <->   K = sum_k A_k d^k,

the delta^0 coefficient being recovered from skewness (for a hydrodynamic
bracket this is the familiar A_0 = (1/2) A_1').  Conversions reduce an
arbitrary p = 2 density to that normal form by integration by parts and
complete the operator with its antisymmetric part; the discarded
symmetric part always carries an exact density, which is asserted.

Miura transformations w = F(u) act by K_u = L^{-1} K_w (L^adj)^{-1} with
L the linearization of F, inverted as a formal Neumann series in eps.
Lattice (shift-operator) brackets expand through delta(x - y + s eps) =
sum_j (s eps)^j / j! delta^(j)(x - y) followed by elimination of the
y-point toward x-jets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from pathlib import Path

from .coeff import CoeffExpr
from .algebra import Monomial, ThetaPoly, lex_compare
from .operators import (NotExact, d1_op, d2_op, dlambda_op, exact_witness,
                        is_total_derivative, undo_top_bump,
                        variational_derivative_theta, variational_derivative_u)
from .parsing import ParseError, _Parser, parse_density, render_poly

_U = CoeffExpr.var_u
_EPS = CoeffExpr.var_eps


def _eps_truncate(p: ThetaPoly, order: int) -> ThetaPoly:
    kept = {}
    for mono, coeff in p.terms():
        c = CoeffExpr({k: q for k, q in coeff.terms() if k[3] <= order})
        if not c.is_zero():
            kept[mono] = c
    return ThetaPoly(kept, p.extended)


# -- differential operators ---------------------------------------------------

class DiffOperator:
    """sum_k A_k d^k with differential-polynomial coefficients (p = 0)."""

    def __init__(self, coeffs: dict[int, ThetaPoly] | None = None):
        self.coeffs = {k: c for k, c in (coeffs or {}).items() if not c.is_zero()}

    @staticmethod
    def identity() -> "DiffOperator":
        return DiffOperator({0: ThetaPoly.one()})

    def order(self) -> int:
        return max(self.coeffs, default=-1)

    def coefficient(self, k: int) -> ThetaPoly:
        return self.coeffs.get(k, ThetaPoly.zero())

    def __add__(self, other: "DiffOperator") -> "DiffOperator":
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, ThetaPoly.zero()) + c
        return DiffOperator(out)

    def __neg__(self) -> "DiffOperator":
        return DiffOperator({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other: "DiffOperator") -> "DiffOperator":
        return self + (-other)

    def __mul__(self, other) -> "DiffOperator":
        if isinstance(other, (int, Fraction, CoeffExpr)):
            return DiffOperator({k: c * other for k, c in self.coeffs.items()})
        out: dict[int, ThetaPoly] = {}
        for i, A in self.coeffs.items():
            for j, B in other.coeffs.items():
                # d^i o (B d^j) = sum_m binom(i,m) d^{i-m}(B) d^{m+j}
                derived = B
                for step in range(i + 1):
                    m = i - step
                    out[m + j] = out.get(m + j, ThetaPoly.zero()) \
                        + A * derived * comb(i, m)
                    if step < i:
                        derived = derived.total_derivative()
        return DiffOperator(out)

    __rmul__ = __mul__

    def adjoint(self) -> "DiffOperator":
        """sum_k (-d)^k o A_k, expanded to normal form."""
        out: dict[int, ThetaPoly] = {}
        for k, A in self.coeffs.items():
            derived = A
            for j in range(k, -1, -1):
                sign = 1 if k % 2 == 0 else -1
                out[j] = out.get(j, ThetaPoly.zero()) + derived * (sign * comb(k, j))
                if j > 0:
                    derived = derived.total_derivative()
        return DiffOperator(out)

    def truncate_eps(self, order: int) -> "DiffOperator":
        return DiffOperator({k: _eps_truncate(c, order) for k, c in self.coeffs.items()})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffOperator):
            return NotImplemented
        return (self - other).is_zero()

    def __repr__(self) -> str:
        inner = " + ".join(f"({c.render()})*d^{k}" for k, c in sorted(self.coeffs.items()))
        return f"DiffOperator({inner or '0'})"


# -- delta brackets ------------------------------------------------------------

@dataclass
class DeltaBracket:
    """A bracket, stored through its operator; eps lives in the coefficients.

    Coefficients may carry lambda when the bracket is a pencil member.
    """

    coordinate: str
    op: DiffOperator

    @staticmethod
    def from_terms(coordinate: str, terms, symbols=("g", "c")) -> "DeltaBracket":
        coeffs: dict[int, ThetaPoly] = {}
        for eps, der, coeff in terms:
            if isinstance(coeff, str):
                coeff = parse_density(coeff, symbols, coordinate, allow_theta=False)
            piece = coeff * _EPS(eps) if eps else coeff
            coeffs[der] = coeffs.get(der, ThetaPoly.zero()) + piece
        return DeltaBracket(coordinate, DiffOperator(coeffs))

    def terms(self) -> list[tuple[int, int, ThetaPoly]]:
        out = []
        for der, poly in sorted(self.op.coeffs.items()):
            for e, part in sorted(poly.eps_components().items()):
                out.append((e, der, part))
        out.sort(key=lambda t: (t[0], t[1]))
        return out

    def coefficient(self, eps: int, der: int) -> ThetaPoly:
        return self.op.coefficient(der).eps_coefficient(eps)

    def is_skew(self) -> bool:
        return self.op.adjoint() == -self.op

    def pencil_members(self) -> tuple["DeltaBracket", "DeltaBracket"]:
        """Split a lambda-linear pencil {,}_2 - lambda {,}_1 into its two
        members (first, second)."""
        if any(c.lambda_degree() > 1 for c in self.op.coeffs.values()):
            raise ValueError("a pencil bracket is lambda-linear")
        second = DiffOperator({k: c.lambda_coefficient(0)
                               for k, c in self.op.coeffs.items()})
        first = DiffOperator({k: -c.lambda_coefficient(1)
                              for k, c in self.op.coeffs.items()})
        return (DeltaBracket(self.coordinate, first),
                DeltaBracket(self.coordinate, second))

    def eps_grading_consistent(self) -> bool:
        """deg A_{e,k} + k = 1 + e for brackets deforming a hydrodynamic one."""
        for e, k, part in self.terms():
            for mono, key, _ in part.flat_terms():
                if mono.degree_d() + key[5] + k != 1 + e:
                    return False
        return True

    def to_dict(self) -> dict:
        return {
            "coordinate": self.coordinate,
            "terms": [{"eps": e, "der": k, "coeff": render_poly(part, self.coordinate)}
                      for e, k, part in self.terms()],
        }

    @staticmethod
    def from_dict(data: dict, symbols=("g", "c")) -> "DeltaBracket":
        coordinate = data.get("coordinate", "u")
        terms = [(t["eps"], t["der"], t["coeff"]) for t in data["terms"]]
        return DeltaBracket.from_terms(coordinate, terms, symbols)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @staticmethod
    def load(path, symbols=("g", "c")) -> "DeltaBracket":
        return DeltaBracket.from_dict(json.loads(Path(path).read_text()), symbols)


def _hydro_metric(b: DeltaBracket) -> CoeffExpr:
    """The scalar g of a hydrodynamic leading term g d' + (1/2) g' u1 d."""
    lead = b.op.truncate_eps(0)
    if lead.order() > 1:
        raise ValueError("dispersionless part has derivative order > 1")
    g = lead.coefficient(1).as_coeff()
    expected = ThetaPoly.from_coeff(g).total_derivative() * Fraction(1, 2)
    if lead.coefficient(0) != expected:
        raise ValueError("dispersionless part is not in hydrodynamic form")
    return g


def theta_to_delta(p: ThetaPoly, coordinate: str = "u") -> DeltaBracket:
    """Bracket of a p = 2 density, by reduction to the theta0 theta^k form.

    The operator read off the normal form is completed to its skew part;
    the discarded symmetric part carries an exact density (asserted), so
    the class is preserved.
    """
    for mono in p.monomials():
        if mono.degree_p() != 2:
            raise ValueError("not a bivector")
    work = p
    while True:
        target = None
        for mono, c in work.terms():
            if mono.odds[0] >= 1:
                target = (mono, c)
                break
        if target is None:
            break
        mono, c = target
        i, j = mono.odds
        w = ThetaPoly.monomial(Monomial(mono.evens, (i - 1, j)), c)
        work = work - w.total_derivative()
    coeffs: dict[int, ThetaPoly] = {}
    for mono, c in work.terms():
        k = mono.odds[1]
        piece = ThetaPoly.monomial(Monomial(mono.evens, ()), c)
        coeffs[k] = coeffs.get(k, ThetaPoly.zero()) + piece
    visible = DiffOperator(coeffs)
    skew = (visible - visible.adjoint()) * Fraction(1, 2)
    symmetric = (visible + visible.adjoint()) * Fraction(1, 2)
    residue = ThetaPoly.zero()
    for k, A in symmetric.coeffs.items():
        if k >= 1:
            residue = residue + ThetaPoly.monomial(Monomial((), (0, k))) * A
    if not residue.is_zero():
        ok, _ = is_total_derivative(residue)
        if not ok:
            raise ValueError("skewness violation: symmetric part is not exact")
    return DeltaBracket(coordinate, skew)


def delta_to_theta(b: DeltaBracket) -> ThetaPoly:
    out = ThetaPoly.zero()
    for k, A in b.op.coeffs.items():
        if k >= 1:
            out = out + ThetaPoly.monomial(Monomial((), (0, k))) * A
    return out


def canonical_coordinate(g1: CoeffExpr, g2: CoeffExpr) -> CoeffExpr:
    """The ratio of the two metrics of a hydrodynamic pencil."""
    if g1.is_zero():
        raise ValueError("first metric must be nonzero")
    return g2 / g1


def central_invariant(b1: DeltaBracket, b2: DeltaBracket) -> CoeffExpr:
    """(Q2 - u Q1) / (3 g^2) from the eps^2 delta''' coefficients."""
    g1 = _hydro_metric(b1)
    g2 = _hydro_metric(b2)
    if g2 != _U() * g1:
        raise ValueError("not in canonical coordinate: g2 != u * g1")
    q1 = b1.coefficient(2, 3).as_coeff()
    q2 = b2.coefficient(2, 3).as_coeff()
    return (q2 - _U() * q1) / (g1 * g1 * 3)


# -- Miura transformations ------------------------------------------------------

@dataclass
class MiuraTransform:
    """A change of dependent variable w = u + sum_{e>=1} eps^e F_e(u,...,u^e)."""

    expr: ThetaPoly
    order: int

    def __post_init__(self):
        if self.expr.eps_coefficient(0) != ThetaPoly.from_coeff(_U()):
            raise ValueError("leading term must be the identity")
        for e in range(1, self.expr.eps_degree() + 1):
            part = self.expr.eps_coefficient(e)
            for mono, coeff in part.terms():
                if mono.degree_p():
                    raise ValueError("transform must be even")
                if mono.max_jet() > e:
                    raise ValueError(f"order-{e} term uses jets beyond u^{e}")

    @staticmethod
    def parse(text: str, order: int = 2, symbols=("g", "c")) -> "MiuraTransform":
        return MiuraTransform(parse_density(text, symbols, allow_theta=False), order)

    @staticmethod
    def identity(order: int = 2) -> "MiuraTransform":
        return MiuraTransform(ThetaPoly.from_coeff(_U()), order)

    def delta_part(self) -> ThetaPoly:
        return self.expr - ThetaPoly.from_coeff(_U())

    def linearization(self) -> DiffOperator:
        coeffs = {}
        for s in range(self.expr.max_jet() + 1):
            ds = self.expr.du(s)
            if not ds.is_zero():
                coeffs[s] = ds
        return DiffOperator(coeffs)


def substitute_coordinate(poly: ThetaPoly, f: MiuraTransform, order: int) -> ThetaPoly:
    """Reexpress a p = 0 polynomial in w-jets through u-jets, w = F(u).

    Jets map to total derivatives of F; the coefficient dependence on the
    base variable is Taylor-expanded along F - u (an eps >= 1 series).
    """
    delta = f.delta_part()
    jet_images: list[ThetaPoly] = [f.expr]

    def jet_image(s: int) -> ThetaPoly:
        while len(jet_images) <= s:
            jet_images.append(jet_images[-1].total_derivative())
        return jet_images[s]

    out = ThetaPoly.zero()
    for mono, coeff in poly.terms():
        if mono.degree_p():
            raise ValueError("only p = 0 coefficients transform this way")
        piece = ThetaPoly.from_coeff(coeff)
        if not delta.is_zero():
            taylor = ThetaPoly.from_coeff(coeff)
            power = ThetaPoly.one()
            der = coeff
            for j in range(1, order + 1):
                power = _eps_truncate(power * delta, order)
                der = der.ddu()
                taylor = taylor + power * der * Fraction(1, factorial(j))
            piece = _eps_truncate(taylor, order)
        for s, e in mono.evens:
            img = jet_image(s)
            for _ in range(e):
                piece = _eps_truncate(piece * img, order)
        out = out + piece
    return out


def _neumann_inverse(op: DiffOperator, order: int) -> DiffOperator:
    """(1 + N)^{-1} as a finite eps series; N must have eps degree >= 1."""
    n = op - DiffOperator.identity()
    if not n.truncate_eps(0).is_zero():
        raise ValueError("operator is not a perturbation of the identity")
    acc = DiffOperator.identity()
    power = DiffOperator.identity()
    for k in range(1, order + 1):
        power = (power * n).truncate_eps(order)
        acc = acc + power * ((-1) ** k)
    return acc


def miura_transform(b: DeltaBracket, f: MiuraTransform, order: int,
                    new_coordinate: str = "u") -> DeltaBracket:
    """Push a bracket through w = F(u): K_u = L^{-1} K_w (L^adj)^{-1}."""
    if order > f.order:
        raise ValueError("order overflow: transform data stops at "
                         f"eps^{f.order}")
    mid = DiffOperator({k: substitute_coordinate(c, f, order)
                        for k, c in b.op.coeffs.items()})
    lin = f.linearization().truncate_eps(order)
    linv = _neumann_inverse(lin, order)
    conjugated = (linv * mid * linv.adjoint()).truncate_eps(order)
    out = DeltaBracket(new_coordinate, conjugated)
    if not out.is_skew():
        raise ValueError("transformed bracket lost skewness")
    return out


# -- lattice brackets -------------------------------------------------------------

class LatticeCoeff:
    """Polynomial in the point atoms u(x + a eps), u(y + b eps)."""

    def __init__(self, terms: dict[tuple, Fraction] | None = None):
        self._terms = {k: v for k, v in (terms or {}).items() if v}

    @staticmethod
    def number(q) -> "LatticeCoeff":
        q = Fraction(q)
        return LatticeCoeff({(): q} if q else {})

    @staticmethod
    def atom(side: str, shift: int = 0) -> "LatticeCoeff":
        return LatticeCoeff({(((side, shift), 1),): Fraction(1)})

    def terms(self):
        return iter(self._terms.items())

    def __add__(self, other):
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out.get(k, 0) + v
        return LatticeCoeff(out)

    def __neg__(self):
        return LatticeCoeff({k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out: dict = {}
        for k1, v1 in self._terms.items():
            for k2, v2 in other._terms.items():
                atoms: dict = dict(k1)
                for a, e in k2:
                    atoms[a] = atoms.get(a, 0) + e
                key = tuple(sorted(atoms.items()))
                out[key] = out.get(key, 0) + v1 * v2
        return LatticeCoeff(out)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers of point atoms are not supported")
        out = LatticeCoeff.number(1)
        for _ in range(n):
            out = out * self
        return out

    def __truediv__(self, other):
        if isinstance(other, LatticeCoeff):
            if set(other._terms) != {()}:
                raise ValueError("can only divide by a rational constant")
            other = other._terms[()]
        return LatticeCoeff({k: v / other for k, v in self._terms.items()})

    def __eq__(self, other):
        return isinstance(other, LatticeCoeff) and self._terms == other._terms


class LatticeContext:
    """Parser atoms for lattice coefficients: rationals and point values."""

    def __init__(self, coordinate: str = "u"):
        self.coordinate = coordinate

    def number(self, value: Fraction) -> LatticeCoeff:
        return LatticeCoeff.number(value)

    def name(self, name: str, pos: int) -> LatticeCoeff:
        raise ParseError(f"unknown symbol {name!r} (point atoms are written"
                         f" like {self.coordinate}(x))", pos)

    def call(self, name: str, order: int, parser: _Parser, pos: int) -> LatticeCoeff:
        if name not in (self.coordinate, "u") or order:
            raise ParseError(f"unknown symbol {name!r}", pos)
        side, spos = parser.expect_name()
        if side not in ("x", "y"):
            raise ParseError("point must be x or y", spos)
        kind, val, _ = parser.peek()
        shift = 0
        if kind == "op" and val in "+-":
            parser.next()
            sign = 1 if val == "+" else -1
            kind, tok, tpos = parser.next()
            if kind == "num":
                parser.expect_op("*")
                ename, epos = parser.expect_name()
                if ename != "eps":
                    raise ParseError("expected eps", epos)
                shift = sign * tok
            elif kind == "name" and tok == "eps":
                shift = sign
            else:
                raise ParseError("expected a shift like eps or 2*eps", tpos)
        parser.expect_op(")")
        return LatticeCoeff.atom(side, shift)


def parse_lattice_coeff(text: str, coordinate: str = "u") -> LatticeCoeff:
    return _Parser(text, LatticeContext(coordinate)).parse()


@dataclass
class LatticeBracket:
    """A shift-operator bracket: terms C * delta(x - y + s eps) * eps^p."""

    coordinate: str
    shift_terms: list[tuple[int, int, LatticeCoeff]]   # (shift, eps_power, coeff)

    @staticmethod
    def from_dict(data: dict) -> "LatticeBracket":
        coordinate = data.get("coordinate", "u")
        terms = []
        for t in data["shift_terms"]:
            coeff = t["coeff"]
            if isinstance(coeff, str):
                coeff = parse_lattice_coeff(coeff, coordinate)
            terms.append((t["shift"], t.get("eps_power", 0), coeff))
        return LatticeBracket(coordinate, terms)

    @staticmethod
    def load(path) -> "LatticeBracket":
        return LatticeBracket.from_dict(json.loads(Path(path).read_text()))

    def substitute(self, image: CoeffExpr) -> "LatticeBracket":
        """Replace every point value by a polynomial in it (ring-representable
        coordinate changes only)."""
        powers: dict[int, Fraction] = {}
        for key, q in image.terms():
            rad, u_pow, lam, eps, log, u1p, funcs = key
            if rad != 1 or lam or eps or log or u1p or funcs or u_pow < 0:
                raise ValueError("substitution must be a polynomial in the "
                                 "coordinate")
            powers[u_pow] = q
        out = []
        for shift, ep, coeff in self.shift_terms:
            new = LatticeCoeff.number(0)
            for atoms, q in coeff.terms():
                term = LatticeCoeff.number(q)
                for atom, e in atoms:
                    img = LatticeCoeff.number(0)
                    for k, qq_ in powers.items():
                        img = img + LatticeCoeff.atom(*atom) ** k * LatticeCoeff.number(qq_)
                    term = term * img ** e
                new = new + term
            out.append((shift, ep, new))
        return LatticeBracket(self.coordinate, out)


class _Series:
    """An eps-graded family of eps-free polynomials, truncated at a cap."""

    def __init__(self, data: dict[int, ThetaPoly], cap: int):
        self.cap = cap
        self.data = {m: p for m, p in data.items() if m <= cap and not p.is_zero()}

    @staticmethod
    def one(cap: int) -> "_Series":
        return _Series({0: ThetaPoly.one()}, cap)

    @staticmethod
    def point(shift: int, cap: int) -> "_Series":
        data = {0: ThetaPoly.from_coeff(_U())}
        for m in range(1, cap + 1):
            data[m] = ThetaPoly.jet(m) * Fraction(shift ** m, factorial(m))
        return _Series(data, cap)

    def __mul__(self, other: "_Series") -> "_Series":
        out: dict[int, ThetaPoly] = {}
        for a, p in self.data.items():
            for b, q in other.data.items():
                if a + b > self.cap:
                    continue
                out[a + b] = out.get(a + b, ThetaPoly.zero()) + p * q
        return _Series(out, self.cap)


def expand_lattice_bracket(b: LatticeBracket, order: int = 2,
                           subst: CoeffExpr | None = None) -> DeltaBracket:
    """Expand shifted delta functions into a local eps-series bracket.

    Elimination order is fixed: every shifted point u(x + a eps),
    u(y + a eps) is first Taylor-expanded around its own base point, then
    the y point is eliminated via a(y) delta^(j)(x-y) =
    sum_i binom(j,i) (d^i a)(x) delta^(j-i)(x-y).  Negative eps powers
    must cancel between the shift terms, which is asserted.
    """
    if subst is not None:
        b = b.substitute(subst)
    acc: dict[tuple[int, int], ThetaPoly] = {}
    for shift, ep, coeff in b.shift_terms:
        cap = order - ep
        if cap < 0:
            continue
        for atoms, q in coeff.terms():
            xs = _Series.one(cap)
            ys = _Series.one(cap)
            for (side, ashift), e in atoms:
                for _ in range(e):
                    if side == "x":
                        xs = xs * _Series.point(ashift, cap)
                    else:
                        ys = ys * _Series.point(ashift, cap)
            for mx, xpoly in xs.data.items():
                for my, ypoly in ys.data.items():
                    jcap = cap - mx - my
                    dy = ypoly
                    # precompute total derivatives of the y part
                    ders = [ypoly]
                    for _ in range(jcap):
                        ders.append(ders[-1].total_derivative())
                    for j in range(jcap + 1):
                        factor = Fraction(shift ** j, factorial(j)) * q
                        if factor == 0 and j > 0:
                            continue
                        for i in range(j + 1):
                            e_total = ep + mx + my + j
                            key = (e_total, j - i)
                            piece = xpoly * ders[i] * (factor * comb(j, i))
                            acc[key] = acc.get(key, ThetaPoly.zero()) + piece
    bad = {k: v for k, v in acc.items() if k[0] < 0 and not v.is_zero()}
    if bad:
        raise ValueError(f"negative eps powers did not cancel: {sorted(bad)}")
    coeffs: dict[int, ThetaPoly] = {}
    for (e, k), poly in acc.items():
        if poly.is_zero() or e < 0 or e > order:
            continue
        coeffs[k] = coeffs.get(k, ThetaPoly.zero()) + poly * _EPS(e)
    return DeltaBracket(b.coordinate, DiffOperator(coeffs))


# -- the order-eps^2 deformation ----------------------------------------------

def _tt(k: int) -> ThetaPoly:
    return ThetaPoly.monomial(Monomial((), (0, k)))


def deformation_order2(g: CoeffExpr | None = None,
                       c: CoeffExpr | None = None) -> ThetaPoly:
    """The canonical order-eps^2 deformation of the pencil density
    (u - lambda) g theta0 theta1, with central invariant c."""
    g = CoeffExpr.func("g") if g is None else g
    c = CoeffExpr.func("c") if c is None else c
    gp, cp = g.ddu(), c.ddu()
    gpp = gp.ddu()
    lead = _tt(1) * ((_U() - CoeffExpr.var_lambda()) * g)
    t3 = _tt(3) * (c * g * g * 6)
    t2 = ThetaPoly.jet(1) * _tt(2) * (c * g * gp * 9 + cp * g * g * 6)
    c1 = (-5) * c * gp * gp + cp * g * gp + 4 * c * g * gpp
    t1 = ThetaPoly.jet(1, 2) * _tt(1) * c1 + ThetaPoly.jet(2) * _tt(1) * (c * g * gp * 5)
    return lead + (t3 + t2 + t1) * (_EPS(2) * Fraction(1, 2))


@dataclass
class DeformationCheck:
    """Euler residuals of the pencil differential on the eps^2 density."""

    residual_u: ThetaPoly
    residual_theta: ThetaPoly

    @property
    def ok(self) -> bool:
        return self.residual_u.is_zero() and self.residual_theta.is_zero()


def verify_deformation(g: CoeffExpr | None = None, c: CoeffExpr | None = None,
                       density: ThetaPoly | None = None) -> DeformationCheck:
    """Check the eps^2 density is a cocycle for the pencil differential,
    i.e. both variational derivatives of Dlambda(density) vanish
    identically as lambda polynomials."""
    g = CoeffExpr.func("g") if g is None else g
    if density is None:
        density = deformation_order2(g, c).eps_coefficient(2)
    image = dlambda_op(g).apply(density)
    return DeformationCheck(variational_derivative_u(image),
                            variational_derivative_theta(image))


# -- the logarithmic generator ---------------------------------------------------

class ExtensionAtomsPersist(ValueError):
    """log(u1) or negative u1 powers survived the reduction."""


def _strip_extension(work: ThetaPoly) -> ThetaPoly:
    """Reduce an extended density, modulo exact terms, to a plain one.

    First the log strata are peeled (their cofactors must be exact in the
    Laurent ring, with unique witnesses by degree reasons), then negative
    u1 powers are removed by undoing top-jet bumps, lex-greatest first.
    """
    # log peel, top power first
    while True:
        jmax = max((key[4] for _, key, _ in work.flat_terms()), default=0)
        if jmax == 0:
            break
        stratum: dict = {}
        for mono, key, q in work.flat_terms():
            if key[4] == jmax:
                stripped = key[:4] + (0,) + key[5:]
                prev = stratum.get(mono, CoeffExpr.zero())
                stratum[mono] = prev + CoeffExpr({stripped: q})
        try:
            witness = exact_witness(ThetaPoly(stratum, extended=True))
        except NotExact as exc:
            raise ExtensionAtomsPersist(f"log stratum is not exact: {exc}") from exc
        work = work - (witness * CoeffExpr.log_u1(jmax)).total_derivative()
    # negative u1 powers
    steps = 0
    while True:
        leading = None
        groups: dict = {}
        for mono, key, q in work.flat_terms():
            if key[5] < 0:
                groups.setdefault((mono, key[5]), {})[key] = q
        if not groups:
            break
        for mono, u1p in groups:
            if leading is None or lex_compare(mono, leading[0], u1p, leading[1]) > 0:
                leading = (mono, u1p)
        mono, u1p = leading
        coeff = CoeffExpr(groups[leading])
        try:
            wterm = undo_top_bump(mono, u1p, coeff, extended=True)
        except NotExact as exc:
            raise ExtensionAtomsPersist(f"u1 residue is not reducible: {exc}") from exc
        work = work - wterm.total_derivative()
        steps += 1
        if steps > 10000:
            raise RuntimeError("extension stripping did not terminate")
    return work.to_plain()


# Overall scale relating the stripped generator to the closed-form density;
# derived once by comparing variational derivatives, asserted by the tests.
_DLZ_NORMALIZATION = Fraction(4)


def dlz_generator(g: CoeffExpr | None = None,
                  c: CoeffExpr | None = None) -> ThetaPoly:
    """The eps^2 deformation class generated from logarithmic densities.

    Computes the first-structure image of (second-structure image of
    [c u1 log u1]) minus (first-structure image of [u c u1 log u1]),
    reduces the result modulo exact terms until every log(u1) and
    negative u1 power cancels, and returns the plain density, normalized
    to match the closed-form coefficient convention.
    """
    g = CoeffExpr.func("g") if g is None else g
    c = CoeffExpr.func("c") if c is None else c
    log = CoeffExpr.log_u1()
    rho = ThetaPoly.monomial(Monomial.jet(1), c * log, extended=True)
    sigma = ThetaPoly.monomial(Monomial.jet(1), _U() * c * log, extended=True)
    d1, d2 = d1_op(g), d2_op(g)
    raw = d1.apply(d2.apply(rho) - d1.apply(sigma))
    plain = _strip_extension(raw)
    return plain * _DLZ_NORMALIZATION
