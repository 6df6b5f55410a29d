"""Filtration, page differentials, the U/V/W split and the homotopy.

The decreasing filtration of the degree-d slice is by top jet index:
level i collects the elements with max_jet <= d - i.  Page zero of the
induced spectral sequence sits at E0^{p,q} = (degree p+q, jets <= q
modulo jets <= q-1), with the differential d0 displayed below; page one
is spanned, for p >= 1 and q >= 2, by classes f * theta0 theta^q with f
of degree p and jets <= q-1, with differential

    d1(f theta0 theta^q) = (Dlambda(f)|_{lambda=u} + (q-2)/2 g theta1 f)
                           theta0 theta^q

computed modulo jets <= q-2.  Splitting d1 = theta1 U + theta1 V + W with
U diagonal in the half-integer weights makes theta1 U an acyclic piece;
the homological perturbation series

    h = sum_n (-1)^n (U^{-1} V)^n U^{-1} d/dtheta1

terminates because V strictly lowers the lexicographic order, and
contracts d1 away from bidegree (1,2).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .coeff import CoeffExpr
from .algebra import Monomial, ThetaPoly, monomial_basis
from .operators import dlambda_op


class ZeroWeightError(ArithmeticError):
    """U is not invertible on a weight-zero monomial (bidegree (1,2))."""


def _lift(c: CoeffExpr) -> ThetaPoly:
    return ThetaPoly.from_coeff(c)


def _der_pow(c: CoeffExpr, n: int) -> ThetaPoly:
    out = _lift(c)
    for _ in range(n):
        out = out.total_derivative()
    return out


def filtration_level(a: ThetaPoly, d: int) -> int:
    """Largest filtration level containing a degree-d homogeneous element."""
    if a.is_zero():
        return d
    hom = a.is_homogeneous()
    if hom is None or hom[0] != d:
        raise ValueError(f"element is not homogeneous of degree {d}")
    return d - a.max_jet()


@dataclass(frozen=True)
class E1Element:
    """A page-one class f * theta0 theta^q at bidegree (p, q), p >= 1,
    q >= 2, stored through the full representative f (jets <= q-1); the
    quotient by jets <= q-2 is taken by `reduce`, never destructively."""

    p: int
    q: int
    body: ThetaPoly

    def __post_init__(self):
        if self.q < 2 or self.p < 0:
            raise ValueError("page-one classes need p >= 0, q >= 2")
        if self.body.lambda_degree():
            raise ValueError("page-one bodies are lambda-free")
        for mono in self.body.monomials():
            if mono.degree_d() != self.p:
                raise ValueError(f"body term {mono!r} is not of degree {self.p}")
            if mono.has_odd(0) or mono.has_odd(self.q):
                raise ValueError("body must not contain the spectator thetas")
            if mono.max_jet() > self.q - 1:
                raise ValueError(f"body term {mono!r} exceeds jets <= q-1")

    def reduce(self) -> "E1Element":
        """Representative modulo jets <= q-2: keep top-jet-(q-1) terms."""
        kept = {m: c for m, c in self.body.terms() if m.max_jet() == self.q - 1}
        return E1Element(self.p, self.q, ThetaPoly(kept))

    def equal_mod_reduction(self, other: "E1Element") -> bool:
        return (self.p, self.q) == (other.p, other.q) and \
            self.reduce().body == other.reduce().body

    def is_zero(self) -> bool:
        return self.body.is_zero()


def _pencil_scalar(g: CoeffExpr) -> CoeffExpr:
    return (CoeffExpr.var_u() - CoeffExpr.var_lambda()) * g


def d0(a: ThetaPoly, p: int, q: int, g: CoeffExpr | None = None) -> ThetaPoly:
    """Page-zero differential on E0^{p,q}, reduced modulo jets <= q."""
    g = CoeffExpr.func("g") if g is None else g
    if a.is_zero():
        return a
    degrees = {d for d, _p in a.bidegree_components()}
    if degrees != {p + q} or a.max_jet() > q:
        raise ValueError(f"element does not represent a class in E0^({p},{q})")
    A = _pencil_scalar(g)
    half_dA = A.ddu() * Fraction(1, 2)
    xu = ThetaPoly.theta(q + 1) * A + ThetaPoly.monomial(
        Monomial(((q + 1, 1),), (0,)), half_dA)
    xth = ThetaPoly.monomial(Monomial((), (0, q + 1)), half_dA)
    out = xu * a.du(q) + xth * a.dtheta(q)
    kept = {m: c for m, c in out.terms()
            if m.even_exp(q + 1) or m.has_odd(q + 1)}
    return ThetaPoly(kept)


def _project_body(raw: ThetaPoly, q: int) -> ThetaPoly:
    """Drop spectator-killed terms (theta0, theta^q) and the jets-q part."""
    kept = {}
    for m, c in raw.terms():
        if m.has_odd(0) or m.has_odd(q):
            continue
        if m.max_jet() > q - 1:
            continue
        kept[m] = c
    return ThetaPoly(kept)


def d1(x: E1Element, g: CoeffExpr | None = None) -> E1Element:
    """Page-one differential, landing at (p+1, q).

    The page itself lives at p >= 1; evaluating the formula on a p = 0
    body is still meaningful (the homotopy round trip passes through it).
    """
    g = CoeffExpr.func("g") if g is None else g
    raw = dlambda_op(g).apply(x.body).subst_lambda(CoeffExpr.var_u())
    correction = (ThetaPoly.theta(1) * x.body) * (g * Fraction(x.q - 2, 2))
    return E1Element(x.p + 1, x.q, _project_body(raw + correction, x.q))


def _d1_body(m: ThetaPoly, q: int, g: CoeffExpr) -> ThetaPoly:
    raw = dlambda_op(g).apply(m).subst_lambda(CoeffExpr.var_u())
    correction = (ThetaPoly.theta(1) * m) * (g * Fraction(q - 2, 2))
    return _project_body(raw + correction, q)


@dataclass
class UVWSplit:
    """The operators of the decomposition d1 = theta1 U + theta1 V + W."""

    q: int
    g: CoeffExpr

    def eigenvalue(self, mono: Monomial) -> Fraction:
        """U-weight of a body monomial, spectator thetas included."""
        return mono.weight() + Fraction(self.q - 2, 2)

    def u_apply(self, body: ThetaPoly) -> ThetaPoly:
        out = ThetaPoly.zero()
        for mono, c in body.terms():
            out = out + ThetaPoly.monomial(mono, c * self.g * self.eigenvalue(mono))
        return out

    def u_inverse(self, body: ThetaPoly) -> ThetaPoly:
        out = ThetaPoly.zero()
        ginv = self.g.inverse()
        for mono, c in body.terms():
            eig = self.eigenvalue(mono)
            if eig == 0:
                raise ZeroWeightError(f"zero-weight division at {mono!r}")
            out = out + ThetaPoly.monomial(mono, c * ginv / eig)
        return out

    def v_apply(self, body: ThetaPoly) -> ThetaPoly:
        q, g = self.q, self.g
        out = ThetaPoly.zero()
        for s in range(2, q):
            da = body.du(s)
            if da.is_zero():
                continue
            for l in range(1, s):
                coeff = Fraction(s + 2, 2) * comb(s, l)
                piece = _der_pow(g, l) * ThetaPoly.jet(s - l) * da
                out = out + piece * coeff
        dA = _pencil_scalar(g).ddu()
        for s in range(1, q):
            dth = body.dtheta(s)
            if dth.is_zero():
                continue
            for l in range(1, s):      # l = 0 output dies against theta0
                coeff = Fraction(l - 1, 2) * comb(s, l)
                if coeff == 0:
                    continue
                scal = _der_pow(dA, s - l).subst_lambda(CoeffExpr.var_u())
                piece = scal * (ThetaPoly.theta(l) * dth)
                out = out + piece * coeff
        return _project_body(out, q)

    def w_apply(self, body: ThetaPoly) -> ThetaPoly:
        full = _d1_body(body, self.q, self.g)
        th1 = ThetaPoly.theta(1)
        return full - th1 * self.u_apply(body) - th1 * self.v_apply(body)


def split_uvw(q: int, g: CoeffExpr | None = None) -> UVWSplit:
    if q < 2:
        raise ValueError("the split needs q >= 2")
    return UVWSplit(q, CoeffExpr.func("g") if g is None else g)


def homotopy_h(x: E1Element, g: CoeffExpr | None = None) -> E1Element:
    """The perturbation-series contraction, landing at (p-1, q)."""
    g = CoeffExpr.func("g") if g is None else g
    split = UVWSplit(x.q, g)
    cur = split.u_inverse(x.body.dtheta(1))
    acc = cur
    cap = 2 + sum(1 for _ in monomial_basis(max(x.p - 1, 0), max_jet=x.q - 1))
    steps = 0
    while not cur.is_zero():
        steps += 1
        if steps > cap:
            raise RuntimeError("homotopy series exceeded its termination cap")
        cur = -split.u_inverse(split.v_apply(cur))
        acc = acc + cur
    return E1Element(x.p - 1, x.q, _project_body(acc, x.q))


@dataclass(frozen=True)
class LambdaIndependence:
    """Outcome of the lambda-independence classifier."""

    independent: bool
    value: CoeffExpr | None
    plus_recurrence: bool    # t_i' = +(i + 1/2) t_{i+1}
    minus_recurrence: bool   # t_i' = -(i + 1/2) t_{i+1}


def check_lambda_independence(ts: list[CoeffExpr]) -> LambdaIndependence:
    """Decide whether -(u - lambda) t' + t/2 is independent of lambda,
    for t = sum_i t_i (u - lambda)^i, by direct expansion; also report
    which sign of the first-order recurrence the coefficients satisfy."""
    shifted = CoeffExpr.var_u() - CoeffExpr.var_lambda()
    t = CoeffExpr.zero()
    for i, ti in enumerate(ts):
        if ti.lambda_degree():
            raise ValueError("the coefficients t_i must be lambda-free")
        t = t + ti * shifted ** i
    s = -shifted * t.ddu() + t * Fraction(1, 2)
    independent = all(s.lambda_coefficient(k).is_zero()
                      for k in range(1, s.lambda_degree() + 1))
    value = None
    if independent:
        value = s
        expected = (ts[0] if ts else CoeffExpr.zero()) * Fraction(1, 2)
        assert value == expected, "independent result must equal t_0/2"
    plus = minus = True
    for i in range(len(ts)):
        nxt = ts[i + 1] if i + 1 < len(ts) else CoeffExpr.zero()
        lhs = ts[i].ddu()
        rate = nxt * Fraction(2 * i + 1, 2)
        if lhs != rate:
            plus = False
        if lhs != -rate:
            minus = False
    return LambdaIndependence(independent, value, plus, minus)
