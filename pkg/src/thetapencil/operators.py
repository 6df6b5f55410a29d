"""Evolutionary operators, variational derivatives and the exactness test.

An evolutionary operator is determined by its characteristics (X_u, X_theta)
and acts through the prolongation

    D = sum_s d^s(X_u) d/du^s  +  sum_s d^s(X_theta) d/dtheta^s

with d the total derivative, d/du^0 acting on coefficients through d/du,
and d/dtheta^s the left graded derivative.  The three operators of the
pencil family all arise from a single scalar A(u, lambda):

    X_u = A theta1 + (1/2) A' u1 theta0,   X_theta = (1/2) A' theta0 theta1

with A = g, A = u g and A = (u - lambda) g respectively.

Exactness (membership in the image of the total derivative) is decided by
the Euler operators sum (-d)^s d/du^s and sum (-d)^s d/dtheta^s; a witness
is reconstructed by undoing, one lexicographically-leading term at a time,
the jet bump that created it.
"""

from __future__ import annotations

from fractions import Fraction

from .coeff import CoeffExpr
from .algebra import Monomial, ThetaPoly, lex_compare


class EvolutionaryOp:
    """A derivation given by characteristics and prolonged by the total
    derivative.  Odd for all operators used here (they raise p by one)."""

    def __init__(self, xu: ThetaPoly, xtheta: ThetaPoly, name: str = ""):
        self.xu = xu
        self.xtheta = xtheta
        self.name = name
        self._xu_ders = [xu]
        self._xtheta_ders = [xtheta]

    def _der(self, cache: list[ThetaPoly], s: int) -> ThetaPoly:
        while len(cache) <= s:
            cache.append(cache[-1].total_derivative())
        return cache[s]

    def apply(self, a: ThetaPoly) -> ThetaPoly:
        top = a.max_jet()
        out = ThetaPoly.zero(a.extended or self.xu.extended)
        for s in range(top + 1):
            da = a.du(s)
            if not da.is_zero():
                out = out + self._der(self._xu_ders, s) * da
            dth = a.dtheta(s)
            if not dth.is_zero():
                out = out + self._der(self._xtheta_ders, s) * dth
        return out

    def __call__(self, a: ThetaPoly) -> ThetaPoly:
        return self.apply(a)

    def __repr__(self) -> str:
        return f"EvolutionaryOp({self.name or self.xu.render()})"


def pencil_operator(a_of_u_lambda: CoeffExpr, name: str = "") -> EvolutionaryOp:
    """The odd operator attached to the scalar A: see the module docstring."""
    A = a_of_u_lambda
    half_dA = A.ddu() * Fraction(1, 2)
    xu = ThetaPoly.theta(1) * A + ThetaPoly.monomial(
        Monomial(((1, 1),), (0,)), half_dA)
    xtheta = ThetaPoly.monomial(Monomial((), (0, 1)), half_dA)
    return EvolutionaryOp(xu, xtheta, name)


def d1_op(g: CoeffExpr | None = None) -> EvolutionaryOp:
    g = CoeffExpr.func("g") if g is None else g
    return pencil_operator(g, "D1")


def d2_op(g: CoeffExpr | None = None) -> EvolutionaryOp:
    g = CoeffExpr.func("g") if g is None else g
    return pencil_operator(CoeffExpr.var_u() * g, "D2")


def dlambda_op(g: CoeffExpr | None = None) -> EvolutionaryOp:
    g = CoeffExpr.func("g") if g is None else g
    lam = CoeffExpr.var_lambda()
    return pencil_operator((CoeffExpr.var_u() - lam) * g, "Dlambda")


# -- variational derivatives -------------------------------------------------

def variational_derivative_u(a: ThetaPoly) -> ThetaPoly:
    out = ThetaPoly.zero(a.extended)
    for s in range(a.max_jet() + 1):
        piece = a.du(s)
        for _ in range(s):
            piece = piece.total_derivative()
        out = out + piece if s % 2 == 0 else out - piece
    return out


def variational_derivative_theta(a: ThetaPoly) -> ThetaPoly:
    out = ThetaPoly.zero(a.extended)
    for s in range(a.max_jet() + 1):
        piece = a.dtheta(s)
        for _ in range(s):
            piece = piece.total_derivative()
        out = out + piece if s % 2 == 0 else out - piece
    return out


# -- exactness ---------------------------------------------------------------

class NotExact(ValueError):
    """The element admits no witness in this ring."""


class IntegrationObstruction(NotExact):
    """A residual f(u) u1 whose coefficient has no ring antiderivative."""


class ConstantObstruction(ValueError):
    """A degree-zero component blocks the exactness question."""


def integrate_in_u(c: CoeffExpr) -> CoeffExpr:
    """An antiderivative of c in the coefficient ring, by a linear ansatz.

    Candidate antiderivative terms are generated from the terms of c by
    raising the u power or lowering one function-derivative order; the
    linear system d/du(sum x_i cand_i) = c is then solved exactly.
    Raises IntegrationObstruction when no combination works (e.g. the
    integrand g(u)c(u), whose antiderivative exists only in the smooth
    closure of the ring).
    """
    if c.is_zero():
        return CoeffExpr.zero()
    candidates: list = []
    seen = set()
    for key, _ in c.terms():
        rad, u_pow, lam, eps, log, u1p, funcs = key
        bump = (rad, u_pow + 1, lam, eps, log, u1p, funcs)
        if bump not in seen:
            seen.add(bump)
            candidates.append(bump)
        for atom, exp in funcs:
            name, order = atom
            if order == 0:
                continue
            lowered = dict(funcs)
            if exp == 1:
                lowered.pop(atom)
            else:
                lowered[atom] = exp - 1
            down = (name, order - 1)
            lowered[down] = lowered.get(down, 0) + 1
            if lowered[down] == 0:
                lowered.pop(down)
            cand = (rad, u_pow, lam, eps, log, u1p, tuple(sorted(lowered.items())))
            if cand not in seen:
                seen.add(cand)
                candidates.append(cand)
    columns = [CoeffExpr({k: Fraction(1)}).ddu() for k in candidates]
    rows: list = []
    row_index: dict = {}
    for col in columns + [c]:
        for key, _ in col.terms():
            if key not in row_index:
                row_index[key] = len(rows)
                rows.append(key)
    n, m = len(rows), len(candidates)
    mat = [[Fraction(0)] * (m + 1) for _ in range(n)]
    for j, col in enumerate(columns):
        for key, q in col.terms():
            mat[row_index[key]][j] = q
    for key, q in c.terms():
        mat[row_index[key]][m] = q
    # Gaussian elimination with exact arithmetic.
    pivot_cols = []
    r = 0
    for j in range(m):
        pivot = next((i for i in range(r, n) if mat[i][j]), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = 1 / mat[r][j]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(n):
            if i != r and mat[i][j]:
                f = mat[i][j]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivot_cols.append(j)
        r += 1
        if r == n:
            break
    for i in range(r, n):
        if mat[i][m]:
            raise IntegrationObstruction(f"no ring antiderivative of {c.render()}")
    solution = [Fraction(0)] * m
    for i, j in enumerate(pivot_cols):
        solution[j] = mat[i][m]
    result = CoeffExpr({k: x for k, x in zip(candidates, solution) if x})
    if result.ddu() != c:
        raise IntegrationObstruction(f"no ring antiderivative of {c.render()}")
    return result


def _leading(a: ThetaPoly):
    """The lex-greatest (monomial, u1 stratum) with its coefficient."""
    groups: dict = {}
    for mono, key, q in a.flat_terms():
        u1p = key[5]
        stripped = key[:5] + (0,) + key[6:]
        groups.setdefault((mono, u1p), {})[stripped] = q
    best = None
    for (mono, u1p) in groups:
        if best is None:
            best = (mono, u1p)
            continue
        cmp = lex_compare(mono, best[0], u1p, best[1])
        if cmp > 0:
            best = (mono, u1p)
    mono, u1p = best
    coeff = CoeffExpr(groups[best])
    if u1p:
        coeff = coeff * CoeffExpr.u1_power(u1p)
    return mono, u1p, coeff


def undo_top_bump(mono: Monomial, u1p: int, coeff: CoeffExpr,
                  extended: bool = False) -> ThetaPoly:
    """The witness term whose total derivative restores coeff * mono as
    its lex-leading term.  u1p is the u1 power held by the coefficient
    (extended mode); the coefficient rides along otherwise.  Raises
    NotExact when the monomial cannot be a leading term of an exact
    element (mixed or nonlinear top factors, blocked undos)."""
    top = mono.max_jet()
    if top == 0 and u1p:
        top = 1
    if top == 0:
        raise NotExact(f"degree-zero residual {mono!r}")
    if mono.has_odd(top):
        if mono.even_exp(top) + (u1p if top == 1 else 0):
            raise NotExact(f"mixed top factors in {mono!r}")
        if mono.has_odd(top - 1):
            raise NotExact(f"blocked theta undo in {mono!r}")
        return ThetaPoly.monomial(mono.replace_odd(top, top - 1), coeff, extended)
    if top >= 2:
        if mono.even_exp(top) != 1:
            raise NotExact(f"nonlinear top jet in {mono!r}")
        if mono.has_odd(top - 1):
            raise NotExact(f"blocked jet undo in {mono!r}")
        mult = (mono.even_exp(1) + u1p + 1) if top == 2 \
            else (mono.even_exp(top - 1) + 1)
        if mult == 0:
            raise IntegrationObstruction("logarithmic jet residue")
        lowered = ThetaPoly.monomial(mono.with_even(top, 0), coeff / mult,
                                     extended)
        return lowered * ThetaPoly.jet(top - 1)
    # top == 1, theta1 absent: only c(u) u1 can be undone, via d/du.
    if mono.even_exp(1) + u1p != 1 or mono.odds:
        raise NotExact(f"terminal residual {coeff.render()} * {mono!r}")
    return ThetaPoly.from_coeff(integrate_in_u(coeff), extended)


def exact_witness(a: ThetaPoly, max_steps: int = 100000) -> ThetaPoly:
    """A witness w with dw = a, for a in the image of the total derivative.

    Greedy: the leading monomial of an exact element always arises from
    bumping the top jet factor of the leading monomial of its (unique,
    degree reasons) witness; undo that bump and iterate.  Raises NotExact
    when a leading term cannot be produced that way.
    """
    witness = ThetaPoly.zero(a.extended)
    steps = 0
    while not a.is_zero():
        steps += 1
        if steps > max_steps:
            raise RuntimeError("witness search did not terminate")
        mono, u1p, coeff = _leading(a)
        wterm = undo_top_bump(mono, u1p, coeff, a.extended)
        witness = witness + wterm
        a = a - wterm.total_derivative()
    return witness


def is_total_derivative(a: ThetaPoly) -> tuple[bool, ThetaPoly | None]:
    """Decide membership in the image of the total derivative.

    Truth is decided by the Euler criterion (valid over smooth functions
    of u); the witness is constructed in the ring when possible.  A d = 0
    component other than zero makes the question ill-posed here.
    """
    for (d, _p), comp in a.bidegree_components().items():
        if d == 0 and not comp.is_zero():
            raise ConstantObstruction("degree-zero term: " + comp.render())
    if not variational_derivative_u(a).is_zero():
        return False, None
    if not variational_derivative_theta(a).is_zero():
        return False, None
    parts = []
    for _dp, comp in sorted(a.bidegree_components().items()):
        try:
            parts.append(exact_witness(comp))
        except IntegrationObstruction:
            return True, None
    witness = ThetaPoly.zero(a.extended)
    for part in parts:
        witness = witness + part
    return True, witness
