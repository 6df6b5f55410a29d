import random
from fractions import Fraction

import pytest

from thetapencil.coeff import CoeffExpr, qq, sym
from thetapencil.algebra import (Monomial, ThetaPoly, lex_compare,
                                 monomial_basis, weight)
from thetapencil.parsing import parse_density


def th(s):
    return ThetaPoly.theta(s)


def test_theta_anticommutation():
    assert th(1) * th(0) == -(th(0) * th(1))
    assert (th(2) * th(2)).is_zero()


def test_mixed_product():
    lhs = (ThetaPoly.jet(1) * th(0)) * (th(1) * sym("g"))
    rhs = ThetaPoly.monomial(Monomial(((1, 1),), (0, 1)), sym("g"))
    assert lhs == rhs


def test_total_derivative_chain_rule():
    f = ThetaPoly.from_coeff(sym("f"))
    assert f.total_derivative() == ThetaPoly.jet(1) * sym("f", 1)


def test_total_derivative_on_theta_pair():
    tt1 = th(0) * th(1)
    assert tt1.total_derivative() == th(0) * th(2)


def test_total_derivative_extended_log():
    ext = (ThetaPoly.jet(1) * CoeffExpr.log_u1()).as_extended()
    expected = (ThetaPoly.jet(2) * CoeffExpr.log_u1()
                + ThetaPoly.jet(2)).as_extended()
    assert ext.total_derivative() == expected


def test_total_derivative_extended_negative_power():
    ext = ThetaPoly.from_coeff(CoeffExpr.u1_power(-2), extended=True)
    out = ext.total_derivative()
    expected = ThetaPoly.monomial(Monomial.jet(2),
                                  CoeffExpr.u1_power(-3) * (-2), extended=True)
    assert out == expected


def test_weights():
    assert weight(Monomial((), (0, 1, 2))) == 0          # theta0 theta1 theta2
    assert weight(Monomial.jet(1)) == Fraction(3, 2)
    assert weight(Monomial(((1, 1),), (0, 2))) == Fraction(3, 2)


def test_lex_order_examples():
    assert lex_compare(Monomial.jet(2), Monomial.jet(1, 2)) > 0
    assert lex_compare(Monomial.theta(2), Monomial(((2, 1),), (0,))) > 0
    m = Monomial(((1, 2),), (0,))
    assert lex_compare(m, m) == 0


def test_derivation_property_with_signs():
    rng = random.Random(4)
    pool = [m for d in range(0, 4) for m in monomial_basis(d, max_jet=4)]
    for _ in range(40):
        a = ThetaPoly.monomial(rng.choice(pool), sym("f"))
        b = ThetaPoly.monomial(rng.choice(pool), sym("g"))
        lhs = (a * b).total_derivative()
        rhs = a.total_derivative() * b + a * b.total_derivative()
        assert lhs == rhs


def test_total_derivative_raises_degree_by_one():
    for d in range(0, 5):
        for m in monomial_basis(d, max_jet=5):
            a = ThetaPoly.monomial(m, sym("f"))
            out = a.total_derivative()
            for (dd, pp) in out.bidegree_components():
                assert dd == d + 1
                assert pp == m.degree_p()


def test_super_commutativity():
    rng = random.Random(5)
    pool = [m for d in range(0, 4) for m in monomial_basis(d, max_jet=4)]
    for _ in range(60):
        ma, mb = rng.choice(pool), rng.choice(pool)
        a, b = ThetaPoly.monomial(ma), ThetaPoly.monomial(mb)
        sign = (-1) ** (ma.degree_p() * mb.degree_p())
        assert a * b == (b * a) * sign


def test_associativity():
    rng = random.Random(6)
    pool = [m for d in range(0, 3) for m in monomial_basis(d, max_jet=3)]
    for _ in range(40):
        a, b, c = (ThetaPoly.monomial(rng.choice(pool)) for _ in range(3))
        assert (a * b) * c == a * (b * c)


def test_weight_additive_on_products():
    rng = random.Random(7)
    pool = [m for d in range(0, 4) for m in monomial_basis(d, max_jet=4)]
    for _ in range(60):
        ma, mb = rng.choice(pool), rng.choice(pool)
        prod = ThetaPoly.monomial(ma) * ThetaPoly.monomial(mb)
        for m in prod.monomials():
            assert m.weight() == ma.weight() + mb.weight()


def test_max_jet_and_homogeneous_split():
    a = ThetaPoly.jet(1) * th(2) + ThetaPoly.from_coeff(sym("f")) * th(0)
    assert a.max_jet() == 2
    comps = a.bidegree_components()
    assert set(comps) == {(3, 1), (0, 1)}
    total = ThetaPoly.zero()
    for part in comps.values():
        total = total + part
    assert total == a


def test_extended_mode_guard():
    with pytest.raises(ValueError):
        ThetaPoly.from_coeff(CoeffExpr.log_u1())   # plain mode
    ext = ThetaPoly.from_coeff(CoeffExpr.log_u1(), extended=True)
    with pytest.raises(ValueError):
        ext.to_plain()


def test_extended_u1_folding():
    # u1^2 in the monomial against u1^-1 in the coefficient folds to u1^1
    poly = ThetaPoly.monomial(Monomial.jet(1, 2), CoeffExpr.u1_power(-1),
                              extended=True)
    assert poly == ThetaPoly.jet(1).as_extended()


def test_monomial_basis_counts():
    assert {repr(m) for m in monomial_basis(0)} == {"1", "theta0"}
    d2 = list(monomial_basis(2, max_jet=6))
    assert Monomial.jet(2) in d2 and Monomial.jet(1, 2) in d2
    assert Monomial((), (0, 2)) in d2
    for m in monomial_basis(4, p=2, max_jet=3):
        assert m.degree_p() == 2 and m.degree_d() == 4


def test_parse_density_with_coordinate():
    p = parse_density("1/2*w1 + w*w2", coordinate="w")
    assert p == ThetaPoly.jet(1) * qq(1, 2) + ThetaPoly.jet(2) * CoeffExpr.var_u()
    assert parse_density("ux + uxx") == ThetaPoly.jet(1) + ThetaPoly.jet(2)


def test_render_density_round_trip():
    p = (ThetaPoly.jet(1, 2) * th(0) * th(1) * sym("g")
         - ThetaPoly.jet(2) * qq(5, 3))
    assert parse_density(p.render()) == p
