"""Verification suites behind the CLI commands and the acceptance tests.

Each suite sweeps or samples deterministically (seeded where random),
and returns a Report whose residuals are rendered expressions, never
summaries; a failing check therefore always shows the exact symbolic
obstruction.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .coeff import CoeffExpr
from .algebra import Monomial, ThetaPoly, lex_compare, monomial_basis
from .operators import (EvolutionaryOp, d1_op, d2_op, dlambda_op,
                        is_total_derivative, variational_derivative_theta,
                        variational_derivative_u)
from .spectral import (E1Element, check_lambda_independence, d0, d1,
                       homotopy_h, split_uvw)
from .pencil import (DeltaBracket, central_invariant, deformation_order2,
                     dlz_generator, expand_lattice_bracket, miura_transform,
                     theta_to_delta, verify_deformation, _hydro_metric)
from .fixtures import (camassa_holm_brackets, camassa_holm_expected_u,
                       camassa_holm_transform, canonical_form_eps2,
                       hydrodynamic_bracket, kdv_brackets, volterra_lattice)
from .report import Report

_G = CoeffExpr.func("g")
_U = CoeffExpr.var_u
_LAM = CoeffExpr.var_lambda


def _sweep_identity(slot, pairs, describe):
    """Fill a timed-check slot from (input, residual) pairs."""
    checked = 0
    for item, residual in pairs:
        checked += 1
        if not residual.is_zero():
            slot["passed"] = False
            slot["residual"] = residual.render()
            slot["detail"] = f"first failure at {describe(item)} after {checked} cases"
            return
    slot["passed"] = True
    slot["detail"] = f"{checked} cases"


def verify_operators_report(max_degree: int = 5, max_jet: int = 6,
                            first: EvolutionaryOp | None = None,
                            second: EvolutionaryOp | None = None) -> Report:
    """Nilpotency and compatibility of the structure operators on the
    monomial basis with a generic function coefficient."""
    D1 = first or d1_op()
    D2 = second or d2_op()
    DL = dlambda_op()
    f = CoeffExpr.func("f")
    basis = [ThetaPoly.monomial(m, f)
             for d in range(max_degree + 1)
             for m in monomial_basis(d, max_jet=max_jet)]
    report = Report(f"operator identities (degree <= {max_degree}, jets <= {max_jet})")
    with report.timed("d1_squared") as slot:
        _sweep_identity(slot, ((a, D1(D1(a))) for a in basis), lambda a: a.render())
    with report.timed("d2_squared") as slot:
        _sweep_identity(slot, ((a, D2(D2(a))) for a in basis), lambda a: a.render())
    with report.timed("anticommutator") as slot:
        _sweep_identity(slot, ((a, D1(D2(a)) + D2(D1(a))) for a in basis),
                        lambda a: a.render())
    with report.timed("commutes_with_total_derivative") as slot:
        _sweep_identity(
            slot,
            ((a, DL(a.total_derivative()) - DL(a).total_derivative()) for a in basis),
            lambda a: a.render())
    with report.timed("pencil_linearity") as slot:
        lam = _LAM()
        _sweep_identity(
            slot,
            ((a, D2(a) - DL(a) - d1_op()(a) * lam) for a in basis),
            lambda a: a.render())
    return report


def _random_body(rng: random.Random, p: int, q: int) -> ThetaPoly:
    basis = [m for m in monomial_basis(p, max_jet=q - 1)
             if not m.has_odd(0) and not m.has_odd(q)]
    terms: dict[Monomial, CoeffExpr] = {}
    for _ in range(rng.randint(1, 3)):
        m = rng.choice(basis)
        coeff = CoeffExpr.rational(rng.randint(-4, 4) or 1)
        if rng.random() < 0.5:
            coeff = coeff * CoeffExpr.func("a")
        if rng.random() < 0.3:
            coeff = coeff * _U()
        terms[m] = terms.get(m, CoeffExpr.zero()) + coeff
    return ThetaPoly(terms)


def verify_homotopy_report(p: int, q: int, samples: int = 100,
                           seed: int = 0) -> Report:
    """Contraction identity h d1 + d1 h = id on seeded samples; at the
    surviving bidegree (1,2) the kernel statement is checked instead."""
    report = Report(f"homotopy contraction at (p,q) = ({p},{q})")
    if (p, q) == (1, 2):
        with report.timed("kernel_at_1_2") as slot:
            body = ThetaPoly.from_coeff(CoeffExpr.func("f")) * ThetaPoly.theta(1)
            image = d1(E1Element(1, 2, body))
            slot["passed"] = image.body.is_zero()
            if not slot["passed"]:
                slot["residual"] = image.body.render()
            slot["detail"] = "d1(f(u) theta1 theta0 theta2) = 0; class survives"
        return report
    rng = random.Random(seed)
    with report.timed(f"contraction_p{p}_q{q}") as slot:
        for k in range(samples):
            x = E1Element(p, q, _random_body(rng, p, q))
            both = d1(homotopy_h(x)).body + homotopy_h(d1(x)).body
            if not E1Element(p, q, both).equal_mod_reduction(x):
                slot["passed"] = False
                slot["residual"] = (both - x.body).render()
                slot["detail"] = f"failed at sample {k} of {samples}"
                return report
        slot["passed"] = True
        slot["detail"] = f"{samples} samples, seed {seed}"
    return report


def verify_spectral_report(seed: int = 0, samples: int = 60,
                           lex_samples: int = 500) -> Report:
    """Page-zero and page-one structure: d0^2, the kernel and image
    membership of the displayed families, d1^2 modulo reduction, the
    U/V/W split and the lexicographic descent of V."""
    rng = random.Random(seed)
    report = Report("spectral pages")
    g = _G
    A = (_U() - _LAM()) * g
    half_dA = A.ddu() * Fraction(1, 2)

    def random_elt(degree, max_jet, exclude=()):
        basis = [m for m in monomial_basis(degree, max_jet=max_jet)
                 if not any(m.has_odd(s) for s in exclude)]
        if not basis:
            return ThetaPoly.zero()
        terms: dict = {}
        for _ in range(rng.randint(1, 3)):
            m = rng.choice(basis)
            c = CoeffExpr.rational(rng.randint(-3, 3) or 1) * CoeffExpr.func("a")
            if rng.random() < 0.5:
                c = c * _LAM()
            terms[m] = terms.get(m, CoeffExpr.zero()) + c
        return ThetaPoly(terms)

    with report.timed("d0_squared") as slot:
        count = 0
        for _ in range(samples):
            q = rng.randint(0, 4)
            p = rng.randint(0, 5 - q)
            a = random_elt(p + q, q)
            if a.is_zero():
                continue
            count += 1
            out = d0(d0(a, p, q), p, q + 1)
            if not out.is_zero():
                slot["passed"] = False
                slot["residual"] = out.render()
                return report
        slot["passed"] = True
        slot["detail"] = f"{count} samples, p+q <= 5, seed {seed}"

    with report.timed("kernel_membership") as slot:
        count = 0
        for _ in range(samples):
            q = rng.randint(1, 4)
            p = rng.randint(q, 5)   # member degree p at page column q
            h = random_elt(p - q, q - 1)
            if h.is_zero():
                continue
            count += 1
            tq = ThetaPoly.theta(q)
            member = (tq * A + ThetaPoly.monomial(Monomial(((q, 1),), (0,)), half_dA)) * h \
                + ThetaPoly.monomial(Monomial((), (0, q))) * h
            out = d0(member, p - q, q)
            if not out.is_zero():
                slot["passed"] = False
                slot["residual"] = out.render()
                return report
        slot["passed"] = True
        slot["detail"] = f"{count} samples of the displayed kernel family"

    with report.timed("image_membership") as slot:
        count = 0
        for _ in range(samples):
            q = rng.randint(2, 4)
            p = rng.randint(0, 6 - q)
            h0 = random_elt(p + q - 1, q - 1, exclude=(0,))
            h1 = random_elt(p + q - 1, q - 1, exclude=(0,))
            if h0.is_zero() and h1.is_zero():
                continue
            count += 1
            tq = ThetaPoly.theta(q)
            th0 = ThetaPoly.theta(0)
            im = (tq * A + ThetaPoly.monomial(Monomial(((q, 1),), (0,)), half_dA)) \
                * h0.du(q - 1) \
                + (tq * th0) * (h1.du(q - 1) * A
                                - h0.dtheta(q - 1) * half_dA)
            preimage = h0 + th0 * h1
            out = d0(preimage, p, q - 1)
            if out != im:
                slot["passed"] = False
                slot["residual"] = (out - im).render()
                return report
        slot["passed"] = True
        slot["detail"] = f"{count} samples; preimage constructed explicitly"

    with report.timed("d1_squared_mod_reduction") as slot:
        failures = 0
        count = 0
        for q in range(2, 5):
            for p in range(1, 7 - q):
                for m in monomial_basis(p, max_jet=q - 1):
                    if m.has_odd(0) or m.has_odd(q):
                        continue
                    count += 1
                    x = E1Element(p, q, ThetaPoly.monomial(m, CoeffExpr.func("a")))
                    z = d1(d1(x)).reduce()
                    if not z.body.is_zero():
                        slot["passed"] = False
                        slot["residual"] = z.body.render()
                        return report
        slot["passed"] = True
        slot["detail"] = f"{count} monomials, p+q <= 6"

    with report.timed("uvw_split") as slot:
        count = 0
        for q in range(2, 6):
            split = split_uvw(q)
            for d in range(1, 6):
                for mono in monomial_basis(d, max_jet=q - 1):
                    if mono.has_odd(0) or mono.has_odd(q):
                        continue
                    count += 1
                    body = ThetaPoly.monomial(mono, CoeffExpr.func("a"))
                    w = split.w_apply(body)   # the identity then holds by definition
                    if not mono.has_odd(1) and any(mm.has_odd(1) for mm in w.monomials()):
                        slot["passed"] = False
                        slot["residual"] = w.render()
                        slot["detail"] = f"W produced theta1 from {mono!r} at q={q}"
                        return report
        slot["passed"] = True
        slot["detail"] = f"{count} monomials; remainder is theta1-free off theta1"

    with report.timed("v_lex_descent") as slot:
        count = 0
        while count < lex_samples:
            q = rng.randint(2, 5)
            d = rng.randint(1, 5)
            basis = [m for m in monomial_basis(d, max_jet=q - 1)
                     if not m.has_odd(0) and not m.has_odd(q)]
            if not basis:
                continue
            mono = rng.choice(basis)
            out = split_uvw(q).v_apply(ThetaPoly.monomial(mono))
            count += 1
            for mm in out.monomials():
                if lex_compare(mm, mono) >= 0 or mm.degree_d() != mono.degree_d():
                    slot["passed"] = False
                    slot["residual"] = f"{mm!r} from {mono!r}"
                    return report
        slot["passed"] = True
        slot["detail"] = f"{count} random monomials, seed {seed}"
    return report


def lambda_independence_report() -> Report:
    """The classifier on its three reference inputs, and the sign of the
    recurrence that direct expansion validates."""
    report = Report("lambda-independence classifier")
    one = CoeffExpr.one()
    u = _U()
    cases = [
        ("constant_density", [one], one * Fraction(1, 2)),
        ("linear_density", [u, CoeffExpr.rational(-2)], u * Fraction(1, 2)),
        ("shifted_density", [CoeffExpr.zero(), one], None),
    ]
    minus_everywhere = True
    plus_anywhere = False
    for name, ts, expected in cases:
        with report.timed(name) as slot:
            out = check_lambda_independence(ts)
            if expected is None:
                slot["passed"] = not out.independent and out.value is None
            else:
                slot["passed"] = out.independent and out.value == expected
                if not slot["passed"]:
                    slot["residual"] = out.value.render() if out.value else "none"
            if out.independent:
                minus_everywhere &= out.minus_recurrence
                plus_anywhere |= out.plus_recurrence
    with report.timed("recurrence_sign") as slot:
        # direct expansion validates t_i' = -(i + 1/2) t_{i+1}; the
        # opposite sign is reported for comparison and never holds on a
        # lambda-dependent nontrivial family.
        slot["passed"] = minus_everywhere
        slot["detail"] = ("independent inputs satisfy the minus-sign recurrence"
                          + ("; plus-sign also held (constant input)" if plus_anywhere else ""))
    return report


def verify_deformation_report(g: CoeffExpr | None = None,
                              c: CoeffExpr | None = None) -> Report:
    """The order-eps^2 pencil: cocycle residuals, the negative control,
    the logarithmic generator, and the canonical delta form."""
    g = _G if g is None else g
    c = CoeffExpr.func("c") if c is None else c
    report = Report("order-eps^2 deformation")
    with report.timed("cocycle_residuals") as slot:
        chk = verify_deformation(g, c)
        slot["passed"] = chk.ok
        if not chk.ok:
            slot["residual"] = (chk.residual_u + chk.residual_theta).render()
        slot["detail"] = "both variational derivatives of the pencil image vanish"
    with report.timed("cocycle_negative_control") as slot:
        corrupted = deformation_order2(g, c).eps_coefficient(2) \
            + ThetaPoly.monomial(Monomial((), (0, 3)), c * g * g * Fraction(1, 2))
        chk = verify_deformation(g, c, density=corrupted)
        slot["passed"] = not chk.ok
        slot["detail"] = "theta0 theta3 weight 6 -> 7 must break the cocycle"
    with report.timed("generator_class_equality") as slot:
        gen = dlz_generator(g, c)
        target = deformation_order2(g, c).eps_coefficient(2) * 2
        diff = target - gen
        ok, w = is_total_derivative(diff)
        slot["passed"] = ok and not gen.has_extension_atoms()
        if not ok:
            slot["residual"] = diff.render()
        elif w is not None:
            slot["witness"] = w.render()
        slot["detail"] = "log(u1) and u1-inverse atoms all cancelled"
    blocks = canonical_form_eps2(g, c)
    bracket = theta_to_delta(deformation_order2(g, c))
    with report.timed("delta_form_third_derivative") as slot:
        got = bracket.coefficient(2, 3)
        slot["passed"] = got == blocks["delta3"]
        if not slot["passed"]:
            slot["residual"] = (got - blocks["delta3"]).render()
    with report.timed("delta_form_second_derivative") as slot:
        got = bracket.coefficient(2, 2)
        slot["passed"] = got == blocks["delta2_derived"]
        if not slot["passed"]:
            slot["residual"] = (got - blocks["delta2_derived"]).render()
        printed_matches = got == blocks["delta2_printed"]
        slot["detail"] = ("derived independently: " + got.render()
                          + "; printed variant (u2 in place of u1) "
                          + ("matches" if printed_matches else
                             "is inconsistent with the degree count and is rejected"))
    with report.timed("delta_form_P21") as slot:
        got = bracket.coefficient(2, 1)
        slot["passed"] = got == blocks["P21"]
        if not slot["passed"]:
            slot["residual"] = (got - blocks["P21"]).render()
    with report.timed("delta_form_P20") as slot:
        got = bracket.coefficient(2, 0)
        slot["passed"] = got == blocks["P20"]
        if not slot["passed"]:
            slot["residual"] = (got - blocks["P20"]).render()
    with report.timed("delta_form_skewness") as slot:
        from .pencil import DiffOperator
        variant_coeffs = dict(bracket.op.coeffs)
        eps2 = CoeffExpr.var_eps(2)
        variant_coeffs[2] = bracket.op.coefficient(2) \
            - bracket.coefficient(2, 2) * eps2 + blocks["delta2_printed"] * eps2
        variant = DeltaBracket(bracket.coordinate, DiffOperator(variant_coeffs))
        slot["passed"] = bracket.is_skew() and not variant.is_skew()
        slot["detail"] = ("the completed operator is skew; replacing the "
                          "second-derivative coefficient by the printed u2 "
                          "variant breaks skewness")
    return report


def central_invariant_report(b1: DeltaBracket, b2: DeltaBracket) -> Report:
    report = Report("central invariant")
    with report.timed("skewness_first") as slot:
        slot["passed"] = b1.is_skew()
    with report.timed("skewness_second") as slot:
        slot["passed"] = b2.is_skew()
    with report.timed("central_invariant") as slot:
        value = central_invariant(b1, b2)
        slot["passed"] = True
        slot["detail"] = f"c({b1.coordinate}) = " + value.render()
    return report


def example_report(name: str) -> Report:
    if name == "kdv":
        return _kdv_report()
    if name == "camassa-holm":
        return _camassa_holm_report()
    if name == "volterra":
        return _volterra_report()
    raise ValueError(f"unknown example {name!r}")


def _kdv_report() -> Report:
    report = Report("example: KdV")
    b1, b2 = kdv_brackets()
    with report.timed("central_invariant") as slot:
        value = central_invariant(b1, b2)
        expected = CoeffExpr.rational(1, 24)
        slot["passed"] = value == expected
        slot["detail"] = "c(u) = " + value.render()
        if not slot["passed"]:
            slot["residual"] = (value - expected).render()
    return report


def _camassa_holm_report() -> Report:
    report = Report("example: Camassa-Holm")
    b1, b2 = camassa_holm_brackets()
    f = camassa_holm_transform()
    with report.timed("central_invariant_original") as slot:
        value = central_invariant(b1, b2)
        expected = _U() * Fraction(1, 24)
        slot["passed"] = value == expected
        slot["detail"] = "c(w) = " + value.render("w")
    t1 = miura_transform(b1, f, 2)
    t2 = miura_transform(b2, f, 2)
    e1, e2 = camassa_holm_expected_u()
    with report.timed("miura_first_bracket") as slot:
        slot["passed"] = t1.op == e1.op
        if not slot["passed"]:
            slot["residual"] = repr(t1.op - e1.op)
        slot["detail"] = "delta' exactly; the eps^2 terms cancel"
    with report.timed("miura_second_bracket") as slot:
        slot["passed"] = t2.op == e2.op
        if not slot["passed"]:
            slot["residual"] = repr(t2.op - e2.op)
        slot["detail"] = "canonical eps^2 block reproduced exactly"
    with report.timed("central_invariant_transformed") as slot:
        value = central_invariant(t1, t2)
        expected = _U() * Fraction(1, 24)
        slot["passed"] = value == expected
        slot["detail"] = "c(u) = " + value.render() + " (consistent with c(w) = w/24)"
    return report


def _volterra_report() -> Report:
    report = Report("example: Volterra")
    l1, l2 = volterra_lattice()
    b1 = expand_lattice_bracket(l1, order=2)
    b2 = expand_lattice_bracket(l2, order=2)
    u = _U()
    with report.timed("metric") as slot:
        g1 = _hydro_metric(b1)
        slot["passed"] = g1 == u * u * 2
        slot["detail"] = "g(u) = " + g1.render()
    with report.timed("dispersionless_pencil") as slot:
        lam = _LAM()
        pencil_metric = u * u * u * 2 - lam * u * u * 2
        expected = hydrodynamic_bracket(pencil_metric)
        got = (b2.op - b1.op * lam).truncate_eps(0)
        slot["passed"] = got == expected.op
        slot["detail"] = "metric 2u^3 - 2 lambda u^2"
        if not slot["passed"]:
            slot["residual"] = repr(got - expected.op)
    with report.timed("q_coefficients") as slot:
        q1 = b1.coefficient(2, 3).as_coeff()
        q2 = b2.coefficient(2, 3).as_coeff()
        slot["passed"] = (q1 == u * u * Fraction(1, 3)
                          and q2 == u * u * u * Fraction(5, 6))
        slot["detail"] = f"Q1 = {q1.render()}, Q2 = {q2.render()}"
    with report.timed("central_invariant") as slot:
        value = central_invariant(b1, b2)
        expected = CoeffExpr.rational(1, 24) / u
        slot["passed"] = value == expected
        slot["detail"] = "c(u) = " + value.render()
    return report


def euler_oracle_report(samples: int = 200, seed: int = 0,
                        max_degree: int = 5) -> Report:
    """Round trips through the exactness certificate on random densities."""
    report = Report("exactness oracle")
    rng = random.Random(seed)
    pool = [m for d in range(0, max_degree + 1)
            for m in monomial_basis(d, max_jet=max_degree)]
    with report.timed("witness_round_trips") as slot:
        for k in range(samples):
            terms: dict = {}
            for _ in range(rng.randint(1, 3)):
                m = rng.choice(pool)
                coeff = CoeffExpr.rational(rng.randint(-4, 4) or 2)
                if rng.random() < 0.5:
                    coeff = coeff * CoeffExpr.func("f")
                if rng.random() < 0.3:
                    coeff = coeff * _U()
                terms[m] = terms.get(m, CoeffExpr.zero()) + coeff
            a = ThetaPoly(terms)
            image = a.total_derivative()
            ok, w = is_total_derivative(image)
            if not ok or w is None or w.total_derivative() != image:
                slot["passed"] = False
                slot["residual"] = image.render()
                slot["detail"] = f"failed at sample {k}"
                return report
        slot["passed"] = True
        slot["detail"] = f"{samples} samples, seed {seed}"
    with report.timed("non_exact_rejected") as slot:
        tt1 = ThetaPoly.theta(0) * ThetaPoly.theta(1)
        ok, _ = is_total_derivative(tt1)
        slot["passed"] = not ok
        slot["detail"] = "theta0 theta1 is not a total derivative"
    return report
