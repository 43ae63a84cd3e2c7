"""Parsing, printing, and desugaring of terms and formulas."""

import random
from fractions import Fraction

import pytest

from ipj import generators
from ipj.qeps import QEps
from ipj.syntax import (
    OMEGA,
    App,
    Atom,
    Bang,
    Box,
    Const,
    EAnd,
    ENot,
    Epistemic,
    FAnd,
    FNot,
    Just,
    ParseError,
    ProbApprox,
    ProbGeq,
    Proto,
    RangeError,
    Sum,
    SymThresh,
    Var,
    dest_fimp,
    fimp,
    fnot,
    formula_has_param,
    instantiate_param,
    parse_eformula,
    parse_formula,
    parse_term,
    print_eformula,
    print_formula,
    print_term,
)


def q(x) -> QEps:
    return QEps.from_rational(Fraction(x))


# -- terms ---------------------------------------------------------------------


def test_term_parsing_and_precedence():
    assert parse_term("x") == Var("x")
    assert parse_term("c:a") == Const("a")
    assert parse_term("!x * y + z") == Sum(App(Bang(Var("x")), Var("y")), Var("z"))
    assert parse_term("!(x + y)") == Bang(Sum(Var("x"), Var("y")))
    assert parse_term("f[3](t)") == Proto(3, Var("t"))
    assert parse_term("f[w](s + t)") == Proto(OMEGA, Sum(Var("s"), Var("t")))


def test_term_roundtrip_examples():
    for text in ("x * y * z", "x + y + z", "!!x", "f[w](!t * c:a)"):
        assert print_term(parse_term(text)) == text


def test_reserved_names_rejected():
    for bad in ("box", "f", "P", "V"):
        with pytest.raises(ParseError):
            parse_term(bad)


# -- formulas ------------------------------------------------------------------


def test_probability_operator_desugaring():
    assert parse_formula("Pr<= 1/2 (p)") == ProbGeq(q("1/2"), ENot(Atom("p")))
    assert parse_formula("Pr< 1/2 (p)") == FNot(ProbGeq(q("1/2"), Atom("p")))
    assert parse_formula("Pr> 1/2 (p)") == FNot(ProbGeq(q("1/2"), ENot(Atom("p"))))
    assert parse_formula("Pr= 1/3 (p)") == FAnd(
        ProbGeq(q("2/3"), ENot(Atom("p"))), ProbGeq(q("1/3"), Atom("p"))
    )
    assert parse_formula("Pr~ 1 (p)") == ProbApprox(Fraction(1), Atom("p"))


def test_epistemic_connectives_merge():
    # boolean structure over purely epistemic parts stays epistemic
    assert parse_formula("~p") == Epistemic(ENot(Atom("p")))
    assert parse_formula("p & q") == Epistemic(EAnd(Atom("p"), Atom("q")))
    f = parse_formula("p -> q")
    assert isinstance(f, Epistemic)
    # but probability formulas force the outer layer
    g = parse_formula("p -> Pr>= 1/2 (q)")
    assert isinstance(g, FNot)
    assert dest_fimp(g) == (Epistemic(Atom("p")), ProbGeq(q("1/2"), Atom("q")))


def test_justification_and_box():
    f = parse_formula("f[w](t) :[V] box[P] p")
    assert f == Epistemic(Just(Proto(OMEGA, Var("t")), "V", Box("P", Atom("p"))))
    g = parse_formula("(x + y) :[P] (p -> q)")
    assert g == Epistemic(
        Just(Sum(Var("x"), Var("y")), "P", ENot(EAnd(Atom("p"), ENot(Atom("q")))))
    )


def test_probability_inside_epistemic_rejected():
    with pytest.raises(ParseError):
        parse_formula("t :[P] Pr>= 1/2 (p)")
    with pytest.raises(ParseError):
        parse_formula("box[V] (Pr~ 1 (p))")


def test_threshold_range_errors():
    for bad in ("Pr>= 3/2 (p)", "Pr<= -1/2 (p)", "Pr~ 2 (p)"):
        with pytest.raises(RangeError):
            parse_formula(bad)


def test_infinitesimal_thresholds():
    f = parse_formula("Pr>= 1 + -1 e (p)")
    assert isinstance(f, ProbGeq)
    assert f.threshold == QEps.from_monomials([(Fraction(1), 0), (Fraction(-1), 1)])
    assert print_formula(f) == "Pr>= 1 + -1 e (p)"


def test_symbolic_thresholds():
    f = parse_formula("Pr>= 1 + -1/v (p)")
    assert f == ProbGeq(SymThresh(Fraction(1), Fraction(-1), 1), Atom("p"))
    assert formula_has_param(f)
    assert instantiate_param(f, 2) == ProbGeq(q("1/2"), Atom("p"))
    g = parse_formula("Pr= v (p)")
    assert formula_has_param(g)
    with pytest.raises(ParseError):
        parse_formula("Pr>= 1 + -1/v (p)", allow_symbolic=False)


def test_symbolic_roundtrip():
    for text in ("Pr>= 1 + -1/v (p)", "Pr>= 1/v^2 (p)", "Pr= v (p)"):
        f = parse_formula(text)
        assert parse_formula(print_formula(f)) == f


def test_implication_utilities():
    a, b = Epistemic(Atom("p")), ProbGeq(q("1/2"), Atom("q"))
    assert dest_fimp(fimp(a, b)) == (a, b)
    assert dest_fimp(fimp(a, Epistemic(Atom("q")))) == (a, Epistemic(Atom("q")))
    assert fnot(fnot(a)) != a  # double negation is not collapsed


def test_parse_error_positions():
    with pytest.raises(ParseError) as exc:
        parse_formula("p &")
    assert exc.value.line == 1


def test_random_roundtrip_sample():
    rng = random.Random(11)
    for _ in range(300):
        f = generators.rand_formula(rng)
        text = print_formula(f)
        assert parse_formula(text) == f, text


def test_eformula_roundtrip_sample():
    rng = random.Random(12)
    for _ in range(300):
        e = generators.rand_eformula(rng)
        assert parse_eformula(print_eformula(e)) == e
