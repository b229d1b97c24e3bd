from fractions import Fraction as F

import pytest

from nucad.formulas import And, Atom, Or, Quant, Rel, prefix_of, to_prenex
from nucad.smtlib import (
    ParseError,
    UnsupportedError,
    compile_instance,
    formula_to_sexpr,
    parse,
    poly_to_sexpr,
)

EX2 = """
(set-logic QF_NRA)
(declare-const x1 Real)
(declare-const x2 Real)
(assert (and
  (<= (- (* (- 0.006) (- x1 2) (+ x1 2) (- x1 3) (+ x1 3) (- x1 4) (+ x1 4)) x2) 0)
  (> (- (+ (* (+ x1 2.5) (+ x1 2.5)) (* (- x2 1.5) (- x2 1.5))) 0.25) 0)
  (>= (- (+ (* (- x1 2.5) (- x1 2.5)) (* (- x2 1.5) (- x2 1.5))) 0.25) 0)
  (<= (- x2 2.5) 0)
  (<= x1 0)))
(check-sat)
"""


def test_parse_simple_quantifier_free():
    inst = parse("(declare-const x Real)(assert (> (* x x) 0))(check-sat)")
    assert inst.mode == "sat"
    assert inst.variables == ["x"]
    assert not inst.quantified
    atom = inst.formula
    assert isinstance(atom, Atom)
    assert atom.constraint.rel is Rel.GT


def test_parse_decimals_exactly():
    inst = parse(EX2)
    constraints = []
    f = inst.formula
    for part in f.args:
        constraints.append(part.constraint)
    # 0.006 must become 3/500 exactly: the sextic coefficient scaled integer
    sextic = constraints[0].poly
    assert sextic.degree(1) == 6
    coeffs = {F(3, 500), F(-3, 500)}
    lead = [c for e, c in sextic.terms.items() if e[0] == 6]
    assert lead and (lead[0] in coeffs or lead[0] in {F(3), F(-3)})
    line = constraints[3].poly
    assert line.degree(2) == 1
    vals = sorted(line.terms.values())
    assert F(5, 2) in {abs(v) for v in vals} or F(5) in {abs(v) for v in vals}


def test_parse_exists_binder():
    inst = parse("(declare-const x Real)(assert (exists ((y Real)) (= (* y y) x)))")
    assert inst.bound_variables == ["y"]
    pren = to_prenex(inst.formula)
    assert prefix_of(pren) == [("exists", 2)]
    assert inst.free_variable_names() == ["x"]


def test_parse_round_trip():
    inst = parse(EX2)
    again = parse(inst.to_text())
    assert again.formula == inst.formula
    assert again.variables == inst.variables
    assert again.mode == inst.mode


def test_parse_round_trip_quantified():
    text = "(declare-const x Real)(assert (forall ((y Real)) (> (+ (* y y) 1) x)))(eliminate-quantifiers)"
    inst = parse(text)
    assert inst.mode == "qe"
    again = parse(inst.to_text())
    assert again.formula == inst.formula


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as err:
        parse("(declare-const x Real)\n(assert (> (* x y) 0))")
    assert "2:" in str(err.value)
    with pytest.raises(ParseError):
        parse("(assert (> x 0)")  # unbalanced


def test_parse_rejects_non_real_sorts():
    with pytest.raises(UnsupportedError):
        parse("(declare-const b Bool)(assert b)")


def test_parse_rejects_nonpolynomial_division():
    with pytest.raises(UnsupportedError):
        parse("(declare-const x Real)(assert (> (/ 1 x) 0))")
    # constant division is fine
    inst = parse("(declare-const x Real)(assert (> (/ x 2) 0))")
    assert isinstance(inst.formula, Atom)


def test_parse_rejects_unknown_symbols():
    with pytest.raises(UnsupportedError):
        parse("(declare-const x Real)(assert (> (sin x) 0))")


def test_parse_implication_and_chained_comparison():
    inst = parse(
        "(declare-const x Real)(declare-const y Real)"
        "(assert (=> (< 0 x y) (> y 0)))(check-sat)"
    )
    f = inst.formula
    assert isinstance(f, Or)


def test_compile_input_order_is_declaration_order():
    inst = parse("(declare-const a Real)(declare-const b Real)(assert (> (+ a (* b b b)) 0))")
    pren, order, free = compile_instance(inst, "input")
    assert order.names == ("a", "b")
    assert free == [1, 2]


def test_compile_degree_order_promotes_light_variables():
    inst = parse("(declare-const a Real)(declare-const b Real)(assert (> (+ (* a a a) b) 0))")
    pren, order, free = compile_instance(inst, "degree")
    # b has lower degree sum, so it becomes level 1
    assert order.names == ("b", "a")


def test_poly_sexpr_round_trips_through_parser(xy):
    p = xy.var(1) ** 2 * 3 - xy.var(2) * F(5, 2) + 7
    text = poly_to_sexpr(p, xy)
    inst = parse(
        f"(declare-const x1 Real)(declare-const x2 Real)(assert (= {text} 0))"
    )
    assert inst.formula.constraint.poly == p.primitive()
