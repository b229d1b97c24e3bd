import itertools
import random
from fractions import Fraction as F

import pytest

from nucad.formulas import (
    And,
    Atom,
    Bottom,
    Constraint,
    Literal,
    Not,
    Or,
    PrenexError,
    Quant,
    Rel,
    Top,
    TruthValue,
    constraints_of,
    evaluate,
    f_and,
    implicant,
    implicant_formula,
    matrix_of,
    prefix_of,
    to_prenex,
)
from nucad.polynomials import VarOrder
from nucad.realroots import SamplePoint


@pytest.fixture
def uni():
    return VarOrder(["x1"])


def atom(poly, rel):
    return Atom(Constraint(poly, rel))


@pytest.fixture
def phi(uni):
    # x1^2 > 0 and (x1 < 2 or x1 > 4)
    x = uni.var(1)
    return And((
        atom(x * x, Rel.GT),
        Or((atom(x - 2, Rel.LT), atom(x - 4, Rel.GT))),
    ))


@pytest.fixture
def phi_prime(xy):
    # (x1 < 0 or x2 <= 4) and (x1 > 2 or x2 > 4)
    x1, x2 = xy.var(1), xy.var(2)
    return And((
        Or((atom(x1, Rel.LT), atom(x2 - 4, Rel.LE))),
        Or((atom(x1 - 2, Rel.GT), atom(x2 - 4, Rel.GT))),
    ))


def test_constraint_normalization(xy):
    x1 = xy.var(1)
    a = Constraint(4 - x1, Rel.GE)
    b = Constraint(x1 - 4, Rel.LE)
    assert a == b


def test_evaluate_reference_facts(phi, phi_prime):
    assert evaluate(phi, SamplePoint([F(1)])) is TruthValue.TRUE
    assert evaluate(phi, SamplePoint([F(3)])) is TruthValue.FALSE
    assert evaluate(phi, SamplePoint([F(0)])) is TruthValue.FALSE
    assert evaluate(phi_prime, SamplePoint([F(1)])) is TruthValue.FALSE


def test_evaluate_undetermined(phi_prime):
    assert evaluate(phi_prime, SamplePoint()) is TruthValue.UNDETERMINED


def test_evaluate_monotone_under_extension(xy):
    rng = random.Random(31)
    x1, x2 = xy.var(1), xy.var(2)
    for _ in range(40):
        f = Or((
            And((atom(x1 - rng.randint(-2, 2), Rel.LT), atom(x2 * x2 - 2, Rel.GT))),
            atom(x1 * x1 - rng.randint(0, 4), Rel.LE),
        ))
        s1 = SamplePoint([F(rng.randint(-3, 3), rng.randint(1, 2))])
        s2 = s1.extended(F(rng.randint(-3, 3), rng.randint(1, 2)))
        v1, v2 = evaluate(f, s1), evaluate(f, s2)
        if v1 is not TruthValue.UNDETERMINED:
            assert v1 is v2


def test_to_prenex_negated_exists(uni):
    x = uni.var(1)
    f = Not(Quant("exists", 1, atom(x, Rel.GT)))
    g = to_prenex(f)
    assert prefix_of(g) == [("forall", 1)]
    assert isinstance(matrix_of(g), Not)


def test_to_prenex_idempotent(uni):
    x = uni.var(1)
    f = Quant("exists", 1, atom(x * x - 2, Rel.LE))
    assert to_prenex(f) == f


def test_to_prenex_pulls_inner_quantifier():
    order = VarOrder(["x1", "x2", "x3"])
    x1, x3 = order.var(1), order.var(3)
    f = Quant("exists", 2, Or((atom(x1, Rel.LT), Quant("forall", 3, atom(x3 * x3, Rel.GE)))))
    g = to_prenex(f)
    assert prefix_of(g) == [("exists", 2), ("forall", 3)]
    # equivalence on a grid: for each x1, both should agree
    for v in (F(-1), F(0), F(1)):
        direct = _brute_decide(f, order, {1: v})
        pren = _brute_decide(g, order, {1: v})
        assert direct == pren


def test_to_prenex_rejects_mixed_use(uni):
    x = uni.var(1)
    f = And((atom(x, Rel.GT), Quant("exists", 1, atom(x, Rel.LT))))
    with pytest.raises(PrenexError):
        to_prenex(f)


def test_to_prenex_renumbers_bound_after_free():
    # exists x1 . (x2 > 0 and x1 < x2): bound var must come after the free one
    order = VarOrder(["x1", "x2"])
    x1, x2 = order.var(1), order.var(2)
    f = Quant("exists", 1, And((atom(x2, Rel.GT), atom(x1 - x2, Rel.LT))))
    g = to_prenex(f)
    assert prefix_of(g) == [("exists", 2)]
    lvls = set()
    for c in constraints_of(matrix_of(g)):
        lvls.update(c.poly.variables())
    assert lvls == {1, 2}


def _brute_decide(f, order, assignment, grid=None):
    """Exhaustive grid evaluation of a quantified formula (test oracle)."""
    from nucad.formulas import Quant as Q
    grid = grid or [F(k, 2) for k in range(-8, 9)]
    if isinstance(f, Q):
        vals = [
            _brute_decide(f.body, order, {**assignment, f.level: v}, grid)
            for v in grid
        ]
        return any(vals) if f.quantifier == "exists" else all(vals)
    if isinstance(f, Atom):
        pt = [assignment.get(l, F(0)) for l in range(1, order.n + 1)]
        return f.constraint.eval_sign(_sgn(f.constraint.poly.eval_rational(pt)))
    if isinstance(f, Not):
        return not _brute_decide(f.arg, order, assignment, grid)
    if isinstance(f, And):
        return all(_brute_decide(a, order, assignment, grid) for a in f.args)
    if isinstance(f, Or):
        return any(_brute_decide(a, order, assignment, grid) for a in f.args)
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    raise TypeError(f)


def _sgn(v):
    return (v > 0) - (v < 0)


def test_implicant_reference_true_case(phi):
    lits, v = implicant(phi, SamplePoint([F(1)]))
    assert v is TruthValue.TRUE
    texts = sorted(str(l.constraint) for l in lits)
    assert texts == ["x1 - 2 < 0", "x1^2 > 0"]
    assert all(l.value for l in lits)


def test_implicant_reference_false_at_zero(phi):
    lits, v = implicant(phi, SamplePoint([F(0)]))
    assert v is TruthValue.FALSE
    assert len(lits) == 1
    (l,) = lits
    assert str(l.constraint) == "x1^2 > 0" and l.value is False


def test_implicant_reference_false_at_three(phi):
    lits, v = implicant(phi, SamplePoint([F(3)]))
    assert v is TruthValue.FALSE
    got = {(str(l.constraint), l.value) for l in lits}
    assert got == {("x1 - 2 < 0", False), ("x1 - 4 > 0", False)}


def test_implicant_phi_prime(phi_prime):
    lits, v = implicant(phi_prime, SamplePoint([F(1)]))
    assert v is TruthValue.FALSE
    got = {(str(l.constraint), l.value) for l in lits}
    assert got == {("x1 < 0", False), ("x1 - 2 > 0", False)}


def test_implicant_support_and_truth_at_sample(phi):
    s = SamplePoint([F(1)])
    lits, v = implicant(phi, s)
    all_keys = {c.key() for c in constraints_of(phi)}
    for l in lits:
        assert l.constraint.key() in all_keys
        assert l.constraint.level <= len(s)
    psi = implicant_formula(lits)
    assert evaluate(psi, s) is TruthValue.TRUE


@pytest.mark.parametrize("sample", [F(1), F(3), F(0)])
def test_implicant_soundness_sampled(phi, sample):
    s = SamplePoint([sample])
    lits, v = implicant(phi, s)
    psi = implicant_formula(lits)
    rng = random.Random(101)
    violations = 0
    for _ in range(10_000):
        r = SamplePoint([F(rng.randint(-600, 600), rng.randint(1, 100))])
        if evaluate(psi, r) is TruthValue.TRUE:
            if evaluate(phi, r) is not v:
                violations += 1
    assert violations == 0


def test_implicant_rejects_undetermined(phi_prime):
    with pytest.raises(ValueError):
        implicant(phi_prime, SamplePoint())


def test_to_prenex_preserves_truth_randomized():
    order = VarOrder(["x1", "x2"])
    x1, x2 = order.var(1), order.var(2)
    rng = random.Random(909)
    grid = [F(k, 2) for k in range(-4, 5)]

    def rand_formula():
        a1 = atom(x1 * rng.randint(1, 3) - rng.randint(-2, 2), Rel.GT)
        a2 = atom(x2 * x2 - rng.randint(0, 4), Rel.LE)
        body = Or((a1, a2)) if rng.random() < 0.5 else And((a1, a2))
        f = Quant("exists" if rng.random() < 0.5 else "forall", 2, body)
        if rng.random() < 0.5:
            f = Not(f)
        return f

    checked = 0
    for _ in range(40):
        f = rand_formula()
        g = to_prenex(f)
        for v in grid:
            want = _brute_decide(f, order, {1: v}, grid)
            got = _brute_decide(g, order, {1: v}, grid)
            assert want == got, f"{f} vs {g} at x1={v}"
            checked += 1
    assert checked == 40 * len(grid)
