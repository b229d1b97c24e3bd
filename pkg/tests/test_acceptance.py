"""Acceptance suite: one test per criterion, at the stated tolerances.

Each test prints a `criterion N PASS` line (visible with `pytest -s` or in
the captured output). Later criteria reuse artifacts produced by earlier
ones via the module-level ARTIFACTS store, so this file is meant to run as a
whole, in order:

    pytest tests/test_acceptance.py -s
"""
import random
import time
from fractions import Fraction as F

import pytest

from nucad.cells import ProjectionSet, construct_cell
from nucad.encoding import (
    collect_stats,
    emit_formula,
    merge_tree,
    sf_evaluate,
    sf_to_text,
    stats_csv,
)
from nucad.formulas import (
    And,
    Atom,
    Constraint,
    Not,
    Or,
    Quant,
    Rel,
    TruthValue,
    evaluate,
    implicant,
    implicant_formula,
    matrix_of,
)
from nucad.polynomials import VarOrder
from nucad.realroots import SamplePoint, sign_at
from nucad.solver import Options, Solver, tree_to_text
from nucad.verify import (
    GridSpec,
    check_decomposition,
    decompositions_equal,
    oracle_1d,
    oracle_quantified,
    tree_locate,
)

ARTIFACTS: dict = {}


def _report(n: int, elapsed: float, limit: float, detail: str):
    line = f"criterion {n} PASS ({elapsed:.2f}s < {limit:.0f}s): {detail}"
    print(line)
    ARTIFACTS.setdefault("report", []).append(line)
    assert elapsed < limit, f"criterion {n} exceeded its runtime limit"


def atom(poly, rel):
    return Atom(Constraint(poly, rel))


@pytest.fixture(scope="module")
def xy():
    return VarOrder(["x1", "x2"])


@pytest.fixture(scope="module")
def ex_curves(xy):
    x1, x2 = xy.var(1), xy.var(2)
    p1 = (x1 * x1 - 4) * (x1 * x1 - 9) * (x1 * x1 - 16) * F(-3, 500) - x2
    p2 = (x1 + F(5, 2)) ** 2 + (x2 - F(3, 2)) ** 2 - F(1, 4)
    p3 = (x1 - F(5, 2)) ** 2 + (x2 - F(3, 2)) ** 2 - F(1, 4)
    p4 = x2 - F(5, 2)
    p5 = x1
    return p1, p2, p3, p4, p5


@pytest.fixture(scope="module")
def phi2(ex_curves):
    p1, p2, p3, p4, p5 = ex_curves
    return And((
        atom(p1, Rel.LE), atom(p2, Rel.GT), atom(p3, Rel.GE),
        atom(p4, Rel.LE), atom(p5, Rel.LE),
    ))


def test_criterion_1_reference_formula_regression():
    t0 = time.perf_counter()
    uni = VarOrder(["x1"])
    x = uni.var(1)
    phi = And((atom(x * x, Rel.GT), Or((atom(x - 2, Rel.LT), atom(x - 4, Rel.GT)))))
    x1, x2 = VarOrder(["x1", "x2"]).var(1), VarOrder(["x1", "x2"]).var(2)
    order2 = x1.order
    phi_p = And((
        Or((atom(x1, Rel.LT), atom(x2 - 4, Rel.LE))),
        Or((atom(x1 - 2, Rel.GT), atom(x2 - 4, Rel.GT))),
    ))
    # the five evaluation facts
    assert evaluate(phi, SamplePoint([F(1)])) is TruthValue.TRUE
    assert evaluate(phi, SamplePoint([F(3)])) is TruthValue.FALSE
    assert evaluate(phi, SamplePoint([F(0)])) is TruthValue.FALSE
    assert evaluate(phi_p, SamplePoint([F(1)])) is TruthValue.FALSE
    # implicant validity via the soundness sampler: 10^4 points, zero violations
    rng = random.Random(11)
    checks = [(phi, F(1)), (phi, F(3)), (phi, F(0)), (phi_p, F(1))]
    for formula, sample in checks:
        lits, v = implicant(formula, SamplePoint([sample]))
        psi = implicant_formula(lits)
        assert evaluate(psi, SamplePoint([sample])) is TruthValue.TRUE
        violations = 0
        for _ in range(10_000):
            r = SamplePoint([F(rng.randint(-640, 640), 128)])
            if evaluate(psi, r) is not TruthValue.TRUE:
                continue
            if evaluate(formula, r) is not v:
                violations += 1
        assert violations == 0
    _report(1, time.perf_counter() - t0, 1.0, "5 facts + 4 implicants, 40000 points")


def test_criterion_2_single_cell(xy):
    t0 = time.perf_counter()
    q1 = F(1, 2) * xy.var(1) + F(1, 2) - xy.var(2)
    q2 = xy.var(1) ** 2 + xy.var(2) ** 2 - 1
    q3 = F(1, 2) * xy.var(1) - F(1, 2) - xy.var(2)
    from nucad.stats import Workspace
    ws = Workspace()
    s = SamplePoint([F(1, 8), F(-3, 4)])
    intervals, _ = construct_cell(ProjectionSet([q1, q2, q3]), s, ws=ws)
    iv2 = intervals[2].interval
    assert iv2.lower is not None and iv2.upper is not None
    assert iv2.lower.poly == q2.primitive() and iv2.lower.index == 1
    assert iv2.upper.poly == q3.primitive() and iv2.upper.index == 1
    assert not iv2.lower_closed and not iv2.upper_closed
    for lvl in (1, 2):
        assert intervals[lvl].contains(s[lvl - 1])
    expected = [sign_at(p, s, ws) for p in (q1, q2, q3)]
    rng = random.Random(29)
    violations = 0
    for _ in range(1000):
        pt = _point_in_cell(intervals, rng, ws)
        got = [sign_at(p, pt, ws) for p in (q1, q2, q3)]
        if got != expected:
            violations += 1
    assert violations == 0
    ARTIFACTS["criterion2_text"] = "; ".join(
        str(intervals[lvl].interval) for lvl in sorted(intervals)
    )
    _report(2, time.perf_counter() - t0, 5.0, "exact bounds + 1000-point invariance")


def _point_in_cell(intervals, rng, ws):
    point = SamplePoint()
    for lvl in sorted(intervals):
        iv = intervals[lvl].interval
        lo = iv.lower.realize(point, ws) if iv.lower else None
        hi = iv.upper.realize(point, ws) if iv.upper else None
        if iv.is_section:
            point = point.extended(lo)
            continue
        from nucad.verify import _random_between
        point = point.extended(_random_between(lo, hi, rng))
    return point


def test_criterion_3_full_decomposition(phi2, xy):
    t0 = time.perf_counter()
    box = [(F(-6), F(6)), (F(-6), F(6))]
    trees = {}
    for mode in ("classic", "improved"):
        solver = Solver(phi2, xy, Options(split=mode))
        tree = solver.decompose(2)
        report = check_decomposition(
            tree, phi2, box, coverage_points=1000, per_leaf_points=100, ws=solver.ws
        )
        assert report.passed, f"{mode}: {report}"
        trees[mode] = (solver, tree)
    # satisfiability with a verified witness
    closure = Quant("exists", 1, Quant("exists", 2, phi2))
    sat_solver = Solver(closure, xy, Options())
    sat, witness = sat_solver.solve()
    assert sat is True and witness is not None
    assert evaluate(phi2, witness, sat_solver.ws) is TruthValue.TRUE
    classic_sections = trees["classic"][0].stats.sections
    improved_sections = trees["improved"][0].stats.sections
    assert classic_sections > improved_sections >= 0
    ARTIFACTS["ex2_trees"] = trees
    ARTIFACTS["ex2_box"] = box
    _report(
        3, time.perf_counter() - t0, 60.0,
        f"both modes verified; sat witness ok; sections {classic_sections} > {improved_sections}",
    )


def test_criterion_4_quantified_decisions(xy):
    t0 = time.perf_counter()
    x1, x2 = xy.var(1), xy.var(2)
    fixed = [
        (Quant("forall", 1, atom(x1 * x1, Rel.GE)), True),
        (Quant("forall", 1, atom(x1 * x1 + 1, Rel.GT)), True),
        (Quant("exists", 1, atom(x1 * x1, Rel.LE)), True),
        (Quant("exists", 1, atom(x1 * x1 + 1, Rel.LE)), False),
        (Quant("forall", 1, Quant("exists", 2, atom(x2 ** 3 - x1, Rel.EQ))), True),
        (Quant("forall", 1, Quant("exists", 2, atom(x2 ** 2 - x1, Rel.EQ))), False),
        (Quant("exists", 1, Quant("forall", 2, atom(x2 * x2 + 1 - x1, Rel.GT))), True),
        (Quant("exists", 1, Quant("forall", 2, atom(x2 * x2 - x1, Rel.GE))), True),
        (Quant("forall", 1, Quant("forall", 2, atom(x1 * x1 + x2 * x2, Rel.GE))), True),
        (Quant("exists", 1, Quant("exists", 2, atom(x1 * x1 + x2 * x2 + 1, Rel.LE))), False),
    ]
    rng = random.Random(2024)
    randomized = []
    attempts = 0
    while len(randomized) < 10 and attempts < 400:
        attempts += 1
        sentence = _random_sentence(xy, rng)
        verdict = oracle_quantified(sentence, GridSpec(values=[F(k, 2) for k in range(-10, 11)]))
        if verdict is None:
            continue
        randomized.append((sentence, verdict))
    assert len(randomized) == 10
    suite = fixed + randomized
    assert len(suite) >= 20
    agree = 0
    for sentence, expected in suite:
        got = Solver(sentence, xy, Options()).decide()
        assert got is expected, f"{sentence}: got {got}, expected {expected}"
        agree += 1
    _report(4, time.perf_counter() - t0, 60.0, f"{agree}/{len(suite)} sentences agree")


def _random_sentence(order, rng):
    x1, x2 = order.var(1), order.var(2)

    def rand_poly(two_vars):
        p = order.const(rng.randint(-3, 3))
        for _ in range(rng.randint(1, 3)):
            e1 = rng.randint(0, 3)
            e2 = rng.randint(0, 3 - e1) if two_vars else 0
            c = rng.randint(-3, 3)
            p = p + c * x1 ** e1 * x2 ** e2
        return p

    two = rng.random() < 0.7
    body = atom(rand_poly(two), rng.choice([Rel.LT, Rel.LE, Rel.GT, Rel.GE, Rel.EQ]))
    if rng.random() < 0.5:
        body = Or((body, atom(rand_poly(two), rng.choice([Rel.LT, Rel.GT]))))
    if two:
        inner = Quant(rng.choice(["exists", "forall"]), 2, body)
        return Quant(rng.choice(["exists", "forall"]), 1, inner)
    return Quant(rng.choice(["exists", "forall"]), 1, body)


def _qe_instances(xy):
    x1, x2 = xy.var(1), xy.var(2)
    return [
        Quant("exists", 2, atom(x1 * x1 + x2 * x2 - 1, Rel.LT)),
        Quant("exists", 2, atom(x2 * x2 - x1, Rel.EQ)),
        Quant("forall", 2, atom(x2 * x2 + x1, Rel.GT)),
        Quant("exists", 2, atom(x1 * x2 - 1, Rel.EQ)),
        Quant("exists", 2, atom((x2 - x1) * (x2 + x1), Rel.LT)),
        Quant("forall", 2, atom(x2 * x2 - x1, Rel.GE)),
        Quant("exists", 2, atom(x2 ** 3 - x1, Rel.EQ)),
        Quant("exists", 2, atom((x2 * x2 - x1) * (x2 - 2), Rel.EQ)),
        Quant("forall", 2, atom(x2 * x2 - x1 * x2 + 1, Rel.GT)),
        Quant("exists", 2, And((atom(x2 - x1, Rel.GT), atom(x2 + x1, Rel.LT)))),
    ]


def test_criterion_5_qe_equivalence(xy):
    t0 = time.perf_counter()
    rng = random.Random(55)
    formulas = []
    trees = []
    for idx, inst in enumerate(_qe_instances(xy)):
        solver = Solver(inst, xy, Options())
        tree = solver.decompose(1)
        merged = merge_tree(tree)
        sf = emit_formula(merged, xy)
        q = inst.quantifier
        violations = 0
        for _ in range(10_000):
            v = F(rng.randint(-640, 640), 160)
            got = sf_evaluate(sf, SamplePoint([v]), solver.ws)
            want = _decide_inner(inst, v, solver.ws)
            if got is not want:
                violations += 1
        assert violations == 0, f"instance {idx}: {sf_to_text(sf)}"
        formulas.append(sf)
        trees.append((solver, tree))
        if idx == 0:
            # the reference instance must come out equivalent to -1 < x1 < 1
            for v in (F(-2), F(-1), F(0), F(1), F(2), F(1, 2)):
                assert sf_evaluate(sf, SamplePoint([v]), solver.ws) is (-1 < v < 1)
    ARTIFACTS["qe_trees"] = trees
    ARTIFACTS["qe_formulas"] = formulas
    _report(5, time.perf_counter() - t0, 120.0, f"{len(formulas)} instances x 10000 points")


def _decide_inner(inst, value, ws):
    """Direct evaluation of a one-block prenex formula at a parameter point."""
    matrix = matrix_of(inst)
    v = evaluate(matrix, SamplePoint([value]), ws)
    if v is not TruthValue.UNDETERMINED:
        return v is TruthValue.TRUE
    dec = oracle_1d(matrix, SamplePoint([value]), ws)
    return any(dec.labels) if inst.quantifier == "exists" else all(dec.labels)


def test_criterion_6_oracle_1d_equivalence():
    t0 = time.perf_counter()
    uni = VarOrder(["x1"])
    x = uni.var(1)
    rng = random.Random(99)
    for _ in range(200):
        f = _random_univariate(x, rng)
        dec = oracle_1d(f)
        solver = Solver(f, uni, Options())
        tree = solver.decompose(1)
        solver_dec = _tree_decomposition(tree, solver)
        assert decompositions_equal(dec, solver_dec), str(f)
    _report(6, time.perf_counter() - t0, 60.0, "200 random formulas, exact equality")


def _random_univariate(x, rng):
    def rand_poly():
        deg = rng.randint(1, 6)
        coeffs = [F(rng.randint(-6, 6)) for _ in range(deg)]
        coeffs.append(F(rng.choice([1, -1, 2, -2])))
        p = x.order.const(0)
        for i, c in enumerate(coeffs):
            p = p + c * x ** i
        return p

    atoms = [atom(rand_poly(), rng.choice(list(Rel))) for _ in range(rng.randint(1, 5))]
    out = atoms[0]
    for a in atoms[1:]:
        out = (And if rng.random() < 0.5 else Or)((out, a))
    if rng.random() < 0.25:
        out = Not(out)
    return out


def _tree_decomposition(tree, solver):
    class _TreeDec:
        boundaries = []

        def label_at(self, value):
            hits = tree_locate(tree, SamplePoint([value]), solver.ws)
            assert len(hits) == 1, f"{len(hits)} cells contain {value}"
            return hits[0][0].value

    from nucad.verify import leaf_cell, _leaf_paths
    from nucad.realroots import compare

    boundaries = []
    for path, _leaf in _leaf_paths(tree):
        for b in (leaf_cell(path)[1].lower, leaf_cell(path)[1].upper):
            if b is None:
                continue
            val = b.realize(SamplePoint(), solver.ws)
            if val is not None and not any(compare(val, s) == 0 for s in boundaries):
                boundaries.append(val)
    dec = _TreeDec()
    dec.boundaries = boundaries
    return dec


def test_criterion_7_merge_and_encoding_fidelity(phi2, xy):
    t0 = time.perf_counter()
    assert "ex2_trees" in ARTIFACTS and "qe_trees" in ARTIFACTS, "run criteria 3 and 5 first"
    rng = random.Random(123)
    checked = 0
    for solver, tree in ARTIFACTS["ex2_trees"].values():
        merged = merge_tree(tree)
        for _ in range(1000):
            pt = SamplePoint([F(rng.randint(-960, 960), 160) for _ in range(2)])
            a = tree_locate(tree, pt, solver.ws)
            b = tree_locate(merged, pt, solver.ws)
            assert len(a) == 1 and len(b) == 1 and a[0][0].value == b[0][0].value
        sf = emit_formula(merged, xy)
        for _ in range(1000):
            pt = SamplePoint([F(rng.randint(-960, 960), 160) for _ in range(2)])
            label = tree_locate(tree, pt, solver.ws)[0][0].value
            assert sf_evaluate(sf, pt, solver.ws) is label
        checked += 1
    for solver, tree in ARTIFACTS["qe_trees"]:
        merged = merge_tree(tree)
        sf = emit_formula(merged, xy)
        for _ in range(1000):
            pt = SamplePoint([F(rng.randint(-640, 640), 160)])
            hits = tree_locate(tree, pt, solver.ws)
            merged_hits = tree_locate(merged, pt, solver.ws)
            assert len(hits) == 1 and len(merged_hits) == 1
            assert hits[0][0].value == merged_hits[0][0].value
            assert sf_evaluate(sf, pt, solver.ws) is hits[0][0].value
        checked += 1
    _report(7, time.perf_counter() - t0, 120.0, f"{checked} trees, 1000 points each")


def test_criterion_8_stats_schema(phi2, xy):
    t0 = time.perf_counter()
    assert "ex2_trees" in ARTIFACTS
    required = {"atoms", "cells", "symbolic_intervals", "sections",
                "real_root_time", "non_algebraic_time"}
    for mode, (solver, tree) in ARTIFACTS["ex2_trees"].items():
        sf = emit_formula(merge_tree(tree), xy)
        stats = collect_stats(solver.stats, sf)
        d = stats.as_dict()
        assert required <= set(d)
        csv = stats_csv(stats)
        assert all(col in csv.splitlines()[0] for col in required)
        assert d["cells"] >= 3 and d["symbolic_intervals"] > 0
    classic = ARTIFACTS["ex2_trees"]["classic"][0].stats.sections
    improved = ARTIFACTS["ex2_trees"]["improved"][0].stats.sections
    assert classic > improved >= 0
    _report(8, time.perf_counter() - t0, 60.0,
            f"all columns present; sections {classic} > {improved} >= 0")


def test_criterion_9_determinism(phi2, xy):
    t0 = time.perf_counter()
    # criterion 2 artifact
    q1 = F(1, 2) * xy.var(1) + F(1, 2) - xy.var(2)
    q2 = xy.var(1) ** 2 + xy.var(2) ** 2 - 1
    q3 = F(1, 2) * xy.var(1) - F(1, 2) - xy.var(2)
    intervals, _ = construct_cell(
        ProjectionSet([q1, q2, q3]), SamplePoint([F(1, 8), F(-3, 4)])
    )
    text2 = "; ".join(str(intervals[lvl].interval) for lvl in sorted(intervals))
    assert text2 == ARTIFACTS["criterion2_text"]
    # criterion 3 trees
    for mode, (old_solver, old_tree) in ARTIFACTS["ex2_trees"].items():
        solver = Solver(phi2, xy, Options(split=mode))
        tree = solver.decompose(2)
        assert tree_to_text(tree) == tree_to_text(old_tree)
        fresh = solver.stats.as_dict()
        previous = old_solver.stats.as_dict()
        for key in ("cells", "symbolic_intervals", "sections"):
            assert fresh[key] == previous[key]
    # criterion 5 formulas
    for inst, old_sf in zip(_qe_instances(xy), ARTIFACTS["qe_formulas"]):
        solver = Solver(inst, xy, Options())
        sf = emit_formula(merge_tree(solver.decompose(1)), xy)
        assert sf_to_text(sf) == sf_to_text(old_sf)
    _report(9, time.perf_counter() - t0, 120.0, "criteria 2/3/5 outputs byte-identical")


def test_criterion_10_parallel_conformance(phi2, xy):
    t0 = time.perf_counter()
    assert "ex2_trees" in ARTIFACTS
    sequential = tree_to_text(ARTIFACTS["ex2_trees"]["improved"][1])
    parallel = Solver(phi2, xy, Options(split="improved", parallel=4))
    assert tree_to_text(parallel.decompose(2)) == sequential
    _report(10, time.perf_counter() - t0, 60.0, "parallel tree equals sequential")


def test_print_summary():
    print()
    for line in ARTIFACTS.get("report", []):
        print(line)
