"""Independent checking machinery: exact 1D decompositions, grid oracles for
quantified sentences, and sampled verification of decomposition trees.

Everything here is deliberately independent of the solver's code paths: the
1D oracle enumerates roots of all constraint polynomials directly, and the
tree checker tests membership by realizing interval bounds at each queried
point rather than trusting any cached values.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction as F
from typing import Iterable, Sequence

from .cells import RealizedInterval, SymbolicInterval
from .formulas import Formula, TruthValue, constraints_of, evaluate, matrix_of, prefix_of
from .polynomials import VarOrder
from .realroots import (
    NULLIFIED,
    AlgebraicNumber,
    SamplePoint,
    as_algnum,
    compare,
    pick_rational,
    roots_at_sample,
)
from .solver import Edge, Leaf, Node, Tree
from .stats import Workspace


# ---------------------------------------------------------------------------
# exact 1D oracle
# ---------------------------------------------------------------------------

@dataclass
class Decomposition1D:
    """Sign-invariant decomposition of the line with exact truth labels.

    boundaries are strictly increasing; labels has length 2*len(boundaries)+1
    and alternates sector, section, sector, ..."""

    boundaries: list[AlgebraicNumber]
    labels: list[bool]

    def label_at(self, value) -> bool:
        v = as_algnum(value)
        idx = 0
        for b in self.boundaries:
            c = compare(v, b)
            if c < 0:
                return self.labels[idx]
            if c == 0:
                return self.labels[idx + 1]
            idx += 2
        return self.labels[idx]


def oracle_1d(f: Formula, prefix_sample=(), ws: Workspace | None = None) -> Decomposition1D:
    """Exact truth-labeled decomposition of the line for a formula whose only
    unassigned variable is the level just above the prefix sample."""
    ws = ws or Workspace()
    s = prefix_sample if isinstance(prefix_sample, SamplePoint) else SamplePoint(prefix_sample)
    matrix = matrix_of(f)
    level = len(s) + 1
    roots: list[AlgebraicNumber] = []
    for c in constraints_of(matrix):
        if c.level != level:
            continue
        rl = roots_at_sample(c.poly, s, ws)
        if rl is NULLIFIED:
            continue
        for r in rl:
            if not any(compare(r, seen) == 0 for seen in roots):
                roots.append(r)
    roots.sort(key=_Key)
    labels: list[bool] = []
    lo = None
    for b in roots:
        sector_sample = pick_rational(lo, b)
        labels.append(_must(evaluate(matrix, s.extended(sector_sample), ws)))
        labels.append(_must(evaluate(matrix, s.extended(b), ws)))
        lo = b
    labels.append(_must(evaluate(matrix, s.extended(pick_rational(lo, None)), ws)))
    return Decomposition1D(roots, labels)


class _Key:
    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return compare(self.v, other.v) < 0


def _must(v: TruthValue) -> bool:
    if v is TruthValue.UNDETERMINED:
        raise ValueError("evaluation unexpectedly undetermined")
    return v is TruthValue.TRUE


def decompositions_equal(a: Decomposition1D, b: Decomposition1D) -> bool:
    """Pointwise equality of two labeled decompositions of the line."""
    points: list[AlgebraicNumber] = []
    for src in (a.boundaries, b.boundaries):
        for r in src:
            if not any(compare(r, p) == 0 for p in points):
                points.append(r)
    points.sort(key=_Key)
    lo = None
    for p in points:
        probe = as_algnum(pick_rational(lo, p))
        if a.label_at(probe) != b.label_at(probe):
            return False
        if a.label_at(p) != b.label_at(p):
            return False
        lo = p
    probe = as_algnum(pick_rational(lo, None))
    return a.label_at(probe) == b.label_at(probe)


# ---------------------------------------------------------------------------
# grid oracle for quantified sentences
# ---------------------------------------------------------------------------

@dataclass
class GridSpec:
    """Finite evaluation grid: explicit per-level rationals, or a seeded
    pseudo-random sample of the given size per level."""

    values: Sequence[F] = ()
    samples: int = 0
    seed: int = 0

    def points(self) -> list[F]:
        if self.values:
            return [F(v) for v in self.values]
        rng = random.Random(self.seed)
        return [
            F(rng.randint(-48, 48), rng.randint(1, 8)) for _ in range(self.samples)
        ]


def oracle_quantified(f: Formula, grid: GridSpec | None = None, ws: Workspace | None = None):
    """Sound one-sided decision of a prenex sentence over a finite grid.

    Returns True or False when the grid proves it (an existential witness or
    a universal counterexample, with the innermost block decided exactly when
    it is univariate), and None ("unrefuted") otherwise.
    """
    ws = ws or Workspace()
    grid = grid or GridSpec(values=[F(k, 2) for k in range(-12, 13)])
    prefix = prefix_of(f)
    matrix = matrix_of(f)

    def decide(s: SamplePoint, remaining: list) -> bool | None:
        v = evaluate(matrix, s, ws)
        if v is not TruthValue.UNDETERMINED:
            return v is TruthValue.TRUE
        q, lvl = remaining[0]
        if len(remaining) == 1:
            dec = oracle_1d(matrix, s, ws)
            if q == "exists":
                return any(dec.labels)
            return all(dec.labels)
        outcomes = [decide(s.extended(val), remaining[1:]) for val in grid.points()]
        if q == "exists":
            if any(o is True for o in outcomes):
                return True
            return None
        if any(o is False for o in outcomes):
            return False
        return None

    return decide(SamplePoint(), list(prefix))


# ---------------------------------------------------------------------------
# decomposition checking
# ---------------------------------------------------------------------------

def tree_locate(tree: Tree, point, ws: Workspace | None = None):
    """All leaves whose realized cell contains the point (bounds realized at
    the point's own prefix). A correct decomposition yields exactly one."""
    ws = ws or Workspace()
    point = point if isinstance(point, SamplePoint) else SamplePoint(point)
    matches = []

    def member(interval: SymbolicInterval, prefix) -> bool:
        lo = interval.lower.realize(prefix, ws) if interval.lower else None
        hi = interval.upper.realize(prefix, ws) if interval.upper else None
        if (interval.lower is not None and lo is None) or (
            interval.upper is not None and hi is None
        ):
            return False
        return RealizedInterval(interval, lo, hi).contains(point[interval.level - 1])

    def walk(t: Tree, path):
        if isinstance(t, Leaf):
            matches.append((t, path))
            return
        prefix = point.prefix(t.level - 1)
        for edge in t.edges:
            if member(edge.interval, prefix):
                walk(edge.child, path + [edge])

    walk(tree, [])
    return matches


def leaf_cell(path: Sequence[Edge]) -> dict[int, SymbolicInterval]:
    """Innermost interval per level along a root-to-leaf path (later blocks
    refine earlier ones, so the last interval per level bounds the cell)."""
    cell: dict[int, SymbolicInterval] = {}
    for edge in path:
        cell[edge.interval.level] = edge.interval
    return cell


def sample_in_cell(cell: dict[int, SymbolicInterval], rng: random.Random, ws: Workspace) -> SamplePoint | None:
    """A random point inside the realized cell, built level by level."""
    point = SamplePoint()
    for level in sorted(cell):
        interval = cell[level]
        lo = interval.lower.realize(point, ws) if interval.lower else None
        hi = interval.upper.realize(point, ws) if interval.upper else None
        if (interval.lower is not None and lo is None) or (
            interval.upper is not None and hi is None
        ):
            return None
        if interval.is_section:
            point = point.extended(lo)
            continue
        point = point.extended(_random_between(lo, hi, rng))
    return point


def _random_between(lo, hi, rng: random.Random) -> F:
    if lo is None and hi is None:
        return F(rng.randint(-40, 40), rng.randint(1, 8))
    if lo is None:
        b = _rational_inside_upper(hi)
        return b - F(rng.randint(1, 64), rng.randint(1, 8))
    if hi is None:
        a = _rational_inside_lower(lo)
        return a + F(rng.randint(1, 64), rng.randint(1, 8))
    while True:
        a = _rational_inside_lower(lo)
        b = _rational_inside_upper(hi)
        if a < b:
            k = rng.randint(1, 31)
            return a + (b - a) * F(k, 32)
        lo.refine() if not lo.is_rational else None
        hi.refine() if not hi.is_rational else None
        if lo.is_rational and hi.is_rational:
            a, b = lo.value, hi.value
            k = rng.randint(1, 31)
            return a + (b - a) * F(k, 32)


def _rational_inside_lower(v: AlgebraicNumber) -> F:
    if v.is_rational:
        return v.value + F(1, 10 ** 6)
    return v.enclosure()[1]


def _rational_inside_upper(v: AlgebraicNumber) -> F:
    if v.is_rational:
        return v.value - F(1, 10 ** 6)
    return v.enclosure()[0]


@dataclass
class CheckReport:
    coverage_failures: list = field(default_factory=list)
    truth_failures: list = field(default_factory=list)
    points_checked: int = 0
    leaves_checked: int = 0

    @property
    def passed(self) -> bool:
        return not self.coverage_failures and not self.truth_failures

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "points_checked": self.points_checked,
            "leaves_checked": self.leaves_checked,
            "coverage_failures": [str(p) for p in self.coverage_failures[:5]],
            "truth_failures": [str(p) for p in self.truth_failures[:5]],
        }

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}: {self.points_checked} points, {self.leaves_checked} leaves, "
            f"{len(self.coverage_failures)} coverage / {len(self.truth_failures)} truth failures"
        )


def check_decomposition(
    tree: Tree,
    f: Formula,
    box: Sequence[tuple[F, F]],
    coverage_points: int = 1000,
    per_leaf_points: int = 100,
    seed: int = 20_25,
    ws: Workspace | None = None,
) -> CheckReport:
    """Sampled coverage/uniqueness over the box and per-leaf truth-invariance."""
    ws = ws or Workspace()
    matrix = matrix_of(f)
    rng = random.Random(seed)
    report = CheckReport()
    for _ in range(coverage_points):
        point = SamplePoint(
            [F(lo) + (F(hi) - F(lo)) * F(rng.randint(0, 997), 997) for lo, hi in box]
        )
        hits = tree_locate(tree, point, ws)
        report.points_checked += 1
        if len(hits) != 1:
            report.coverage_failures.append((point, len(hits)))
    for path, leaf in _leaf_paths(tree):
        report.leaves_checked += 1
        cell = leaf_cell(path)
        expected = leaf.value
        for _ in range(per_leaf_points):
            point = sample_in_cell(cell, rng, ws)
            if point is None:
                report.coverage_failures.append(("unrealizable cell", cell))
                break
            got = evaluate(matrix, point, ws)
            if got is TruthValue.UNDETERMINED or (got is TruthValue.TRUE) != expected:
                report.truth_failures.append((point, expected, got))
    return report


def _leaf_paths(tree: Tree):
    def walk(t, path):
        if isinstance(t, Leaf):
            yield path, t
            return
        for edge in t.edges:
            yield from walk(edge.child, path + [edge])
    yield from walk(tree, [])
