"""Post-processing of decomposition trees: merging, solution formulas, stats.

Merging (1) coalesces neighbouring sibling cells that carry the same label
(adjacency is decided at the parent's governing sample: shared endpoint with
complementary closedness) and (2) collapses any subtree whose leaves all
carry one label into that leaf; the result is idempotent and preserves the
pointwise labeling.

The solution formula encodes the TRUE-labeled paths as disjunctions of
interval guards; per subtree, whichever of the direct encoding and the
negated complement encoding has fewer atoms is used. Bounds on the first
variable with rational realized values are rendered as ordinary constraints,
everything else as extended atoms `x ~ root(x, p, j)`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as F
from typing import Sequence

from .cells import IndexedRootExpression, SymbolicInterval
from .formulas import Constraint, Rel
from .polynomials import Polynomial, VarOrder
from .realroots import NULLIFIED, AlgebraicNumber, SamplePoint, compare, roots_at_sample
from .solver import Edge, Leaf, Node, Tree
from .stats import SolveStats, Workspace


# ---------------------------------------------------------------------------
# merging
# ---------------------------------------------------------------------------

def merge_tree(tree: Tree) -> Tree:
    if isinstance(tree, Leaf):
        return Leaf(tree.value)
    edges = [
        Edge(e.interval, e.lo, e.hi, merge_tree(e.child)) for e in tree.edges
    ]
    labels = {e.child.value for e in edges if isinstance(e.child, Leaf)}
    if len(labels) == 1 and all(isinstance(e.child, Leaf) for e in edges):
        return Leaf(labels.pop())
    edges.sort(key=_EdgeKey)
    merged: list[Edge] = [edges[0]]
    for edge in edges[1:]:
        prev = merged[-1]
        if _mergeable(prev, edge):
            interval = SymbolicInterval(
                prev.interval.level,
                prev.interval.lower,
                edge.interval.upper,
                prev.interval.lower_closed,
                edge.interval.upper_closed,
            )
            merged[-1] = Edge(interval, prev.lo, edge.hi, prev.child)
        else:
            merged.append(edge)
    if len(merged) < len(edges):
        labels = {e.child.value for e in merged if isinstance(e.child, Leaf)}
        if len(labels) == 1 and all(isinstance(e.child, Leaf) for e in merged):
            return Leaf(labels.pop())
    return Node(tree.level, merged)


class _EdgeKey:
    """Spatial order of sibling edges at the governing sample."""

    def __init__(self, edge: Edge):
        self.lo = edge.lo if edge.interval.lower is not None else None
        self.closed = edge.interval.lower_closed

    def __lt__(self, other: "_EdgeKey"):
        if self.lo is None:
            return other.lo is not None
        if other.lo is None:
            return False
        c = compare(self.lo, other.lo)
        if c != 0:
            return c < 0
        return self.closed and not other.closed


def _mergeable(a: Edge, b: Edge) -> bool:
    if not (isinstance(a.child, Leaf) and isinstance(b.child, Leaf)):
        return False
    if a.child.value != b.child.value:
        return False
    if a.interval.upper is None or b.interval.lower is None:
        return False
    if a.interval.upper_closed == b.interval.lower_closed:
        return False
    return compare(a.hi, b.lo) == 0


# ---------------------------------------------------------------------------
# solution formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SFTrue:
    def atoms(self):
        return 0

@dataclass(frozen=True)
class SFFalse:
    def atoms(self):
        return 0

@dataclass(frozen=True)
class SFAtom:
    constraint: Constraint

    def atoms(self):
        return 1

@dataclass(frozen=True)
class SFRoot:
    """Extended atom: x_level  rel  root(x_level, poly, index)."""

    level: int
    rel: Rel
    root: IndexedRootExpression

    def atoms(self):
        return 1

@dataclass(frozen=True)
class SFNot:
    arg: "SolutionFormula"

    def atoms(self):
        return self.arg.atoms()

@dataclass(frozen=True)
class SFAnd:
    args: tuple

    def atoms(self):
        return sum(a.atoms() for a in self.args)

@dataclass(frozen=True)
class SFOr:
    args: tuple

    def atoms(self):
        return sum(a.atoms() for a in self.args)


SolutionFormula = SFTrue | SFFalse | SFAtom | SFRoot | SFNot | SFAnd | SFOr


def sf_and(args) -> SolutionFormula:
    flat = []
    for a in args:
        if isinstance(a, SFFalse):
            return SFFalse()
        if isinstance(a, SFTrue):
            continue
        if isinstance(a, SFAnd):
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return SFTrue()
    if len(flat) == 1:
        return flat[0]
    return SFAnd(tuple(flat))


def sf_or(args) -> SolutionFormula:
    flat = []
    for a in args:
        if isinstance(a, SFTrue):
            return SFTrue()
        if isinstance(a, SFFalse):
            continue
        if isinstance(a, SFOr):
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return SFFalse()
    if len(flat) == 1:
        return flat[0]
    return SFOr(tuple(flat))


def sf_not(arg) -> SolutionFormula:
    if isinstance(arg, SFTrue):
        return SFFalse()
    if isinstance(arg, SFFalse):
        return SFTrue()
    if isinstance(arg, SFNot):
        return arg.arg
    return SFNot(arg)


def _bound_atom(edge: Edge, which: str, order: VarOrder) -> SolutionFormula:
    interval = edge.interval
    level = interval.level
    if which == "eq":
        ire, value, rel = interval.lower, edge.lo, Rel.EQ
    elif which == "lower":
        ire, value = interval.lower, edge.lo
        rel = Rel.GE if interval.lower_closed else Rel.GT
    else:
        ire, value = interval.upper, edge.hi
        rel = Rel.LE if interval.upper_closed else Rel.LT
    if ire.poly.level == 1 and value is not None and value.is_rational:
        var = order.var(level)
        return SFAtom(Constraint(var - value.value, rel))
    return SFRoot(level, rel, ire)


def _guard(edge: Edge, order: VarOrder) -> SolutionFormula:
    interval = edge.interval
    if interval.is_section:
        return _bound_atom(edge, "eq", order)
    parts = []
    if interval.lower is not None:
        parts.append(_bound_atom(edge, "lower", order))
    if interval.upper is not None:
        parts.append(_bound_atom(edge, "upper", order))
    return sf_and(parts)


def emit_formula(tree: Tree, order: VarOrder) -> SolutionFormula:
    """Quantifier-free description of the TRUE-labeled region of a merged tree."""
    cache: dict = {}

    def enc(t: Tree, want: bool) -> SolutionFormula:
        if isinstance(t, Leaf):
            return SFTrue() if t.value is want else SFFalse()
        key = (id(t), want)
        hit = cache.get(key)
        if hit is not None:
            return hit
        pos = sf_or(
            sf_and([_guard(e, order), enc(e.child, want)]) for e in t.edges
        )
        neg = sf_not(
            sf_or(sf_and([_guard(e, order), enc(e.child, not want)]) for e in t.edges)
        )
        out = pos if pos.atoms() <= neg.atoms() else neg
        cache[key] = out
        return out

    return enc(tree, True)


def sf_evaluate(sf: SolutionFormula, point, ws: Workspace | None = None) -> bool:
    """Exact truth of a solution formula at a point over the free variables."""
    point = point if isinstance(point, SamplePoint) else SamplePoint(point)
    if isinstance(sf, SFTrue):
        return True
    if isinstance(sf, SFFalse):
        return False
    if isinstance(sf, SFNot):
        return not sf_evaluate(sf.arg, point, ws)
    if isinstance(sf, SFAnd):
        return all(sf_evaluate(a, point, ws) for a in sf.args)
    if isinstance(sf, SFOr):
        return any(sf_evaluate(a, point, ws) for a in sf.args)
    if isinstance(sf, SFAtom):
        from .realroots import sign_at
        return sf.constraint.eval_sign(sign_at(sf.constraint.poly, point, ws))
    if isinstance(sf, SFRoot):
        value = sf.root.realize(point.prefix(sf.level - 1), ws)
        if value is None:
            return False
        return sf.rel.holds(compare(point[sf.level - 1], value))
    raise TypeError(sf)


def sf_to_text(sf: SolutionFormula) -> str:
    if isinstance(sf, SFTrue):
        return "true"
    if isinstance(sf, SFFalse):
        return "false"
    if isinstance(sf, SFNot):
        return f"~{sf_to_text(sf.arg)}"
    if isinstance(sf, SFAnd):
        return "(" + " and ".join(sf_to_text(a) for a in sf.args) + ")"
    if isinstance(sf, SFOr):
        return "(" + " or ".join(sf_to_text(a) for a in sf.args) + ")"
    if isinstance(sf, SFAtom):
        return f"{sf.constraint.poly} {sf.constraint.rel.value} 0"
    if isinstance(sf, SFRoot):
        var = sf.root.poly.order.name_of(sf.level)
        return f"{var} {sf.rel.value} {sf.root}"
    raise TypeError(sf)


def sf_atom_count(sf: SolutionFormula) -> int:
    return sf.atoms()


def sf_to_smtlib(sf: SolutionFormula, order: VarOrder, pure: bool = False) -> str:
    """S-expression rendering of a solution formula.

    Extended atoms print as `(rel x (root x j poly))` by default. With
    `pure`, they are over-approximated in plain SMT-LIB by an existentially
    quantified root witness, dropping the root index:
    (exists ((_rN Real)) (and (= poly[x := _rN] 0) (rel x _rN))).
    """
    from .smtlib import poly_to_sexpr

    counter = [0]

    def render(node) -> str:
        if isinstance(node, SFTrue):
            return "true"
        if isinstance(node, SFFalse):
            return "false"
        if isinstance(node, SFNot):
            return f"(not {render(node.arg)})"
        if isinstance(node, SFAnd):
            return "(and " + " ".join(render(a) for a in node.args) + ")"
        if isinstance(node, SFOr):
            return "(or " + " ".join(render(a) for a in node.args) + ")"
        if isinstance(node, SFAtom):
            c = node.constraint
            if c.rel is Rel.NE:
                return f"(not (= {poly_to_sexpr(c.poly, order)} 0))"
            return f"({c.rel.value} {poly_to_sexpr(c.poly, order)} 0)"
        if isinstance(node, SFRoot):
            var = order.name_of(node.level)
            rel = node.rel.value
            if not pure:
                return (
                    f"({rel} {var} (root {var} {node.root.index} "
                    f"{poly_to_sexpr(node.root.poly, order)}))"
                )
            counter[0] += 1
            witness = f"_r{counter[0]}"
            shifted = _substitute_var(node.root.poly, node.level, witness, order)
            if node.rel is Rel.NE:
                body = f"(not (= {var} {witness}))"
            else:
                body = f"({rel} {var} {witness})"
            return (
                f"(exists (({witness} Real)) (and (= {shifted} 0) {body}))"
            )
        raise TypeError(node)

    return render(sf)


def _substitute_var(poly: Polynomial, level: int, fresh: str, order: VarOrder) -> str:
    from .smtlib import rational_to_sexpr

    parts = []
    i = level - 1
    for exps, c in sorted(poly.terms.items(), reverse=True):
        factors = []
        for k, d in enumerate(exps):
            name = fresh if k == i else order.names[k]
            factors.extend([name] * d)
        if not factors:
            parts.append(rational_to_sexpr(c))
        elif c == 1 and len(factors) == 1:
            parts.append(factors[0])
        else:
            coeff = [] if c == 1 else [rational_to_sexpr(c)]
            parts.append("(* " + " ".join(coeff + factors) + ")")
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


# ---------------------------------------------------------------------------
# statistics reports
# ---------------------------------------------------------------------------

STATS_COLUMNS = [
    "atoms",
    "cells",
    "symbolic_intervals",
    "sections",
    "real_root_time",
    "non_algebraic_time",
    "total_time",
    "aborted",
]


def collect_stats(stats: SolveStats, formula: SolutionFormula | None = None) -> SolveStats:
    """Final report: fills the solution-formula atom count when one exists."""
    if formula is not None:
        stats.atoms = sf_atom_count(formula)
    return stats


def stats_csv(stats: SolveStats) -> str:
    d = stats.as_dict()
    header = ",".join(STATS_COLUMNS)
    row = ",".join(str(d[c]) for c in STATS_COLUMNS)
    return header + "\n" + row + "\n"


def stats_text(stats: SolveStats) -> str:
    d = stats.as_dict()
    width = max(len(c) for c in STATS_COLUMNS)
    return "\n".join(f"{c.rjust(width)}: {d[c]}" for c in STATS_COLUMNS) + "\n"
