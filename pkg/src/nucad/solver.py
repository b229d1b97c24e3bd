"""Truth-invariant non-uniform decompositions and the recursion over
quantifier blocks.

A region (tuple of symbolic intervals for consecutive levels) is explored by
sampling a point, generalizing the sample to a truth-invariant cell via the
implicant and the single-cell construction, and splitting the rest of the
region into locally cylindrical pieces that are explored FIFO. Classic
splitting cuts each level into sector / boundary section / sector; improved
splitting absorbs boundary sections into half-closed sectors, flagging the
region-bound polynomials as weak so the cell construction may emit closed
bounds.

Splits compare realized bound values (not expressions), so pieces that would
be empty are never emitted; sampling still rejects an empty region
defensively and the caller omits it.
"""
from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction as F
from typing import Callable, Iterable, Sequence

from .cells import (
    IndexedRootExpression,
    NullificationFailure,
    ProjectionSet,
    RealizedInterval,
    SymbolicInterval,
    choose_interval,
    compute_cell_projection,
    construct_cell,
)
from .formulas import (
    Formula,
    TruthValue,
    evaluate,
    implicant,
    matrix_of,
    prefix_of,
)
from .polynomials import VarOrder
from .realroots import AlgebraicNumber, SamplePoint, as_algnum, compare, pick_rational
from .stats import SolveStats, Workspace


class Aborted(Exception):
    """Resource budget exhausted; carries the partial statistics."""

    def __init__(self, reason: str, stats: SolveStats):
        super().__init__(reason)
        self.reason = reason
        self.stats = stats
        stats.aborted = True


# ---------------------------------------------------------------------------
# tree
# ---------------------------------------------------------------------------

@dataclass
class Leaf:
    value: bool


@dataclass
class Edge:
    interval: SymbolicInterval
    lo: AlgebraicNumber | None
    hi: AlgebraicNumber | None
    child: "Node | Leaf"


@dataclass
class Node:
    level: int
    edges: list[Edge] = field(default_factory=list)


Tree = Node | Leaf


def insert_path(tree: Node, path: Sequence[tuple], terminal: Tree) -> Node:
    """Append the path (interval, lo, hi per level) leading to `terminal`.

    Shared prefixes reuse existing edges; siblings keep insertion order.
    Rejects paths that violate the level discipline.
    """
    node = tree
    for k, (interval, lo, hi) in enumerate(path):
        if interval.level != node.level:
            raise ValueError(
                f"level discipline violated: interval of level {interval.level} "
                f"at node of level {node.level}"
            )
        last = k == len(path) - 1
        match = None
        for edge in node.edges:
            if edge.interval == interval:
                match = edge
                break
        if match is None:
            if last:
                child = terminal
            else:
                child = Node(level=node.level + 1)
            node.edges.append(Edge(interval, lo, hi, child))
            if last:
                _check_terminal(tree, child)
                return tree
            node = child
        else:
            if last:
                raise ValueError("duplicate path insertion")
            if isinstance(match.child, Leaf):
                raise ValueError("path descends through a leaf")
            node = match.child
    return tree


def _check_terminal(root: Node, terminal: Tree):
    if isinstance(terminal, Node) and terminal.level != root.level:
        raise ValueError(
            f"subtree of level {terminal.level} attached under a block of level {root.level}"
        )


def tree_leaves(tree: Tree):
    """Yield (path intervals, leaf) over the whole tree (paths include resets)."""
    def walk(t, path):
        if isinstance(t, Leaf):
            yield path, t
            return
        for edge in t.edges:
            yield from walk(edge.child, path + [edge])
    yield from walk(tree, [])


def tree_to_text(tree: Tree, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(tree, Leaf):
        return f"{pad}{'TRUE' if tree.value else 'FALSE'}\n"
    out = ""
    for edge in tree.edges:
        out += f"{pad}{edge.interval}\n"
        out += tree_to_text(edge.child, indent + 1)
    return out


def tree_to_obj(tree: Tree):
    if isinstance(tree, Leaf):
        return {"leaf": tree.value}
    return {
        "level": tree.level,
        "children": [
            {"interval": str(e.interval), "child": tree_to_obj(e.child)}
            for e in tree.edges
        ],
    }


# ---------------------------------------------------------------------------
# region splitting
# ---------------------------------------------------------------------------

@dataclass
class PendingRegion:
    """An unexplored locally cylindrical region plus its realized bounds at
    the sample of the call that created it."""

    intervals: tuple[SymbolicInterval, ...]
    realized: tuple[RealizedInterval, ...]

    @property
    def sections(self) -> int:
        return sum(1 for iv in self.intervals if iv.is_section)


def _cmp_lower(a: AlgebraicNumber | None, b: AlgebraicNumber | None) -> int:
    if a is None and b is None:
        return 0
    if a is None:
        return -1
    if b is None:
        return 1
    return compare(a, b)


def _cmp_upper(a: AlgebraicNumber | None, b: AlgebraicNumber | None) -> int:
    if a is None and b is None:
        return 0
    if a is None:
        return 1
    if b is None:
        return -1
    return compare(a, b)


def _piece(outer, inner, k, interval, lo, hi) -> PendingRegion:
    """Region agreeing with the generated cell below level k, with `interval`
    at level k, and with the outer region above."""
    intervals = tuple(
        [ri.interval for ri in inner[:k]] + [interval] + [ri.interval for ri in outer[k + 1:]]
    )
    realized = tuple(
        list(inner[:k]) + [RealizedInterval(interval, lo, hi)] + list(outer[k + 1:])
    )
    return PendingRegion(intervals, realized)


def split_region(outer: Sequence[RealizedInterval], inner: Sequence[RealizedInterval]) -> list[PendingRegion]:
    """Classic splitting: per level, sector below, boundary section, sector
    above; lower levels take the generated cell's intervals, higher levels
    the outer region's. Pieces with empty realized extent are omitted."""
    pieces: list[PendingRegion] = []
    for k, (out_ri, in_ri) in enumerate(zip(outer, inner)):
        level = out_ri.interval.level
        out_iv, in_iv = out_ri.interval, in_ri.interval
        c = _cmp_lower(out_ri.lo, in_ri.lo)
        if c < 0:
            sector = SymbolicInterval(level, out_iv.lower, in_iv.lower)
            pieces.append(_piece(outer, inner, k, sector, out_ri.lo, in_ri.lo))
            if not in_iv.is_section:
                section = SymbolicInterval(level, in_iv.lower, in_iv.lower, True, True)
                pieces.append(_piece(outer, inner, k, section, in_ri.lo, in_ri.lo))
        elif c == 0 and out_iv.lower_closed and not in_iv.lower_closed:
            section = SymbolicInterval(level, in_iv.lower, in_iv.lower, True, True)
            pieces.append(_piece(outer, inner, k, section, in_ri.lo, in_ri.lo))
        c = _cmp_upper(in_ri.hi, out_ri.hi)
        if c < 0:
            sector = SymbolicInterval(level, in_iv.upper, out_iv.upper)
            pieces.append(_piece(outer, inner, k, sector, in_ri.hi, out_ri.hi))
            if not in_iv.is_section:
                section = SymbolicInterval(level, in_iv.upper, in_iv.upper, True, True)
                pieces.append(_piece(outer, inner, k, section, in_ri.hi, in_ri.hi))
        elif c == 0 and out_iv.upper_closed and not in_iv.upper_closed:
            section = SymbolicInterval(level, in_iv.upper, in_iv.upper, True, True)
            pieces.append(_piece(outer, inner, k, section, in_ri.hi, in_ri.hi))
    return pieces


def split_region_improved(outer: Sequence[RealizedInterval], inner: Sequence[RealizedInterval]) -> list[PendingRegion]:
    """Improved splitting: boundary sections merge into the adjacent sector
    as a closed end (closed where the generated cell is open, and open where
    it is closed); the outer end inherits the region's strictness."""
    pieces: list[PendingRegion] = []
    for k, (out_ri, in_ri) in enumerate(zip(outer, inner)):
        level = out_ri.interval.level
        out_iv, in_iv = out_ri.interval, in_ri.interval
        c = _cmp_lower(out_ri.lo, in_ri.lo)
        if c < 0:
            # the piece is closed at the generated cell's end exactly when the
            # cell does not include that boundary itself
            piece = SymbolicInterval(
                level,
                out_iv.lower,
                in_iv.lower,
                lower_closed=out_iv.lower_closed,
                upper_closed=not in_iv.lower_closed,
            )
            pieces.append(_piece(outer, inner, k, piece, out_ri.lo, in_ri.lo))
        elif c == 0 and out_iv.lower_closed and not in_iv.lower_closed:
            section = SymbolicInterval(level, in_iv.lower, in_iv.lower, True, True)
            pieces.append(_piece(outer, inner, k, section, in_ri.lo, in_ri.lo))
        c = _cmp_upper(in_ri.hi, out_ri.hi)
        if c < 0:
            piece = SymbolicInterval(
                level,
                in_iv.upper,
                out_iv.upper,
                lower_closed=not in_iv.upper_closed,
                upper_closed=out_iv.upper_closed,
            )
            pieces.append(_piece(outer, inner, k, piece, in_ri.hi, out_ri.hi))
        elif c == 0 and out_iv.upper_closed and not in_iv.upper_closed:
            section = SymbolicInterval(level, in_iv.upper, in_iv.upper, True, True)
            pieces.append(_piece(outer, inner, k, section, in_ri.hi, in_ri.hi))
    return pieces


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

@dataclass
class Options:
    """Solve configuration.

    `sample_hook(region_index, level, realized, default)` may override the
    deterministic sample choice (testing aid; must stay inside the region).
    In parallel mode the step budget applies per worker subtree.
    """

    split: str = "improved"  # "classic" | "improved"
    budget_steps: int | None = None
    timeout: float | None = None
    parallel: int = 0
    sample_hook: Callable | None = None
    record_samples: bool = False

    def __post_init__(self):
        if self.split not in ("classic", "improved"):
            raise ValueError(f"unknown split mode {self.split!r}")


def full_space(levels: Iterable[int]) -> tuple[SymbolicInterval, ...]:
    return tuple(SymbolicInterval(lvl) for lvl in levels)


class Solver:
    """One solve over a fixed prenex formula and variable order."""

    def __init__(self, formula: Formula, order: VarOrder, options: Options | None = None,
                 ws: Workspace | None = None):
        self.formula = formula
        self.matrix = matrix_of(formula)
        self.prefix = prefix_of(formula)
        self.order = order
        self.options = options or Options()
        self.ws = ws or Workspace()
        self.witness: SamplePoint | None = None
        self.samples: list[SamplePoint] = []
        self._want_witness = False
        self._region_counter = 0
        self._t0 = time.perf_counter()

    @property
    def stats(self) -> SolveStats:
        return self.ws.stats

    # -- drivers ------------------------------------------------------------

    def decide(self) -> bool:
        """Truth of a sentence (no free variables)."""
        self._t0 = time.perf_counter()
        try:
            _, t = self.nucad_recurse(SamplePoint())
            return t
        finally:
            self.stats.total_time = time.perf_counter() - self._t0

    def solve(self):
        """Satisfiability of the existential closure; returns (sat, witness)."""
        self._t0 = time.perf_counter()
        self._want_witness = True
        try:
            _, t = self.nucad_recurse(SamplePoint())
            return t, (self.witness if t else None)
        finally:
            self._want_witness = False
            self.stats.total_time = time.perf_counter() - self._t0

    def decompose(self, levels: int) -> Node:
        """Truth-invariant decomposition of the space of levels 1..levels."""
        self._t0 = time.perf_counter()
        try:
            result = self.nucad_full(SamplePoint(), full_space(range(1, levels + 1)))
            assert result is not None  # the full space is never empty
            _, tree = result
            return tree
        finally:
            self.stats.total_time = time.perf_counter() - self._t0

    # -- recursion ----------------------------------------------------------

    def nucad_recurse(self, s: SamplePoint):
        """Determined samples generalize to an implicant cell; otherwise the
        leading quantifier block is explored. Returns (ProjectionSet, bool)."""
        v = evaluate(self.matrix, s, self.ws)
        if v is not TruthValue.UNDETERMINED:
            lits, tv = implicant(self.matrix, s, self.ws)
            t = tv is TruthValue.TRUE
            if self._want_witness and t:
                w = s
                for lvl in range(len(s) + 1, self.order.n + 1):
                    w = w.extended(F(0))
                self.witness = w
            return ProjectionSet(l.constraint.poly for l in lits), t
        i = len(s)
        block = [(q, lvl) for q, lvl in self.prefix if lvl > i]
        if not block or block[0][1] != i + 1:
            raise RuntimeError("undetermined matrix without a following quantifier block")
        q = block[0][0]
        end = i
        for bq, lvl in block:
            if bq != q or lvl != end + 1:
                break
            end = lvl
        result = self.nucad_quantifier(q, s, full_space(range(i + 1, end + 1)))
        assert result is not None
        return result

    def nucad_quantifier(self, q: str, s: SamplePoint, region: tuple[SymbolicInterval, ...]):
        """Early-terminating exploration of one quantifier block.

        Returns (P, t) with t the truth of the block over cell(P, s), or None
        for an empty region."""
        self._step()
        smp = self._sample_region(s, region)
        if smp is None:
            self.stats.omitted_empty += 1
            return None
        r, realized = smp
        self.stats.sections += sum(1 for iv in region if iv.is_section)
        first, last = len(s) + 1, len(s) + len(region)
        P, t = self.nucad_recurse(r)
        if (q == "exists" and t) or (q == "forall" and not t):
            _, residual = construct_cell(P, r, top=last, bottom=first, ws=self.ws)
            self.stats.cells += 1
            return residual, t
        improved = self.options.split == "improved"
        work = P.copy()
        self._add_region_polys(work, region, improved)
        region_map = {ri.interval.level: ri for ri in realized}
        intervals, residual = construct_cell(
            work, r, top=last, bottom=first,
            region=region_map, close_bounds=improved, ws=self.ws,
        )
        self.stats.cells += 1
        inner = [intervals[lvl] for lvl in range(first, last + 1)]
        splitter = split_region_improved if improved else split_region
        for piece in splitter(realized, inner):
            sub = self.nucad_quantifier(q, s, piece.intervals)
            if sub is None:
                continue
            P2, t2 = sub
            if (q == "exists" and t2) or (q == "forall" and not t2):
                return P2, t2
            residual.update(P2)
        return residual, q == "forall"

    def nucad_full(self, s: SamplePoint, region: tuple[SymbolicInterval, ...]):
        """Full truth-invariant decomposition of the region over cell(P, s).

        Returns (P, tree), or None for an empty region."""
        self._step()
        smp = self._sample_region(s, region)
        if smp is None:
            self.stats.omitted_empty += 1
            return None
        r, realized = smp
        self.stats.sections += sum(1 for iv in region if iv.is_section)
        first, last = len(s) + 1, len(s) + len(region)
        P, t = self.nucad_recurse(r)
        improved = self.options.split == "improved"
        work = P.copy()
        self._add_region_polys(work, region, improved)
        region_map = {ri.interval.level: ri for ri in realized}
        intervals, residual = construct_cell(
            work, r, top=last, bottom=first,
            region=region_map, close_bounds=improved, ws=self.ws,
        )
        self.stats.cells += 1
        inner = [intervals[lvl] for lvl in range(first, last + 1)]
        tree = Node(level=first)
        insert_path(tree, [(ri.interval, ri.lo, ri.hi) for ri in inner], Leaf(t))
        splitter = split_region_improved if improved else split_region
        pieces = splitter(realized, inner)
        if self.options.parallel and len(pieces) > 1:
            results = self._explore_parallel(s, pieces)
        else:
            results = [self.nucad_full(s, piece.intervals) for piece in pieces]
        for piece, sub in zip(pieces, results):
            if sub is None:
                continue
            P2, subtree = sub
            residual.update(P2)
            insert_path(
                tree,
                [(ri.interval, ri.lo, ri.hi) for ri in piece.realized],
                subtree,
            )
        return residual, tree

    # -- helpers --------------------------------------------------------------

    def _explore_parallel(self, s: SamplePoint, pieces: list[PendingRegion]):
        """Explore pieces in worker threads; identical output to sequential
        exploration because each child solve is a pure function of its inputs."""
        def job(piece: PendingRegion):
            child = Solver(self.formula, self.order,
                           replace(self.options, parallel=0), Workspace())
            child._t0 = self._t0
            out = child.nucad_full(_copy_sample(s), piece.intervals)
            return out, child.stats
        with ThreadPoolExecutor(max_workers=self.options.parallel) as pool:
            results = list(pool.map(job, pieces))
        out = []
        for sub, child_stats in results:
            self.stats.merge_counters(child_stats)
            out.append(sub)
        return out

    def _step(self):
        self.stats.steps += 1
        opts = self.options
        if opts.budget_steps is not None and self.stats.steps > opts.budget_steps:
            raise Aborted("step budget exhausted", self.stats)
        if opts.timeout is not None and time.perf_counter() - self._t0 > opts.timeout:
            raise Aborted("timeout", self.stats)

    def _add_region_polys(self, work: ProjectionSet, region, improved: bool):
        for iv in region:
            for bound, closed in ((iv.lower, iv.lower_closed), (iv.upper, iv.upper_closed)):
                if bound is not None:
                    work.add(bound.poly, semi_only=improved and closed)

    def _sample_region(self, s: SamplePoint, region: tuple[SymbolicInterval, ...]):
        """Choose a point in s x region; None when the region is empty."""
        index = self._region_counter
        self._region_counter += 1
        r = s
        realized = []
        for iv in region:
            lo = iv.lower.realize(r, self.ws) if iv.lower is not None else None
            hi = iv.upper.realize(r, self.ws) if iv.upper is not None else None
            if (iv.lower is not None and lo is None) or (iv.upper is not None and hi is None):
                return None
            ri = RealizedInterval(iv, lo, hi)
            if ri.is_empty():
                return None
            if iv.is_section:
                v = lo
            elif lo is not None and hi is not None and compare(lo, hi) == 0:
                v = lo  # single-point region with both ends closed
            else:
                v = as_algnum(pick_rational(lo, hi))
            if self.options.sample_hook is not None:
                override = self.options.sample_hook(index, iv.level, ri, v)
                if override is not None:
                    v = as_algnum(override)
                    if not ri.contains(v):
                        raise ValueError("sample hook returned a value outside the region")
            r = r.extended(v)
            realized.append(ri)
        if self.options.record_samples:
            self.samples.append(r)
        return r, realized


def _copy_sample(s: SamplePoint) -> SamplePoint:
    out = []
    for v in s:
        if v.is_rational:
            out.append(AlgebraicNumber.rational(v.value))
        else:
            out.append(AlgebraicNumber(defining=v.defining, lo=v.lo, hi=v.hi))
    return SamplePoint(out)
