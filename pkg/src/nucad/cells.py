"""Indexed root expressions, symbolic intervals, and single-cell construction.

A cell is built level by level, top down: `choose_interval` picks the
symbolic interval around the sample among the real roots of the level-i
polynomials, and `compute_cell_projection` replaces the level-i polynomials
by lower-level ones (discriminants, resultants against the chosen bounds,
and leading coefficients of square-free parts) whose sign-invariance keeps
the chosen root structure intact: roots neither merge, cross the interval,
nor appear inside it over the resulting base cell.

Nullified polynomials are replaced by their coefficients and excluded from
root production; a nullified bound polynomial aborts with
`NullificationFailure` (completeness of that corner is not claimed).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction as F
from typing import Iterable, Sequence

from .polynomials import Polynomial, discriminant, resultant, square_free_part
from .realroots import (
    NULLIFIED,
    AlgebraicNumber,
    SamplePoint,
    compare,
    roots_at_sample,
    sign_at,
)
from .stats import Workspace


class NullificationFailure(Exception):
    """A bound-defining polynomial vanished identically over the sample prefix."""


@dataclass(frozen=True)
class IndexedRootExpression:
    """The index-th real root of poly in its main variable, over a base point."""

    level: int
    poly: Polynomial
    index: int

    def realize(self, prefix, ws: Workspace | None = None) -> AlgebraicNumber | None:
        """Value at the base point; None when the root does not exist there."""
        roots = roots_at_sample(self.poly, prefix, ws)
        if roots is NULLIFIED or len(roots) < self.index:
            return None
        return roots[self.index - 1]

    def __str__(self) -> str:
        return f"root({self.poly.order.name_of(self.level)}, {self.poly}, {self.index})"

    __repr__ = __str__


@dataclass(frozen=True)
class SymbolicInterval:
    """Per-level cell bound: sector, section, or half-closed sector."""

    level: int
    lower: IndexedRootExpression | None = None  # None = -infinity
    upper: IndexedRootExpression | None = None  # None = +infinity
    lower_closed: bool = False
    upper_closed: bool = False

    def __post_init__(self):
        if self.lower is None and self.lower_closed:
            raise ValueError("infinite lower end must be open")
        if self.upper is None and self.upper_closed:
            raise ValueError("infinite upper end must be open")

    @property
    def is_section(self) -> bool:
        return (
            self.lower is not None
            and self.lower == self.upper
            and self.lower_closed
            and self.upper_closed
        )

    @property
    def is_full(self) -> bool:
        return self.lower is None and self.upper is None

    def __str__(self) -> str:
        lo = "-inf" if self.lower is None else str(self.lower)
        hi = "+inf" if self.upper is None else str(self.upper)
        return f"{'[' if self.lower_closed else '('}{lo}, {hi}{']' if self.upper_closed else ')'}"

    __repr__ = __str__


@dataclass
class RealizedInterval:
    """A symbolic interval together with its bound values at a fixed base point."""

    interval: SymbolicInterval
    lo: AlgebraicNumber | None = None
    hi: AlgebraicNumber | None = None
    lower_group: tuple = ()
    upper_group: tuple = ()

    @property
    def level(self) -> int:
        return self.interval.level

    def is_empty(self) -> bool:
        if self.interval.lower is None or self.interval.upper is None:
            return False
        c = compare(self.lo, self.hi)
        if c > 0:
            return True
        if c == 0:
            return not (self.interval.lower_closed and self.interval.upper_closed)
        return False

    def contains(self, value: AlgebraicNumber) -> bool:
        if self.lo is not None:
            c = compare(self.lo, value)
            if c > 0 or (c == 0 and not self.interval.lower_closed):
                return False
        if self.hi is not None:
            c = compare(value, self.hi)
            if c > 0 or (c == 0 and not self.interval.upper_closed):
                return False
        return True


class ProjectionSet:
    """Deduplicated set of canonicalized polynomials with weak-sign flags.

    A polynomial flagged `semi_only` needs only semi-sign-invariance over the
    constructed cell (it stems solely from closed region bounds); any
    occurrence requiring full sign-invariance clears the flag.
    """

    def __init__(self, items: Iterable = ()):
        self._entries: dict[tuple, tuple[Polynomial, bool]] = {}
        for item in items:
            if isinstance(item, tuple):
                self.add(item[0], item[1])
            else:
                self.add(item)

    def add(self, poly: Polynomial, semi_only: bool = False) -> None:
        canon = poly.primitive()
        if canon.is_zero() or canon.is_constant():
            return
        key = canon.key()
        prev = self._entries.get(key)
        if prev is None:
            self._entries[key] = (canon, semi_only)
        elif prev[1] and not semi_only:
            self._entries[key] = (canon, False)

    def update(self, other: "ProjectionSet") -> None:
        for poly, semi in other.entries():
            self.add(poly, semi)

    def entries(self) -> list[tuple[Polynomial, bool]]:
        return [self._entries[k] for k in sorted(self._entries)]

    def polys(self) -> list[Polynomial]:
        return [p for p, _ in self.entries()]

    def of_level(self, level: int) -> list[tuple[Polynomial, bool]]:
        return [(p, s) for p, s in self.entries() if p.level == level]

    def below_level(self, level: int) -> list[tuple[Polynomial, bool]]:
        return [(p, s) for p, s in self.entries() if p.level < level]

    def is_flagged(self, poly: Polynomial) -> bool:
        entry = self._entries.get(poly.primitive().key())
        return bool(entry and entry[1])

    def copy(self) -> "ProjectionSet":
        out = ProjectionSet()
        out._entries = dict(self._entries)
        return out

    def __contains__(self, poly: Polynomial) -> bool:
        return poly.primitive().key() in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self.polys())

    def __repr__(self):
        return "{" + ", ".join(str(p) for p in self.polys()) + "}"


# ---------------------------------------------------------------------------
# interval selection
# ---------------------------------------------------------------------------

def _collect_roots(level_polys: Sequence[Polynomial], prefix, ws):
    """Grouped distinct root values: [(value, [(poly, index), ...]), ...] sorted."""
    entries = []
    for p in level_polys:
        roots = roots_at_sample(p, prefix, ws)
        if roots is NULLIFIED:
            raise NullificationFailure(
                f"nullified polynomial {p} reached interval selection"
            )
        for idx, val in enumerate(roots, start=1):
            entries.append((val, p, idx))
    groups: list[tuple[AlgebraicNumber, list]] = []
    for val, p, idx in entries:
        placed = False
        for gval, members in groups:
            if compare(val, gval) == 0:
                members.append((p, idx))
                placed = True
                break
        if not placed:
            groups.append((val, [(p, idx)]))
    groups.sort(key=_GroupKey)
    return groups


class _GroupKey:
    def __init__(self, group):
        self.value = group[0]

    def __lt__(self, other):
        return compare(self.value, other.value) < 0


def _representative(level: int, members: list) -> tuple[Polynomial, int]:
    """Tie rule for equal realized bounds: least degree, then canonical order."""
    return min(members, key=lambda m: (m[0].degree(level), m[0].level, m[0].key()))


def choose_interval(P, s, ws: Workspace | None = None) -> RealizedInterval:
    """The symbolic interval around s_i among the roots of the level-i members.

    Exactly the four-way case split: no roots gives (-inf, inf); s_i below,
    between, on, or above the ordered roots gives the matching sector or
    section. Bounds are indexed root expressions of the witnessing roots.
    """
    s = s if isinstance(s, SamplePoint) else SamplePoint(s)
    i = len(s)
    if i == 0:
        raise ValueError("choose_interval needs a nonempty sample")
    if not isinstance(P, ProjectionSet):
        P = ProjectionSet(P)
    level_polys = [p for p, _ in P.of_level(i)]
    groups = _collect_roots(level_polys, s.prefix(i - 1), ws)
    if ws is not None:
        ws.stats.symbolic_intervals += 1
    if not groups:
        return RealizedInterval(SymbolicInterval(i))
    si = s[i - 1]
    below = None  # last group strictly below s_i
    on = None
    above = None
    for gi, (val, members) in enumerate(groups):
        c = compare(si, val)
        if c == 0:
            on = gi
            break
        if c > 0:
            below = gi
        else:
            above = gi
            break

    def ire(gi):
        val, members = groups[gi]
        poly, idx = _representative(i, members)
        return IndexedRootExpression(i, poly, idx), val, tuple(members)

    if on is not None:
        bound, val, grp = ire(on)
        interval = SymbolicInterval(i, bound, bound, True, True)
        return RealizedInterval(interval, val, val, grp, grp)
    lower = ire(below) if below is not None else None
    upper = ire(above) if above is not None else None
    interval = SymbolicInterval(
        i,
        lower[0] if lower else None,
        upper[0] if upper else None,
    )
    return RealizedInterval(
        interval,
        lower[1] if lower else None,
        upper[1] if upper else None,
        lower[2] if lower else (),
        upper[2] if upper else (),
    )


# ---------------------------------------------------------------------------
# projection
# ---------------------------------------------------------------------------

def compute_cell_projection(P, s, interval: SymbolicInterval, ws: Workspace | None = None) -> ProjectionSet:
    """Base-cell description below level i = len(s).

    Over every point of the resulting cell, the defining polynomials of
    `interval` keep their root structure and every level-i member stays
    (semi-)sign-invariant on the corresponding cylinder slice. Members of
    level < i pass through unchanged.
    """
    s = s if isinstance(s, SamplePoint) else SamplePoint(s)
    i = len(s)
    if not isinstance(P, ProjectionSet):
        P = ProjectionSet(P)
    below = P.below_level(i)
    level_entries = P.of_level(i)

    out = ProjectionSet()
    for p, semi in below:
        out.add(p, semi)

    prefix = s.prefix(i - 1)
    bound_keys = set()
    for b in (interval.lower, interval.upper):
        if b is not None:
            bound_keys.add(b.poly.primitive().key())

    active: list[Polynomial] = []
    for p, _semi in level_entries:
        roots = roots_at_sample(p, prefix, ws)
        if roots is NULLIFIED:
            if p.key() in bound_keys:
                raise NullificationFailure(
                    f"bound polynomial {p} is nullified over {prefix}"
                )
            for c in p.coeffs_in(i):
                out.add(c)
        else:
            active.append(p)

    sqf = {}
    for p in active:
        sqf[p.key()] = _sqfree_cached(p, i, ws)

    for p in active:
        f = sqf[p.key()]
        if f.degree(i) >= 2:
            out.add(discriminant(f, i))
        coeffs = f.coeffs_in(i)
        for c in reversed(coeffs):
            out.add(c)
            if c.is_zero():
                continue
            if c.is_constant() or sign_at(c, prefix, ws) != 0:
                break

    for b in (interval.lower, interval.upper):
        if b is None:
            continue
        fb = sqf.get(b.poly.primitive().key())
        if fb is None:
            fb = _sqfree_cached(b.poly, i, ws)
        for p in active:
            if p.key() == b.poly.primitive().key():
                continue
            fp = sqf[p.key()]
            if fb == fp:
                continue
            out.add(resultant(fb, fp, i))
    return out


def _sqfree_cached(p: Polynomial, level: int, ws: Workspace | None) -> Polynomial:
    if ws is None:
        return square_free_part(p, level)
    key = (p.key(), level)
    hit = ws.sqfree_cache.get(key)
    if hit is None:
        hit = square_free_part(p, level)
        ws.sqfree_cache[key] = hit
    return hit


# ---------------------------------------------------------------------------
# levelwise construction
# ---------------------------------------------------------------------------

def construct_cell(
    P,
    s,
    top: int | None = None,
    bottom: int = 1,
    region: dict | None = None,
    close_bounds: bool = False,
    ws: Workspace | None = None,
):
    """Levelwise single-cell construction over levels top..bottom.

    Returns ({level: RealizedInterval}, residual ProjectionSet below bottom).
    The product of the intervals contains s and every input polynomial is
    sign-invariant over it (semi-sign-invariant for flagged ones).

    With `close_bounds`, a finite bound may be emitted closed when the
    enclosing region's matching end is closed with the same realized value
    and only flagged polynomials vanish there.
    """
    s = s if isinstance(s, SamplePoint) else SamplePoint(s)
    if not isinstance(P, ProjectionSet):
        P = ProjectionSet(P)
    top = len(s) if top is None else top
    work = P.copy()
    intervals: dict[int, RealizedInterval] = {}
    for i in range(top, bottom - 1, -1):
        ri = choose_interval(work, s.prefix(i), ws)
        if close_bounds and region is not None and i in region:
            ri = _close_ends(ri, region[i], work)
        intervals[i] = ri
        work = compute_cell_projection(work, s.prefix(i), ri.interval, ws)
    return intervals, work


def _close_ends(ri: RealizedInterval, region_ri: RealizedInterval, work: ProjectionSet) -> RealizedInterval:
    """Half-closed output: close a bound that coincides with a closed region
    end when every polynomial vanishing there is flagged weak."""
    interval = ri.interval
    if interval.is_section:
        return ri
    lower_closed = interval.lower_closed
    upper_closed = interval.upper_closed
    if (
        interval.lower is not None
        and region_ri.interval.lower is not None
        and region_ri.interval.lower_closed
        and compare(ri.lo, region_ri.lo) == 0
        and all(work.is_flagged(p) for p, _ in ri.lower_group)
    ):
        lower_closed = True
    if (
        interval.upper is not None
        and region_ri.interval.upper is not None
        and region_ri.interval.upper_closed
        and compare(ri.hi, region_ri.hi) == 0
        and all(work.is_flagged(p) for p, _ in ri.upper_group)
    ):
        upper_closed = True
    if lower_closed == interval.lower_closed and upper_closed == interval.upper_closed:
        return ri
    new_interval = replace(interval, lower_closed=lower_closed, upper_closed=upper_closed)
    return RealizedInterval(new_interval, ri.lo, ri.hi, ri.lower_group, ri.upper_group)
