"""Sparse multivariate polynomials over exact rationals.

Variables are globally ordered; the *level* of a polynomial is the 1-based
index of the highest variable that actually occurs in it (0 for constants).
All coefficients are `fractions.Fraction`, so every operation is exact.

The resultant is computed by the subresultant polynomial remainder sequence
(Brown's algorithm) on a dense-in-main-variable view; its sign convention is
the one induced by that PRS and downstream code never relies on it.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd as int_gcd
from typing import Iterable, Mapping, Sequence

Rat = Fraction


class VarOrder:
    """An immutable, ordered sequence of variable names; position = level."""

    __slots__ = ("names", "_index")

    def __init__(self, names: Sequence[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        self.names = names
        self._index = {name: i + 1 for i, name in enumerate(names)}

    @property
    def n(self) -> int:
        return len(self.names)

    def level_of(self, name: str) -> int:
        return self._index[name]

    def name_of(self, level: int) -> str:
        return self.names[level - 1]

    def var(self, level: int) -> "Polynomial":
        if not 1 <= level <= self.n:
            raise ValueError(f"level {level} out of range 1..{self.n}")
        exps = [0] * self.n
        exps[level - 1] = 1
        return Polynomial(self, {tuple(exps): Rat(1)})

    def var_named(self, name: str) -> "Polynomial":
        return self.var(self.level_of(name))

    def const(self, value) -> "Polynomial":
        c = Rat(value)
        if c == 0:
            return Polynomial(self, {})
        return Polynomial(self, {(0,) * self.n: c})

    def __eq__(self, other) -> bool:
        return isinstance(other, VarOrder) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"VarOrder({', '.join(self.names)})"


class Polynomial:
    """Sparse polynomial: map from exponent vectors to nonzero rationals."""

    __slots__ = ("order", "terms", "_level", "_key")

    def __init__(self, order: VarOrder, terms: Mapping[tuple, Rat]):
        self.order = order
        self.terms = {e: c for e, c in terms.items() if c != 0}
        self._level = None
        self._key = None

    # -- basic structure ---------------------------------------------------

    @property
    def level(self) -> int:
        if self._level is None:
            lvl = 0
            for exps in self.terms:
                for i in range(len(exps) - 1, -1, -1):
                    if exps[i]:
                        if i + 1 > lvl:
                            lvl = i + 1
                        break
            self._level = lvl
        return self._level

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return self.level == 0

    def constant_value(self) -> Rat:
        if not self.terms:
            return Rat(0)
        if self.level != 0:
            raise ValueError("not a constant polynomial")
        return next(iter(self.terms.values()))

    def degree(self, level: int) -> int:
        """Degree in the given variable; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        i = level - 1
        return max(e[i] for e in self.terms)

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def variables(self) -> list[int]:
        """Levels of variables that occur."""
        seen = set()
        for e in self.terms:
            for i, d in enumerate(e):
                if d:
                    seen.add(i + 1)
        return sorted(seen)

    # -- ring operations ---------------------------------------------------

    def _check(self, other: "Polynomial"):
        if self.order is not other.order and self.order != other.order:
            raise ValueError("mixed variable orders")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.order.const(other)
        self._check(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = terms.get(e, Rat(0)) + c
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        return Polynomial(self.order, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.order, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.order.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Rat(other)
            if c == 0:
                return Polynomial(self.order, {})
            return Polynomial(self.order, {e: k * c for e, k in self.terms.items()})
        self._check(other)
        out: dict[tuple, Rat] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, Rat(0)) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return Polynomial(self.order, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = self.order.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.key())

    # -- canonical form ----------------------------------------------------

    def key(self) -> tuple:
        """Hashable canonical identity (sorted term list)."""
        if self._key is None:
            self._key = tuple(sorted(self.terms.items()))
        return self._key

    def lex_leading(self) -> tuple:
        return max(self.terms) if self.terms else ()

    def rational_content(self) -> Rat:
        """Positive rational c such that self/c is integer-primitive."""
        if not self.terms:
            return Rat(1)
        num = 0
        den = 1
        for c in self.terms.values():
            num = int_gcd(num, c.numerator)
            den = den * c.denominator // int_gcd(den, c.denominator)
        return Rat(num, den)

    def primitive(self) -> "Polynomial":
        """Integer-primitive scalar multiple with positive lex-leading coefficient."""
        if not self.terms:
            return self
        c = self.rational_content()
        if self.terms[self.lex_leading()] < 0:
            c = -c
        return self * (1 / c)

    # -- dense view in one variable -----------------------------------------

    def coeffs_in(self, level: int) -> list["Polynomial"]:
        """Coefficients [c_0, ..., c_d] w.r.t. the given variable (lower-level polys)."""
        d = self.degree(level)
        if d < 0:
            return []
        i = level - 1
        buckets: list[dict] = [dict() for _ in range(d + 1)]
        for e, c in self.terms.items():
            rest = e[:i] + (0,) + e[i + 1:]
            buckets[e[i]][rest] = buckets[e[i]].get(rest, Rat(0)) + c
        return [Polynomial(self.order, b) for b in buckets]

    @staticmethod
    def from_coeffs(order: VarOrder, level: int, coeffs: Sequence["Polynomial"]) -> "Polynomial":
        i = level - 1
        terms: dict[tuple, Rat] = {}
        for d, p in enumerate(coeffs):
            for e, c in p.terms.items():
                if e[i]:
                    raise ValueError("coefficient involves the main variable")
                e2 = e[:i] + (d,) + e[i + 1:]
                terms[e2] = terms.get(e2, Rat(0)) + c
        return Polynomial(order, terms)

    def leading_coeff(self, level: int) -> "Polynomial":
        d = self.degree(level)
        if d < 0:
            return self.order.const(0)
        i = level - 1
        terms = {e[:i] + (0,) + e[i + 1:]: c for e, c in self.terms.items() if e[i] == d}
        return Polynomial(self.order, terms)

    def derivative(self, level: int) -> "Polynomial":
        i = level - 1
        terms: dict[tuple, Rat] = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = e[:i] + (e[i] - 1,) + e[i + 1:]
                terms[e2] = terms.get(e2, Rat(0)) + c * e[i]
        return Polynomial(self.order, terms)

    # -- evaluation / substitution -------------------------------------------

    def subs_rational(self, values: Mapping[int, Rat]) -> "Polynomial":
        """Substitute exact rationals for the given levels."""
        if not values:
            return self
        terms: dict[tuple, Rat] = {}
        for e, c in self.terms.items():
            factor = c
            e2 = list(e)
            for lvl, v in values.items():
                d = e[lvl - 1]
                if d:
                    factor *= Rat(v) ** d
                    e2[lvl - 1] = 0
            if factor:
                key = tuple(e2)
                s = terms.get(key, Rat(0)) + factor
                if s:
                    terms[key] = s
                else:
                    terms.pop(key, None)
        return Polynomial(self.order, terms)

    def eval_rational(self, point: Sequence[Rat]) -> Rat:
        """Full evaluation; point assigns levels 1..len(point) >= level."""
        if self.level > len(point):
            raise ValueError("point does not assign all variables")
        total = Rat(0)
        for e, c in self.terms.items():
            v = c
            for i, d in enumerate(e):
                if d:
                    v *= Rat(point[i]) ** d
            total += v
        return total

    def remap(self, perm: Mapping[int, int], order: VarOrder | None = None) -> "Polynomial":
        """Rename variables by a level permutation (old level -> new level)."""
        order = order or self.order
        n = order.n
        terms: dict[tuple, Rat] = {}
        for e, c in self.terms.items():
            e2 = [0] * n
            for i, d in enumerate(e):
                if d:
                    e2[perm[i + 1] - 1] = d
            terms[tuple(e2)] = c
        return Polynomial(order, terms)

    # -- univariate helpers ---------------------------------------------------

    def univariate_coeffs(self) -> list[Rat]:
        """Coefficient list [c_0..c_d] for a polynomial of level <= 1 in its variable."""
        lvl = self.level
        if lvl == 0:
            return [self.constant_value()] if self.terms else []
        d = self.degree(lvl)
        out = [Rat(0)] * (d + 1)
        i = lvl - 1
        for e, c in self.terms.items():
            out[e[i]] = c
        return out

    # -- printing --------------------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = "*".join(
                f"{self.order.names[i]}^{d}" if d > 1 else self.order.names[i]
                for i, d in enumerate(e) if d
            )
            if not mono:
                parts.append((c, str(abs(c))))
                continue
            if abs(c) == 1:
                parts.append((c, mono))
            else:
                parts.append((c, f"{abs(c)}*{mono}"))
        out = ""
        for i, (c, text) in enumerate(parts):
            if i == 0:
                out = ("-" if c < 0 else "") + text
            else:
                out += (" - " if c < 0 else " + ") + text
        return out

    def __repr__(self) -> str:
        return f"Polynomial({self})"


# ---------------------------------------------------------------------------
# exact division, gcd, and the subresultant machinery
# ---------------------------------------------------------------------------


def exact_div(f: Polynomial, g: Polynomial) -> Polynomial:
    """Exact multivariate division f / g; raises if g does not divide f."""
    if g.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    if g.is_constant():
        return f * (1 / g.constant_value())
    order = f.order
    rem = Polynomial(order, dict(f.terms))
    g_lead = g.lex_leading()
    g_lc = g.terms[g_lead]
    out: dict[tuple, Rat] = {}
    while rem.terms:
        r_lead = rem.lex_leading()
        q_exp = tuple(a - b for a, b in zip(r_lead, g_lead))
        if any(d < 0 for d in q_exp):
            raise ArithmeticError("inexact polynomial division")
        q_c = rem.terms[r_lead] / g_lc
        out[q_exp] = out.get(q_exp, Rat(0)) + q_c
        rem = rem - g * Polynomial(order, {q_exp: q_c})
    return Polynomial(order, out)


def pseudo_rem(f: Polynomial, g: Polynomial, level: int) -> Polynomial:
    """Pseudo-remainder of f by g in the given variable: lc(g)^(df-dg+1) f mod g."""
    df, dg = f.degree(level), g.degree(level)
    if dg < 0:
        raise ZeroDivisionError("pseudo-division by zero")
    if df < dg:
        return f
    fc = f.coeffs_in(level)
    gc = g.coeffs_in(level)
    lc_g = gc[-1]
    n = df - dg + 1
    while len(fc) - 1 >= dg and fc:
        d = len(fc) - 1
        if d < dg:
            break
        lead = fc[-1]
        fc = [c * lc_g for c in fc[:-1]]
        # subtract lead * x^(d-dg) * g
        shift = d - dg
        for j in range(dg):
            fc[shift + j] = fc[shift + j] - lead * gc[j]
        while fc and fc[-1].is_zero():
            fc.pop()
        n -= 1
        if not fc:
            break
    result = Polynomial.from_coeffs(f.order, level, fc) if fc else f.order.const(0)
    if n > 0:
        result = result * (lc_g ** n)
    return result


def _resultant_prs(f: Polynomial, g: Polynomial, level: int) -> Polynomial:
    """Subresultant PRS resultant of f, g w.r.t. the variable at `level`.

    Brown's recurrence; returns the last scalar subresultant, which equals the
    resultant up to the PRS sign convention.
    """
    order = f.order
    n, m = f.degree(level), g.degree(level)
    if n < m:
        f, g = g, f
        n, m = m, n
    if m < 0:
        raise ValueError("resultant of a zero polynomial")
    if m == 0:
        # res(f, c) = c^deg(f); deg(f) = 0 gives 1
        return g ** n if n > 0 else order.const(1)

    d = n - m
    b = order.const((-1) ** (d + 1))
    h = pseudo_rem(f, g, level) * b
    lc = g.leading_coeff(level)
    c = lc ** d
    s_last = c
    c = -c

    while not h.is_zero():
        k = h.degree(level)
        f, g, m, d = g, h, k, m - k
        b = (-lc) * (c ** d)
        h = pseudo_rem(f, g, level)
        h = exact_div(h, b)
        lc = g.leading_coeff(level)
        if d > 1:
            c = exact_div((-lc) ** d, c ** (d - 1))
        else:
            c = -lc
        s_last = -c
        if k == 0:
            break

    if g.degree(level) > 0:
        return order.const(0)
    return s_last


def resultant(p: Polynomial, q: Polynomial, level: int) -> Polynomial:
    """res in the given variable via the subresultant PRS; level of result < level.

    Requires both inputs nonzero and the variable to occur in at least one.
    """
    if p.is_zero() or q.is_zero():
        raise ValueError("resultant requires nonzero polynomials")
    if p.degree(level) <= 0 and q.degree(level) <= 0:
        raise ValueError("variable occurs in neither polynomial")
    return _resultant_prs(p, q, level)


def discriminant(p: Polynomial, level: int) -> Polynomial:
    """disc = res(p, dp/dx) / lc(p) up to the PRS sign convention."""
    d = p.degree(level)
    if d < 1:
        raise ValueError("discriminant requires positive degree")
    dp = p.derivative(level)
    if dp.is_zero():
        return p.order.const(0)
    res = _resultant_prs(p, dp, level)
    return exact_div(res, p.leading_coeff(level))


def poly_gcd(p: Polynomial, q: Polynomial) -> Polynomial:
    """Multivariate gcd by primitive PRS, canonicalized via .primitive()."""
    if p.is_zero():
        return q.primitive()
    if q.is_zero():
        return p.primitive()
    if p.is_constant() or q.is_constant():
        return p.order.const(1)
    level = max(p.level, q.level)
    return _gcd_in(p, q, level).primitive()


def _content_in(p: Polynomial, level: int) -> Polynomial:
    coeffs = [c for c in p.coeffs_in(level) if not c.is_zero()]
    g = coeffs[0]
    for c in coeffs[1:]:
        if g.is_constant():
            break
        g = poly_gcd(g, c)
    return g if not g.is_constant() else p.order.const(1)


def _gcd_in(p: Polynomial, q: Polynomial, level: int) -> Polynomial:
    dp, dq = p.degree(level), q.degree(level)
    if dp == 0 or dq == 0:
        # at least one is free of this variable: gcd divides contents
        a = p if dp == 0 else _content_in(p, level)
        b = q if dq == 0 else _content_in(q, level)
        return poly_gcd(a, b)
    cont_p = _content_in(p, level)
    cont_q = _content_in(q, level)
    pp = exact_div(p, cont_p)
    qq = exact_div(q, cont_q)
    if pp.degree(level) < qq.degree(level):
        pp, qq = qq, pp
    while True:
        r = pseudo_rem(pp, qq, level)
        if r.is_zero():
            break
        if r.degree(level) == 0:
            qq = p.order.const(1)
            break
        r = exact_div(r, _content_in(r, level)).primitive()
        pp, qq = qq, r
    result = qq.primitive()
    cont = poly_gcd(cont_p, cont_q)
    return result * cont


def square_free_part(p: Polynomial, level: int) -> Polynomial:
    """p / gcd(p, dp/dx), made primitive; same real variety in the variable."""
    if p.is_zero():
        raise ValueError("square-free part of zero")
    if p.degree(level) < 1:
        return p.primitive()
    g = poly_gcd(p, p.derivative(level))
    if g.is_constant():
        return p.primitive()
    return exact_div(p, g).primitive()
