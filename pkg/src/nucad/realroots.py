"""Real root isolation, real algebraic numbers, and exact sign evaluation.

Univariate real roots are isolated by Descartes'-rule bisection on the
square-free part, over exact rationals. A real algebraic number is a
square-free defining polynomial plus an open isolating interval with rational
endpoints; refinement bisects the interval and never changes the denoted
number (a refinement step that lands exactly on the root demotes the number
to its rational value).

Signs of polynomials at partially algebraic sample points are decided in two
phases: adaptive interval refinement, then an exact fallback that eliminates
the algebraic coordinates one at a time by resultants against their defining
polynomials and locates the candidate value in the isolated root set of the
eliminant.
"""
from __future__ import annotations

from fractions import Fraction as F
from typing import Iterable, Sequence

from .polynomials import Polynomial, VarOrder, resultant
from .stats import Workspace, maybe_timed


class Nullified:
    """Distinguished marker: a polynomial became identically zero at a sample."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NULLIFIED"


NULLIFIED = Nullified()


# ---------------------------------------------------------------------------
# univariate helpers on Fraction coefficient lists  [c0, c1, ..., cd]
# ---------------------------------------------------------------------------

def _strip(c: list[F]) -> list[F]:
    while c and c[-1] == 0:
        c.pop()
    return c

def _uni_eval(c: Sequence[F], x: F) -> F:
    acc = F(0)
    for k in reversed(c):
        acc = acc * x + k
    return acc

def _uni_derive(c: Sequence[F]) -> list[F]:
    return [c[i] * i for i in range(1, len(c))]

def _uni_rem(a: list[F], b: list[F]) -> list[F]:
    a = list(a)
    db, lb = len(b) - 1, b[-1]
    while len(a) - 1 >= db:
        q = a[-1] / lb
        shift = len(a) - 1 - db
        for i in range(db):
            a[shift + i] -= q * b[i]
        a.pop()
        _strip(a)
        if not a:
            break
    return a

def _uni_gcd(a: Sequence[F], b: Sequence[F]) -> list[F]:
    a, b = _strip(list(a)), _strip(list(b))
    while b:
        a, b = b, _uni_rem(a, b)
    if a:
        lead = a[-1]
        a = [x / lead for x in a]
    return a

def _uni_exact_div(a: Sequence[F], b: Sequence[F]) -> list[F]:
    a = list(a)
    out = [F(0)] * (len(a) - len(b) + 1)
    db, lb = len(b) - 1, b[-1]
    while len(a) - 1 >= db and a:
        q = a[-1] / lb
        out[len(a) - 1 - db] = q
        shift = len(a) - 1 - db
        for i in range(db + 1):
            a[shift + i] -= q * b[i]
        _strip(a)
    if a:
        raise ArithmeticError("inexact univariate division")
    return out

def _uni_sqfree(c: Sequence[F]) -> list[F]:
    c = _strip(list(c))
    if len(c) <= 2:
        return c
    g = _uni_gcd(c, _uni_derive(c))
    if len(g) <= 1:
        return c
    return _uni_exact_div(c, g)

def _uni_primitive(c: Sequence[F]) -> tuple[F, ...]:
    c = _strip(list(c))
    if not c:
        return ()
    from math import gcd as ig
    num, den = 0, 1
    for k in c:
        num = ig(num, k.numerator)
        den = den * k.denominator // ig(den, k.denominator)
    scale = F(den, num) if c[-1] > 0 else F(-den, num)
    return tuple(k * scale for k in c)

def taylor_shift(c: Sequence[F], a: F) -> list[F]:
    """Coefficients of p(x + a)."""
    res = list(c)
    n = len(res)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            res[j] += a * res[j + 1]
    return res

def _descartes_variations(c: Sequence[F]) -> int:
    sign = 0
    var = 0
    for k in c:
        if k == 0:
            continue
        s = 1 if k > 0 else -1
        if sign and s != sign:
            var += 1
        sign = s
    return var

def _count_01(c: Sequence[F]) -> int:
    """Descartes bound for the number of roots in the open interval (0, 1)."""
    n = len(c) - 1
    rev = list(reversed(c))
    shifted = taylor_shift(rev, F(1))
    return _descartes_variations(shifted)

def _count_interval(c: Sequence[F], lo: F, hi: F) -> int:
    w = hi - lo
    mapped = taylor_shift(c, lo)
    mapped = [k * w ** i for i, k in enumerate(mapped)]
    return _count_01(mapped)

def _root_bound(c: Sequence[F]) -> F:
    lead = abs(c[-1])
    m = max(abs(k) for k in c[:-1]) if len(c) > 1 else F(0)
    b = F(1) + m / lead
    power = F(1)
    while power < b:
        power *= 2
    return power


def isolate_coeffs(coeffs: Sequence[F]) -> list[tuple]:
    """Isolate the distinct real roots of a nonzero univariate polynomial.

    Returns a sorted list of ("rat", value) and ("ivl", lo, hi) entries, the
    latter holding exactly one root of the square-free part with nonzero
    values of opposite sign at the endpoints.
    """
    c = _strip(list(coeffs))
    if not c:
        raise ValueError("cannot isolate roots of the zero polynomial")
    if len(c) == 1:
        return []
    sq = _uni_sqfree(c)
    out: list[tuple] = []
    bound = _root_bound(sq)

    def recurse(poly: list[F], lo: F, hi: F):
        v = _count_interval(poly, lo, hi)
        if v == 0:
            return
        if v == 1:
            out.append(("ivl", lo, hi))
            return
        mid = (lo + hi) / 2
        if _uni_eval(poly, mid) == 0:
            quot = _uni_exact_div(poly, [-mid, F(1)])
            recurse(quot, lo, mid)
            out.append(("rat", mid))
            recurse(quot, mid, hi)
        else:
            recurse(poly, lo, mid)
            recurse(poly, mid, hi)

    recurse(sq, -bound, bound)
    # entries are produced in increasing position already; fix up any interval
    # whose endpoint is a root of the full square-free part
    fixed: list[tuple] = []
    for entry in out:
        if entry[0] == "rat":
            fixed.append(entry)
            continue
        _, lo, hi = entry
        lo, hi, exact = _clean_endpoints(sq, lo, hi)
        if exact is not None:
            fixed.append(("rat", exact))
        else:
            fixed.append(("ivl", lo, hi))
    return fixed


def _clean_endpoints(sq: list[F], lo: F, hi: F):
    """Shrink (lo, hi) so sq is nonzero with opposite signs at the endpoints."""
    flo, fhi = _uni_eval(sq, lo), _uni_eval(sq, hi)
    while True:
        if flo == 0 or fhi == 0 or (flo > 0) == (fhi > 0):
            mid = (lo + hi) / 2
            fmid = _uni_eval(sq, mid)
            if fmid == 0:
                return lo, hi, mid
            if flo != 0 and (fmid > 0) != (flo > 0):
                hi, fhi = mid, fmid
            elif fhi != 0 and (fmid > 0) != (fhi > 0):
                lo, flo = mid, fmid
            else:
                # root still on the zero endpoint's side
                if flo == 0:
                    hi, fhi = mid, fmid
                else:
                    lo, flo = mid, fmid
            continue
        return lo, hi, None


# ---------------------------------------------------------------------------
# real algebraic numbers
# ---------------------------------------------------------------------------

class AlgebraicNumber:
    """A real number: exact rational, or the unique root of `defining` in (lo, hi)."""

    __slots__ = ("value", "defining", "lo", "hi")

    def __init__(self, value=None, defining=None, lo=None, hi=None):
        self.value = value
        self.defining = defining
        self.lo = lo
        self.hi = hi

    @staticmethod
    def rational(v) -> "AlgebraicNumber":
        return AlgebraicNumber(value=F(v))

    @staticmethod
    def algebraic(defining: Sequence[F], lo: F, hi: F) -> "AlgebraicNumber":
        defining = _uni_primitive(_uni_sqfree(list(defining)))
        if len(defining) == 2:
            return AlgebraicNumber(value=-defining[0] / defining[1])
        if lo < 0 < hi and _uni_eval(defining, F(0)) == 0:
            return AlgebraicNumber(value=F(0))
        return AlgebraicNumber(defining=tuple(defining), lo=F(lo), hi=F(hi))

    @property
    def is_rational(self) -> bool:
        return self.value is not None

    def enclosure(self) -> tuple[F, F]:
        if self.value is not None:
            return (self.value, self.value)
        return (self.lo, self.hi)

    def refine(self) -> None:
        """One bisection step; may discover that the number is rational."""
        if self.value is not None:
            return
        mid = (self.lo + self.hi) / 2
        fm = _uni_eval(self.defining, mid)
        if fm == 0:
            self.value = mid
            return
        flo = _uni_eval(self.defining, self.lo)
        if (fm > 0) != (flo > 0):
            self.hi = mid
        else:
            self.lo = mid

    def refine_below(self, width: F) -> None:
        while self.value is None and self.hi - self.lo > width:
            self.refine()

    def width(self) -> F:
        lo, hi = self.enclosure()
        return hi - lo

    def __float__(self) -> float:
        lo, hi = self.enclosure()
        return float((lo + hi) / 2)

    def decimal(self, digits: int = 6) -> str:
        self.refine_below(F(1, 10 ** (digits + 2)))
        if self.value is not None:
            v = self.value
            if v.denominator == 1:
                return str(v.numerator)
        lo, hi = self.enclosure()
        mid = (lo + hi) / 2
        scaled = mid * 10 ** digits
        rounded = F(round(scaled), 10 ** digits)
        text = f"{float(rounded):.{digits}f}".rstrip("0").rstrip(".")
        return text if text not in ("", "-") else "0"

    def __str__(self) -> str:
        if self.value is not None:
            return str(self.value)
        poly = " + ".join(
            f"{c}*t^{i}" if i else f"{c}"
            for i, c in enumerate(self.defining) if c != 0
        )
        return f"algebraic({poly}, ({self.lo}, {self.hi}))"

    __repr__ = __str__

    # exact order via compare(); mutable, hence unhashable
    def __lt__(self, other):
        return compare(self, other) < 0

    def __le__(self, other):
        return compare(self, other) <= 0

    def __gt__(self, other):
        return compare(self, other) > 0

    def __ge__(self, other):
        return compare(self, other) >= 0

    def __eq__(self, other):
        if not isinstance(other, (AlgebraicNumber, int, F)):
            return NotImplemented
        return compare(self, as_algnum(other)) == 0

    __hash__ = None


def as_algnum(v) -> AlgebraicNumber:
    if isinstance(v, AlgebraicNumber):
        return v
    return AlgebraicNumber.rational(v)


class SamplePoint(tuple):
    """Tuple of per-level values (AlgebraicNumber), extendable level by level."""

    def __new__(cls, values: Iterable = ()):
        return super().__new__(cls, (as_algnum(v) for v in values))

    def prefix(self, i: int) -> "SamplePoint":
        return SamplePoint(self[:i])

    def extended(self, v) -> "SamplePoint":
        return SamplePoint(tuple(self) + (as_algnum(v),))

    @property
    def all_rational(self) -> bool:
        return all(v.is_rational for v in self)

    def key(self) -> tuple:
        return tuple(
            ("q", v.value) if v.is_rational else ("a", id(v)) for v in self
        )

    def __repr__(self) -> str:
        return "(" + ", ".join(str(v) for v in self) + ")"


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------

def compare(a: AlgebraicNumber, b: AlgebraicNumber) -> int:
    """Exact trichotomy: -1, 0, or +1."""
    a, b = as_algnum(a), as_algnum(b)
    if a is b:
        return 0
    if a.is_rational and b.is_rational:
        return -1 if a.value < b.value else (1 if a.value > b.value else 0)
    if a.is_rational:
        return -_cmp_rational(b, a.value)
    if b.is_rational:
        return _cmp_rational(a, b.value)
    # both algebraic: equality via gcd of defining polynomials
    g = _uni_gcd(list(a.defining), list(b.defining))
    if len(g) > 1 and _shared_root_in_overlap(g, a, b):
        return 0
    while True:
        alo, ahi = a.enclosure()
        blo, bhi = b.enclosure()
        if ahi < blo:
            return -1
        if bhi < alo:
            return 1
        if a.is_rational and b.is_rational:
            return compare(a, b)
        a.refine()
        b.refine()


def _cmp_rational(a: AlgebraicNumber, r: F) -> int:
    """Compare algebraic a against rational r."""
    if a.is_rational:
        return -1 if a.value < r else (1 if a.value > r else 0)
    lo, hi = a.enclosure()
    if lo < r < hi and _uni_eval(a.defining, r) == 0:
        return 0
    while True:
        lo, hi = a.enclosure()
        if hi <= r:
            return -1
        if lo >= r:
            return 1
        if a.is_rational:
            return _cmp_rational(a, r)
        a.refine()


def _shared_root_in_overlap(g: list[F], a: AlgebraicNumber, b: AlgebraicNumber) -> bool:
    for entry in isolate_coeffs(g):
        rho = _entry_to_number(g, entry)
        if _is_same_root(rho, a) and _is_same_root(rho, b):
            return True
    return False


def _is_same_root(rho: AlgebraicNumber, a: AlgebraicNumber) -> bool:
    """Is rho (a root of a divisor of a.defining) equal to a?

    a's isolating interval is held fixed while rho's enclosure shrinks: rho is
    a root of a.defining, so it either is the unique root inside a's interval
    (i.e. equals a) or lies outside the closed interval entirely.
    """
    if a.is_rational:
        if rho.is_rational:
            return rho.value == a.value
        return _cmp_rational(rho, a.value) == 0
    if rho.is_rational:
        lo, hi = a.enclosure()
        return lo < rho.value < hi and _uni_eval(a.defining, rho.value) == 0
    while True:
        rlo, rhi = rho.enclosure()
        alo, ahi = a.enclosure()
        if rhi < alo or ahi < rlo:
            return False
        if alo < rlo and rhi < ahi:
            return True
        if rho.is_rational:
            return _is_same_root(rho, a)
        rho.refine()


def _entry_to_number(coeffs: Sequence[F], entry: tuple) -> AlgebraicNumber:
    if entry[0] == "rat":
        return AlgebraicNumber.rational(entry[1])
    return AlgebraicNumber.algebraic(list(coeffs), entry[1], entry[2])


def isolate_roots(p: Polynomial, level: int | None = None, ws: Workspace | None = None) -> list[AlgebraicNumber]:
    """Sorted distinct real roots of a univariate polynomial (empty for constants)."""
    if p.is_zero():
        raise ValueError("cannot isolate roots of the zero polynomial")
    with maybe_timed(ws):
        if p.is_constant():
            return []
        coeffs = p.univariate_coeffs()
        sq = _uni_sqfree([F(c) for c in coeffs])
        return [_entry_to_number(sq, e) for e in isolate_coeffs(sq)]


# ---------------------------------------------------------------------------
# interval arithmetic enclosures
# ---------------------------------------------------------------------------

def _ival_mul(a: tuple[F, F], b: tuple[F, F]) -> tuple[F, F]:
    products = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return (min(products), max(products))

def _ival_pow(a: tuple[F, F], k: int) -> tuple[F, F]:
    out = (F(1), F(1))
    base = a
    while k:
        if k & 1:
            out = _ival_mul(out, base)
        base = _ival_mul(base, base)
        k >>= 1
    return out

def poly_enclosure(p: Polynomial, encl: Sequence[tuple[F, F]]) -> tuple[F, F]:
    """Interval evaluation of p over per-level enclosures (1-based levels)."""
    lo_t, hi_t = F(0), F(0)
    for e, c in p.terms.items():
        term = (F(1), F(1))
        for i, d in enumerate(e):
            if d:
                term = _ival_mul(term, _ival_pow(encl[i], d))
        t0, t1 = term[0] * c, term[1] * c
        if t0 > t1:
            t0, t1 = t1, t0
        lo_t += t0
        hi_t += t1
    return (lo_t, hi_t)


# ---------------------------------------------------------------------------
# exact evaluation at sample points via resultant elimination
# ---------------------------------------------------------------------------

_EXT_ORDERS: dict[tuple, VarOrder] = {}

def _extended_order(order: VarOrder) -> VarOrder:
    key = order.names
    ext = _EXT_ORDERS.get(key)
    if ext is None:
        ext = VarOrder(list(order.names) + ["_y"])
        _EXT_ORDERS[key] = ext
    return ext

def _lift(p: Polynomial, ext: VarOrder) -> Polynomial:
    return Polynomial(ext, {e + (0,): c for e, c in p.terms.items()})

def _defining_poly(ext: VarOrder, level: int, coeffs: Sequence[F]) -> Polynomial:
    terms = {}
    for d, c in enumerate(coeffs):
        if c:
            e = [0] * ext.n
            e[level - 1] = d
            terms[tuple(e)] = c
    return Polynomial(ext, terms)

def _split_sample(p: Polynomial, s: Sequence[AlgebraicNumber], upto: int):
    """Substitute the rational coordinates of s[:upto]; return (poly, algebraic coords)."""
    rat = {}
    alg = {}
    for k in range(min(upto, len(s))):
        v = s[k]
        if v.is_rational:
            rat[k + 1] = v.value
        else:
            alg[k + 1] = v
    return p.subs_rational(rat), alg

def _eliminate(poly: Polynomial, alg: dict[int, AlgebraicNumber]) -> Polynomial:
    """Resultant out every algebraic coordinate level against its defining polynomial."""
    ext = poly.order
    for lvl, num in alg.items():
        if poly.degree(lvl) <= 0:
            continue
        d = _defining_poly(ext, lvl, num.defining)
        poly = resultant(poly, d, lvl)
        if poly.is_zero():
            raise ArithmeticError("degenerate elimination")  # cannot happen for y-chains
    return poly


def _value_eliminant(p: Polynomial, s: Sequence[AlgebraicNumber]) -> list[F]:
    """Nonzero univariate V(y) with p(s) among its roots (all coords of p assigned)."""
    sub, alg = _split_sample(p, s, len(s))
    ext = _extended_order(p.order)
    y = ext.var(ext.n)
    t = y - _lift(sub, ext)
    t = _eliminate(t, alg)
    coeffs = [c.constant_value() if c.level == 0 else None for c in t.coeffs_in(ext.n)]
    assert all(c is not None for c in coeffs)
    return _strip([F(c) for c in coeffs])


def _coordinate_enclosures(p: Polynomial, s: Sequence[AlgebraicNumber]) -> list[tuple[F, F]]:
    n = p.order.n
    out = []
    for k in range(n):
        if k < len(s):
            out.append(s[k].enclosure())
        else:
            out.append((F(0), F(0)))
    return out


def sign_at(p: Polynomial, s, ws: Workspace | None = None) -> int:
    """Exact sign of p at a sample assigning all its variables.

    Zero answers are certified exactly by eliminating the algebraic
    coordinates and locating the value among the eliminant's isolated roots.
    """
    s = s if isinstance(s, SamplePoint) else SamplePoint(s)
    if p.level > len(s):
        raise ValueError("sample does not assign all variables of p")
    if p.is_zero():
        return 0
    if ws is not None:
        key = (p.key(), s.prefix(p.level).key())
        hit = ws.sign_cache.get(key)
        if hit is not None:
            return hit
        result = _sign_at_impl(p, s, ws)
        ws.sign_cache[key] = result
        return result
    return _sign_at_impl(p, s, ws)


def _sign_at_impl(p: Polynomial, s: SamplePoint, ws) -> int:
    sub, alg = _split_sample(p, s, p.level)
    if not alg:
        v = sub.constant_value()
        return (v > 0) - (v < 0)
    with maybe_timed(ws):
        # phase 1: adaptive interval refinement
        rounds = 3 if len(alg) == 1 else 8
        for _ in range(rounds):
            enc = _coordinate_enclosures(p, s)
            lo, hi = poly_enclosure(sub, enc)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            for num in alg.values():
                num.refine()
                num.refine()
        if len(alg) == 1:
            # single algebraic coordinate: the value is a univariate instance,
            # so the zero test is a gcd with the defining polynomial
            (lvl, num), = alg.items()
            coeffs = _strip([F(c) for c in _coeffs_of_single_var(sub, lvl)])
            if _univariate_value_is_zero(coeffs, num):
                return 0
            while True:
                enc = _coordinate_enclosures(p, s)
                lo, hi = poly_enclosure(sub, enc)
                if lo > 0:
                    return 1
                if hi < 0:
                    return -1
                num.refine()
        # phase 2: exact zero test by full elimination
        v_coeffs = _value_eliminant(p, s)
        m = 0
        while m < len(v_coeffs) and v_coeffs[m] == 0:
            m += 1
        nonzero_part = v_coeffs[m:]
        if m == 0:
            # V(0) != 0, so the value is nonzero: refine until the sign shows
            while True:
                enc = _coordinate_enclosures(p, s)
                lo, hi = poly_enclosure(sub, enc)
                if lo > 0:
                    return 1
                if hi < 0:
                    return -1
                for num in alg.values():
                    num.refine()
        roots = [_entry_to_number(nonzero_part, e) for e in isolate_coeffs(nonzero_part)] if len(nonzero_part) > 1 else []
        while True:
            enc = _coordinate_enclosures(p, s)
            lo, hi = poly_enclosure(sub, enc)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            if not any(_root_meets(r, lo, hi) for r in roots):
                return 0
            for num in alg.values():
                num.refine()
            for r in roots:
                r.refine()


def _root_meets(r: AlgebraicNumber, lo: F, hi: F) -> bool:
    rlo, rhi = r.enclosure()
    return not (rhi < lo or rlo > hi)


def _univariate_value_is_zero(coeffs: list[F], alpha: AlgebraicNumber) -> bool:
    """Exact test q(alpha) == 0 for a univariate q and algebraic alpha."""
    if not coeffs:
        return True
    if alpha.is_rational:
        return _uni_eval(coeffs, alpha.value) == 0
    rem = _uni_rem(list(coeffs), list(alpha.defining))
    if not rem:
        return True
    g = _uni_gcd(rem, list(alpha.defining))
    if len(g) <= 1:
        return False
    return any(
        _is_same_root(_entry_to_number(g, e), alpha) for e in isolate_coeffs(g)
    )


def eval_partial(p: Polynomial, s, ws: Workspace | None = None):
    """p[s]: the exact value when all of p's variables are assigned, otherwise
    p with the assigned variables substituted.

    With irrational coordinates and unassigned variables remaining, the
    substituted object is returned as a `PartialEvaluation` view (exact
    coefficient values are available on demand)."""
    s = s if isinstance(s, SamplePoint) else SamplePoint(s)
    j = len(s)
    if p.level <= j:
        sub, alg = _split_sample(p, s, p.level)
        if not alg:
            return sub.constant_value()
        return _algebraic_value(p, s, ws)
    rat = {k + 1: v.value for k, v in enumerate(s) if v.is_rational}
    if len(rat) == j:
        return p.subs_rational(rat)
    return PartialEvaluation(p, s)


class PartialEvaluation:
    """View of p with a partially algebraic prefix substituted.

    The variety of the substituted polynomial is preserved by keeping the
    original polynomial and sample; coefficient values of the remaining
    monomials are available exactly on demand."""

    def __init__(self, p: Polynomial, s: SamplePoint):
        self.poly = p
        self.sample = s

    def coefficient_values(self, level: int, ws: Workspace | None = None):
        """Exact values of the coefficients of p w.r.t. the main variable."""
        return [
            eval_partial(c, self.sample, ws) for c in self.poly.coeffs_in(level)
        ]

    def is_nullified(self, ws: Workspace | None = None) -> bool:
        lvl = self.poly.level
        return all(
            c.is_zero() or sign_at(c, self.sample, ws) == 0
            for c in self.poly.coeffs_in(lvl)
        )

    def __repr__(self):
        return f"PartialEvaluation({self.poly}, {self.sample})"


def _algebraic_value(p: Polynomial, s: SamplePoint, ws) -> AlgebraicNumber:
    """Exact value p(s) as an algebraic number (may come out rational)."""
    sgn = sign_at(p, s, ws)
    if sgn == 0:
        return AlgebraicNumber.rational(0)
    with maybe_timed(ws):
        v_coeffs = _uni_sqfree(_value_eliminant(p, s))
        roots = [_entry_to_number(v_coeffs, e) for e in isolate_coeffs(v_coeffs)]
        sub, alg = _split_sample(p, s, p.level)
        while True:
            enc = _coordinate_enclosures(p, s)
            lo, hi = poly_enclosure(sub, enc)
            inside = [r for r in roots if _root_meets(r, lo, hi)]
            if len(inside) == 1:
                return inside[0]
            for num in alg.values():
                num.refine()
            for r in roots:
                r.refine()


# ---------------------------------------------------------------------------
# roots of p(s) in its main variable, s possibly algebraic
# ---------------------------------------------------------------------------

def roots_at_sample(p: Polynomial, s, ws: Workspace | None = None):
    """Sorted real roots of the univariate instance p(s); NULLIFIED if p(s) == 0.

    p has level i, s assigns levels 1..i-1. The returned numbers carry
    square-free rational defining polynomials even when s has algebraic
    coordinates (obtained by resultant elimination, then validated exactly).
    """
    s = s if isinstance(s, SamplePoint) else SamplePoint(s)
    i = p.level
    if i == 0:
        return [] if not p.is_zero() else NULLIFIED
    if len(s) < i - 1:
        raise ValueError("sample too short for the level of p")
    s = s.prefix(i - 1)
    if ws is not None:
        key = (p.key(), s.key())
        hit = ws.root_cache.get(key)
        if hit is not None:
            return hit
        result = _roots_at_sample_impl(p, s, i, ws)
        ws.root_cache[key] = result
        return result
    return _roots_at_sample_impl(p, s, i, ws)


def _roots_at_sample_impl(p: Polynomial, s: SamplePoint, i: int, ws):
    sub, alg = _split_sample(p, s, i - 1)
    if not alg:
        if sub.is_zero():
            return NULLIFIED
        if sub.degree(i) <= 0:
            return []
        return isolate_roots(sub, i, ws)
    with maybe_timed(ws):
        coeff_polys = sub.coeffs_in(i)
        # nullification: every coefficient must vanish at s
        enc = _coordinate_enclosures(p, s)
        maybe_null = True
        for c in coeff_polys:
            lo, hi = poly_enclosure(c, enc)
            if lo > 0 or hi < 0:
                maybe_null = False
                break
        if maybe_null and all(
            c.is_zero() or sign_at(c, s, ws) == 0 for c in coeff_polys
        ):
            return NULLIFIED
        # candidate roots from the eliminant of y - p
        ext = _extended_order(p.order)
        y = ext.var(ext.n)
        t = y - _lift(sub, ext)
        u = _eliminate(t, alg)
        y_coeffs = u.coeffs_in(ext.n)
        cand_poly = next(c for c in y_coeffs if not c.is_zero())
        if cand_poly.degree(i) <= 0:
            return []
        cand_coeffs = _uni_sqfree([F(c) for c in _coeffs_of_single_var(cand_poly, i)])
        candidates = [_entry_to_number(cand_coeffs, e) for e in isolate_coeffs(cand_coeffs)]
        roots = []
        for cand in candidates:
            if _validate_candidate(p, s, cand, ws):
                roots.append(cand)
        return roots


def _validate_candidate(p: Polynomial, s: SamplePoint, cand: AlgebraicNumber, ws) -> bool:
    """Is the candidate a real root of the instance p(s)?

    The instance's roots are among the candidate polynomial's roots, so a
    sign change of p(s) across the candidate's isolating interval certifies
    it cheaply; only sign-preserving (even-multiplicity) candidates need the
    exact elimination test.
    """
    if cand.is_rational:
        return sign_at(p, s.extended(cand), ws) == 0
    lo, hi = cand.enclosure()
    sl = sign_at(p, s.extended(lo), ws)
    sr = sign_at(p, s.extended(hi), ws)
    if sl == 0 or sr == 0:
        # interval endpoints are never roots of the candidate polynomial,
        # hence never roots of the instance; defensive fallback only
        return _is_root_of_instance(p, s, cand, ws)
    if sl != sr:
        return True
    return _is_root_of_instance(p, s, cand, ws)


def _coeffs_of_single_var(p: Polynomial, level: int) -> list[F]:
    out = [F(0)] * (p.degree(level) + 1)
    i = level - 1
    for e, c in p.terms.items():
        if any(d and j != i for j, d in enumerate(e)):
            raise ValueError("polynomial is not univariate in the expected variable")
        out[e[i]] = c
    return _strip(out)


def _is_root_of_instance(p: Polynomial, s: SamplePoint, cand: AlgebraicNumber, ws) -> bool:
    extended = s.extended(cand)
    # cheap interval rejection first
    sub, alg = _split_sample(p, extended, p.level)
    if not alg:
        return sub.constant_value() == 0
    enc = _coordinate_enclosures(p, extended)
    lo, hi = poly_enclosure(sub, enc)
    if lo > 0 or hi < 0:
        return False
    return sign_at(p, extended, ws) == 0


# ---------------------------------------------------------------------------
# deterministic rational selection
# ---------------------------------------------------------------------------

def pick_rational(lo, hi, lo_strict: bool = True, hi_strict: bool = True) -> F:
    """Deterministic smallest-denominator rational in the interval.

    `lo`/`hi` may be None for an infinite end (always strict). Ties on the
    numerator cannot occur once the interval excludes 0; 0 and integers are
    preferred by minimality. Raises ValueError on an empty interval.
    """
    lo = None if lo is None else as_algnum(lo)
    hi = None if hi is None else as_algnum(hi)
    if lo is not None and hi is not None:
        c = compare(lo, hi)
        if c > 0 or (c == 0 and (lo_strict or hi_strict)):
            raise ValueError("empty interval")
        if c == 0:
            if lo.is_rational:
                return lo.value
            raise ValueError("degenerate irrational interval")
    # prefer 0
    if _admits(lo, F(0), lo_strict, True) and _admits(hi, F(0), hi_strict, False):
        return F(0)
    # half-infinite intervals contain an integer: pick the one closest to 0
    if lo is None:
        return F(_greatest_numerator(hi, 1, hi_strict))
    if hi is None:
        return F(_least_numerator(lo, 1, lo_strict))
    # both bounds finite and on the same side of 0
    if _admits(hi, F(0), True, False):  # entirely negative: mirror
        return -_stern_brocot(_negated_number(hi), _negated_number(lo), hi_strict, lo_strict)
    return _stern_brocot(lo, hi, lo_strict, hi_strict)


def _negated_number(v: AlgebraicNumber) -> AlgebraicNumber:
    if v.is_rational:
        return AlgebraicNumber.rational(-v.value)
    mirrored = [c if i % 2 == 0 else -c for i, c in enumerate(v.defining)]
    return AlgebraicNumber.algebraic(mirrored, -v.hi, -v.lo)


def _stern_brocot(lo: AlgebraicNumber, hi: AlgebraicNumber, lo_strict: bool, hi_strict: bool) -> F:
    """Smallest-denominator rational in a nonnegative bounded interval.

    Standard mediant descent with run acceleration: consecutive steps toward
    the same side are taken as one jump found by exponential probing plus
    binary search, so tight intervals cost O(log^2) exact comparisons rather
    than one comparison per denominator.
    """

    def above_lo(p: int, q: int) -> bool:
        c = _cmp_rational(lo, F(p, q))
        return c < 0 or (c == 0 and not lo_strict)

    def below_hi(p: int, q: int) -> bool:
        c = _cmp_rational(hi, F(p, q))
        return c > 0 or (c == 0 and not hi_strict)

    pl, ql, pr, qr = 0, 1, 1, 0
    for _ in range(10_000):
        pm, qm = pl + pr, ql + qr
        if not above_lo(pm, qm):
            # mediant at or below the lower bound: jump right as far as the
            # walk would keep failing the same test
            t = _last_true(lambda t: not above_lo(pl + t * pr, ql + t * qr))
            pl, ql = pl + t * pr, ql + t * qr
        elif not below_hi(pm, qm):
            t = _last_true(lambda t: not below_hi(pr + t * pl, qr + t * ql))
            pr, qr = pr + t * pl, qr + t * ql
        else:
            return F(pm, qm)
    raise RuntimeError("mediant descent failed to terminate")


def _last_true(pred) -> int:
    """Largest t >= 1 with pred(t) true; pred is true at 1 and eventually false."""
    t = 1
    while pred(2 * t):
        t *= 2
    lo_t, hi_t = t, 2 * t  # pred(lo_t) true, pred(hi_t) false
    while hi_t - lo_t > 1:
        mid = (lo_t + hi_t) // 2
        if pred(mid):
            lo_t = mid
        else:
            hi_t = mid
    return lo_t


def _admits(bound, v: F, strict: bool, is_lower: bool) -> bool:
    if bound is None:
        return True
    c = compare(bound, AlgebraicNumber.rational(v))
    if is_lower:
        return c < 0 or (c == 0 and not strict)
    return c > 0 or (c == 0 and not strict)


def _floor_times(bound: AlgebraicNumber, q: int) -> tuple[int, bool]:
    """(floor(q*bound), exact?) by enclosure refinement with exact tie checks."""
    while True:
        # refinement may discover rationality, so re-check every round
        if bound.is_rational:
            v = bound.value * q
            fl = v.numerator // v.denominator
            return fl, fl == v
        lo, hi = bound.enclosure()
        klo = (lo * q).__floor__()
        khi = (hi * q).__floor__()
        if klo == khi:
            return klo, False
        if khi - klo == 1:
            c = _cmp_rational(bound, F(khi, q))
            if c == 0:
                return khi, True
            return (klo, False) if c < 0 else (khi, False)
        bound.refine()


def _least_numerator(bound: AlgebraicNumber, q: int, strict: bool):
    """Smallest integer a with a/q inside the lower bound."""
    fl, exact = _floor_times(bound, q)
    if exact and not strict:
        return fl
    return fl + 1


def _greatest_numerator(bound: AlgebraicNumber, q: int, strict: bool):
    """Largest integer a with a/q inside the upper bound."""
    fl, exact = _floor_times(bound, q)
    if exact:
        return fl if not strict else fl - 1
    return fl
