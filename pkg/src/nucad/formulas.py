"""Formulas over polynomial constraints: prenexing, evaluation, implicants.

Constraints are normalized to `p ~ 0` with `p` integer-primitive and positive
leading coefficient; the relation is flipped when normalization negates the
polynomial, so syntactically different spellings of the same constraint
compare equal.

`evaluate` decides phi[s] in two stages. Three-valued short-circuiting
handles most samples; when that is blocked by undetermined constraints, the
truth value is still forced whenever every consistent assignment of signs to
the undetermined polynomials yields the same result (sign abstraction: each
polynomial's sign is a free variable, no algebraic relations between distinct
polynomials are used). The same abstraction backs implicant minimization.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction as F
from typing import Iterable, Sequence

from .polynomials import Polynomial
from .realroots import SamplePoint, sign_at
from .stats import Workspace


class TruthValue(Enum):
    TRUE = "true"
    FALSE = "false"
    UNDETERMINED = "undetermined"

    def negate(self) -> "TruthValue":
        if self is TruthValue.TRUE:
            return TruthValue.FALSE
        if self is TruthValue.FALSE:
            return TruthValue.TRUE
        return self


class Rel(Enum):
    EQ = "="
    LE = "<="
    GE = ">="
    NE = "!="
    LT = "<"
    GT = ">"

    def holds(self, sign: int) -> bool:
        return _REL_HOLDS[self](sign)

    def flipped(self) -> "Rel":
        return {
            Rel.EQ: Rel.EQ, Rel.NE: Rel.NE,
            Rel.LE: Rel.GE, Rel.GE: Rel.LE,
            Rel.LT: Rel.GT, Rel.GT: Rel.LT,
        }[self]

    def negated(self) -> "Rel":
        return {
            Rel.EQ: Rel.NE, Rel.NE: Rel.EQ,
            Rel.LE: Rel.GT, Rel.GT: Rel.LE,
            Rel.GE: Rel.LT, Rel.LT: Rel.GE,
        }[self]


_REL_HOLDS = {
    Rel.EQ: lambda s: s == 0,
    Rel.LE: lambda s: s <= 0,
    Rel.GE: lambda s: s >= 0,
    Rel.NE: lambda s: s != 0,
    Rel.LT: lambda s: s < 0,
    Rel.GT: lambda s: s > 0,
}


class Constraint:
    """Normalized polynomial constraint `poly rel 0`."""

    __slots__ = ("poly", "rel")

    def __init__(self, poly: Polynomial, rel: Rel):
        canon = poly.primitive()
        if not poly.is_zero():
            # primitive() may negate; detect and flip the relation
            lead = poly.terms[poly.lex_leading()]
            if lead < 0:
                rel = rel.flipped()
        self.poly = canon
        self.rel = rel

    @property
    def level(self) -> int:
        return self.poly.level

    def key(self) -> tuple:
        return (self.poly.key(), self.rel.value)

    def __eq__(self, other):
        return isinstance(other, Constraint) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def eval_sign(self, sign: int) -> bool:
        return self.rel.holds(sign)

    def __str__(self):
        return f"{self.poly} {self.rel.value} 0"

    __repr__ = __str__


# -- formula nodes -----------------------------------------------------------

@dataclass(frozen=True)
class Top:
    def __str__(self):
        return "true"

@dataclass(frozen=True)
class Bottom:
    def __str__(self):
        return "false"

@dataclass(frozen=True)
class Atom:
    constraint: Constraint

    def __str__(self):
        return f"({self.constraint})"

@dataclass(frozen=True)
class Not:
    arg: "Formula"

    def __str__(self):
        return f"(not {self.arg})"

@dataclass(frozen=True)
class And:
    args: tuple

    def __str__(self):
        return "(and " + " ".join(str(a) for a in self.args) + ")"

@dataclass(frozen=True)
class Or:
    args: tuple

    def __str__(self):
        return "(or " + " ".join(str(a) for a in self.args) + ")"

@dataclass(frozen=True)
class Quant:
    quantifier: str  # "exists" | "forall"
    level: int
    body: "Formula"

    def __str__(self):
        return f"({self.quantifier} x{self.level} {self.body})"


Formula = Top | Bottom | Atom | Not | And | Or | Quant


def f_and(args: Iterable[Formula]) -> Formula:
    args = tuple(args)
    if not args:
        return Top()
    if len(args) == 1:
        return args[0]
    return And(args)

def f_or(args: Iterable[Formula]) -> Formula:
    args = tuple(args)
    if not args:
        return Bottom()
    if len(args) == 1:
        return args[0]
    return Or(args)

def f_not(arg: Formula) -> Formula:
    if isinstance(arg, Top):
        return Bottom()
    if isinstance(arg, Bottom):
        return Top()
    if isinstance(arg, Not):
        return arg.arg
    return Not(arg)


_CONSTRAINTS_CACHE: dict[int, tuple] = {}


def constraints_of(f: Formula) -> list[Constraint]:
    """All constraints occurring in f, in syntactic order, deduplicated."""
    entry = _CONSTRAINTS_CACHE.get(id(f))
    if entry is not None and entry[0] is f:
        return entry[1]
    seen: dict = {}
    def walk(g):
        if isinstance(g, Atom):
            seen.setdefault(g.constraint.key(), g.constraint)
        elif isinstance(g, Not):
            walk(g.arg)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                walk(a)
        elif isinstance(g, Quant):
            walk(g.body)
    walk(f)
    out = list(seen.values())
    if len(_CONSTRAINTS_CACHE) > 512:
        _CONSTRAINTS_CACHE.clear()
    _CONSTRAINTS_CACHE[id(f)] = (f, out)
    return out


def matrix_of(f: Formula) -> Formula:
    while isinstance(f, Quant):
        f = f.body
    return f


def prefix_of(f: Formula) -> list[tuple[str, int]]:
    out = []
    while isinstance(f, Quant):
        out.append((f.quantifier, f.level))
        f = f.body
    return out


def free_levels(f: Formula) -> set[int]:
    bound = {lvl for _, lvl in prefix_of(f)}
    out: set[int] = set()
    for c in constraints_of(f):
        for lvl in c.poly.variables():
            if lvl not in bound:
                out.add(lvl)
    return out


# -- prenex normal form --------------------------------------------------------

class PrenexError(ValueError):
    pass


def to_prenex(f: Formula) -> Formula:
    """Equivalent prenex formula: negations pushed to literals, quantifier
    prefix extracted left-to-right, and bound variables renumbered so they
    follow every free variable in the global order."""
    _check_bindings(f)
    g = _nnf(f, False)
    prefix, matrix = _pull_quantifiers(g)
    bound_levels = [lvl for _, lvl in prefix]
    all_levels = set()
    for c in constraints_of(matrix):
        all_levels.update(c.poly.variables())
    free = sorted(all_levels - set(bound_levels))
    if free and bound_levels and max(free) > min(bound_levels):
        perm = {}
        nxt = 1
        for lvl in free:
            perm[lvl] = nxt
            nxt += 1
        for lvl in bound_levels:
            perm[lvl] = nxt
            nxt += 1
        matrix = _remap_formula(matrix, perm)
        prefix = [(q, perm[lvl]) for q, lvl in prefix]
    result = matrix
    for q, lvl in reversed(prefix):
        result = Quant(q, lvl, result)
    return result


def _check_bindings(f: Formula):
    def dups(g, bound):
        if isinstance(g, Quant):
            if g.level in bound:
                raise PrenexError(f"variable x{g.level} bound twice")
            dups(g.body, bound | {g.level})
        elif isinstance(g, Not):
            dups(g.arg, bound)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                dups(a, bound)
    dups(f, frozenset())
    for lvl in _all_binders(f):
        if _occurs_outside(f, lvl):
            raise PrenexError(f"variable x{lvl} is both bound and free")


def _all_binders(f: Formula) -> set[int]:
    if isinstance(f, Quant):
        return {f.level} | _all_binders(f.body)
    if isinstance(f, Not):
        return _all_binders(f.arg)
    if isinstance(f, (And, Or)):
        out = set()
        for a in f.args:
            out |= _all_binders(a)
        return out
    return set()


def _occurs_outside(f: Formula, lvl: int, inside: bool = False) -> bool:
    if isinstance(f, Quant):
        return _occurs_outside(f.body, lvl, inside or f.level == lvl)
    if isinstance(f, Not):
        return _occurs_outside(f.arg, lvl, inside)
    if isinstance(f, (And, Or)):
        return any(_occurs_outside(a, lvl, inside) for a in f.args)
    if isinstance(f, Atom):
        return (not inside) and lvl in f.constraint.poly.variables()
    return False


def _nnf(f: Formula, neg: bool) -> Formula:
    if isinstance(f, Top):
        return Bottom() if neg else Top()
    if isinstance(f, Bottom):
        return Top() if neg else Bottom()
    if isinstance(f, Atom):
        return Not(f) if neg else f
    if isinstance(f, Not):
        return _nnf(f.arg, not neg)
    if isinstance(f, And):
        args = tuple(_nnf(a, neg) for a in f.args)
        return Or(args) if neg else And(args)
    if isinstance(f, Or):
        args = tuple(_nnf(a, neg) for a in f.args)
        return And(args) if neg else Or(args)
    if isinstance(f, Quant):
        q = f.quantifier
        if neg:
            q = "forall" if q == "exists" else "exists"
        return Quant(q, f.level, _nnf(f.body, neg))
    raise TypeError(f)


def _pull_quantifiers(f: Formula):
    if isinstance(f, Quant):
        prefix, matrix = _pull_quantifiers(f.body)
        return [(f.quantifier, f.level)] + prefix, matrix
    if isinstance(f, (And, Or)):
        prefix = []
        matrices = []
        for a in f.args:
            p, m = _pull_quantifiers(a)
            prefix.extend(p)
            matrices.append(m)
        node = And(tuple(matrices)) if isinstance(f, And) else Or(tuple(matrices))
        return prefix, node
    if isinstance(f, Not):
        # after NNF the argument is an atom
        return [], f
    return [], f


def _remap_formula(f: Formula, perm: dict[int, int]) -> Formula:
    if isinstance(f, Atom):
        return Atom(Constraint(f.constraint.poly.remap(perm), f.constraint.rel))
    if isinstance(f, Not):
        return Not(_remap_formula(f.arg, perm))
    if isinstance(f, And):
        return And(tuple(_remap_formula(a, perm) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(_remap_formula(a, perm) for a in f.args))
    if isinstance(f, Quant):
        return Quant(f.quantifier, perm[f.level], _remap_formula(f.body, perm))
    return f


# -- evaluation ----------------------------------------------------------------

_SIGN_ENUM_CAP = 8


def evaluate(f: Formula, s, ws: Workspace | None = None) -> TruthValue:
    """phi[s] under three-valued short-circuiting, strengthened by sign
    abstraction over the undetermined polynomials. Quantifiers are ignored:
    any determination of the matrix makes them vacuous."""
    s = s if isinstance(s, SamplePoint) else SamplePoint(s)
    matrix = matrix_of(f)
    if s.all_rational:
        compiled = _compiled(matrix)
        values = tuple(v.value for v in s)
        v = compiled.run(values)
        if v is not None:
            return TruthValue.TRUE if v else TruthValue.FALSE
        return _eval_by_sign_enumeration(matrix, compiled.all_signs(values))
    signs = _determined_signs(matrix, s, ws)
    v = _eval_three_valued(matrix, signs)
    if v is not TruthValue.UNDETERMINED:
        return v
    return _eval_by_sign_enumeration(matrix, signs)


def _determined_signs(matrix: Formula, s: SamplePoint, ws) -> dict:
    if s.all_rational:
        return _compiled(matrix).all_signs(tuple(v.value for v in s))
    signs = {}
    for c in constraints_of(matrix):
        if c.level <= len(s):
            signs[c.poly.key()] = sign_at(c.poly, s, ws)
    return signs


_COMPILED_CACHE: dict[int, tuple] = {}


class _CompiledMatrix:
    """Closure-compiled evaluator for rational sample points.

    Polynomial signs are computed on demand over homogenized integers:
    sign(p(a1/b1, ...)) is the sign of each term c * prod(x_i^e_i) replaced
    by c * prod(a_i^e_i * b_i^(d_i - e_i)) with d_i = deg_i(p), since the
    multiplier prod(b_i^d_i) is positive. Short-circuiting therefore skips
    whole polynomial evaluations.
    """

    __slots__ = ("matrix", "_polys", "_tree")

    def __init__(self, matrix: Formula):
        self.matrix = matrix
        self._polys = {}
        for c in constraints_of(matrix):
            key = c.poly.key()
            if key in self._polys:
                continue
            poly = c.poly
            occ = [(lvl - 1, poly.degree(lvl)) for lvl in poly.variables()]
            terms = []
            for exps, coeff in poly.terms.items():
                assert coeff.denominator == 1  # constraints are integer-primitive
                factors = [(i, exps[i], d - exps[i]) for i, d in occ]
                terms.append((coeff.numerator, factors))
            self._polys[key] = (poly.level, terms)
        self._tree = self._compile(matrix)

    def _compile(self, g):
        if isinstance(g, Top):
            return lambda sign_of: True
        if isinstance(g, Bottom):
            return lambda sign_of: False
        if isinstance(g, Atom):
            key = g.constraint.poly.key()
            holds = _REL_HOLDS[g.constraint.rel]
            def run_atom(sign_of):
                sgn = sign_of(key)
                return None if sgn is None else holds(sgn)
            return run_atom
        if isinstance(g, Not):
            sub = self._compile(g.arg)
            def run_not(sign_of):
                v = sub(sign_of)
                return None if v is None else not v
            return run_not
        if isinstance(g, (And, Or)):
            subs = [self._compile(a) for a in g.args]
            kill = isinstance(g, Or)
            def run_junction(sign_of):
                undet = False
                for sub in subs:
                    v = sub(sign_of)
                    if v is kill:
                        return kill
                    if v is None:
                        undet = True
                return None if undet else not kill
            return run_junction
        if isinstance(g, Quant):
            return self._compile(g.body)
        raise TypeError(g)

    def _make_sign_of(self, values: tuple):
        j = len(values)
        nums = [v.numerator for v in values]
        dens = [v.denominator for v in values]
        pcache: dict = {}
        cache: dict = {}
        polys = self._polys

        def sign_of(key):
            got = cache.get(key, _MISSING)
            if got is not _MISSING:
                return got
            level, terms = polys[key]
            if level > j:
                cache[key] = None
                return None
            acc = 0
            for coeff, factors in terms:
                t = coeff
                for i, e, comp in factors:
                    if e:
                        pk = (i, e)
                        p = pcache.get(pk)
                        if p is None:
                            p = nums[i] ** e
                            pcache[pk] = p
                        t *= p
                    if comp:
                        pk = (-1 - i, comp)
                        p = pcache.get(pk)
                        if p is None:
                            p = dens[i] ** comp
                            pcache[pk] = p
                        t *= p
                acc += t
            sgn = (acc > 0) - (acc < 0)
            cache[key] = sgn
            return sgn

        return sign_of

    def run(self, values: tuple):
        """True / False / None (undetermined) at a rational point."""
        return self._tree(self._make_sign_of(values))

    def all_signs(self, values: tuple) -> dict:
        sign_of = self._make_sign_of(values)
        return {
            key: sgn for key in self._polys
            if (sgn := sign_of(key)) is not None
        }


_MISSING = object()


def _compiled(matrix: Formula) -> _CompiledMatrix:
    entry = _COMPILED_CACHE.get(id(matrix))
    if entry is not None and entry[0] is matrix:
        return entry[1]
    compiled = _CompiledMatrix(matrix)
    if len(_COMPILED_CACHE) > 512:
        _COMPILED_CACHE.clear()
    _COMPILED_CACHE[id(matrix)] = (matrix, compiled)
    return compiled


def _eval_three_valued(f: Formula, signs: dict) -> TruthValue:
    if isinstance(f, Top):
        return TruthValue.TRUE
    if isinstance(f, Bottom):
        return TruthValue.FALSE
    if isinstance(f, Atom):
        sgn = signs.get(f.constraint.poly.key())
        if sgn is None:
            return TruthValue.UNDETERMINED
        return TruthValue.TRUE if f.constraint.eval_sign(sgn) else TruthValue.FALSE
    if isinstance(f, Not):
        return _eval_three_valued(f.arg, signs).negate()
    if isinstance(f, (And, Or)):
        want_kill = TruthValue.FALSE if isinstance(f, And) else TruthValue.TRUE
        saw_undet = False
        for a in f.args:
            v = _eval_three_valued(a, signs)
            if v is want_kill:
                return want_kill
            if v is TruthValue.UNDETERMINED:
                saw_undet = True
        if saw_undet:
            return TruthValue.UNDETERMINED
        return want_kill.negate()
    if isinstance(f, Quant):
        return _eval_three_valued(f.body, signs)
    raise TypeError(f)


def _eval_bool(f: Formula, signs: dict) -> bool:
    v = _eval_three_valued(f, signs)
    assert v is not TruthValue.UNDETERMINED
    return v is TruthValue.TRUE


def _eval_by_sign_enumeration(matrix: Formula, fixed_signs: dict) -> TruthValue:
    """FALSE/TRUE when every sign assignment to the undetermined polynomials
    forces that value; UNDETERMINED otherwise (or when too many to enumerate)."""
    unknown = []
    for c in constraints_of(matrix):
        k = c.poly.key()
        if k not in fixed_signs and k not in unknown:
            unknown.append(k)
    if len(unknown) > _SIGN_ENUM_CAP:
        return TruthValue.UNDETERMINED
    seen_true = seen_false = False
    for combo in itertools.product((-1, 0, 1), repeat=len(unknown)):
        signs = dict(fixed_signs)
        signs.update(zip(unknown, combo))
        if _eval_bool(matrix, signs):
            seen_true = True
        else:
            seen_false = True
        if seen_true and seen_false:
            return TruthValue.UNDETERMINED
    return TruthValue.TRUE if seen_true else TruthValue.FALSE


# -- implicants ------------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    constraint: Constraint
    value: bool  # truth of the constraint at the sample

    def as_formula(self) -> Formula:
        atom = Atom(self.constraint)
        return atom if self.value else Not(atom)

    def __str__(self):
        return str(self.as_formula())


def implicant(f: Formula, s, ws: Workspace | None = None):
    """An implicant of f w.r.t. s: literals over constraints of f, of level
    <= |s|, true at s, that entail f (when f[s] is TRUE) or entail not-f.

    Returns (literals, truth). The literal set is built by recursive descent
    (TRUE conjunctions collect all conjuncts, TRUE disjunctions pick one
    disjunct by lowest max-level, then fewest constraints, then node order;
    dually under negation) and then greedily minimized: a literal is dropped
    when the remaining set still forces f's value under sign abstraction.
    """
    s = s if isinstance(s, SamplePoint) else SamplePoint(s)
    matrix = matrix_of(f)
    signs = _determined_signs(matrix, s, ws)
    v = _eval_three_valued(matrix, signs)
    if v is TruthValue.UNDETERMINED:
        v = _eval_by_sign_enumeration(matrix, signs)
    if v is TruthValue.UNDETERMINED:
        raise ValueError("implicant requires a determined formula value")
    want = v is TruthValue.TRUE
    if _eval_three_valued(matrix, signs) is not TruthValue.UNDETERMINED:
        seed = _descend(matrix, want, signs)
    else:
        seed = [
            Literal(c, c.eval_sign(signs[c.poly.key()]))
            for c in constraints_of(matrix)
            if c.poly.key() in signs
        ]
    literals = _dedup(seed)
    kept = list(literals)
    for lit in literals:
        trial = [l for l in kept if l is not lit]
        if _entails(trial, matrix, want, signs):
            kept = trial
    return kept, v


def implicant_formula(literals: Sequence[Literal]) -> Formula:
    return f_and(l.as_formula() for l in literals)


def _dedup(literals: Iterable[Literal]) -> list[Literal]:
    seen = {}
    for l in literals:
        seen.setdefault(l.constraint.key(), l)
    return list(seen.values())


def _descend(f: Formula, want: bool, signs: dict) -> list[Literal]:
    if isinstance(f, (Top, Bottom)):
        return []
    if isinstance(f, Atom):
        sgn = signs[f.constraint.poly.key()]
        return [Literal(f.constraint, f.constraint.eval_sign(sgn))]
    if isinstance(f, Not):
        return _descend(f.arg, not want, signs)
    if isinstance(f, (And, Or)):
        collect_all = want if isinstance(f, And) else not want
        if collect_all:
            out = []
            for a in f.args:
                out.extend(_descend(a, want, signs))
            return out
        target = TruthValue.TRUE if want else TruthValue.FALSE
        best = None
        for idx, a in enumerate(f.args):
            if _eval_three_valued(a, signs) is target:
                metric = (_max_level(a), len(constraints_of(a)), idx)
                if best is None or metric < best[0]:
                    best = (metric, a)
        assert best is not None
        return _descend(best[1], want, signs)
    raise TypeError(f)


def _max_level(f: Formula) -> int:
    levels = [c.level for c in constraints_of(f)]
    return max(levels) if levels else 0


def _entails(literals: Sequence[Literal], matrix: Formula, want: bool, actual_signs: dict) -> bool:
    """Do the literals force matrix == want under sign abstraction?"""
    allowed: dict = {}
    for c in constraints_of(matrix):
        allowed.setdefault(c.poly.key(), (-1, 0, 1))
    for lit in literals:
        k = lit.constraint.poly.key()
        ok = tuple(
            sgn for sgn in allowed[k]
            if lit.constraint.eval_sign(sgn) == lit.value
        )
        allowed[k] = ok
    keys = list(allowed)
    if len(keys) > _SIGN_ENUM_CAP + 4:
        return False  # conservative: keep the literal
    target = TruthValue.TRUE if want else TruthValue.FALSE
    for combo in itertools.product(*(allowed[k] for k in keys)):
        signs = dict(zip(keys, combo))
        if not _eval_bool(matrix, signs) == (target is TruthValue.TRUE):
            return False
    return True
