"""SMT-LIB-subset frontend: parsing, printing, and instance compilation.

Supported surface: `set-logic` (recorded), `declare-fun`/`declare-const` of
sort Real, `assert` over and/or/not/=> with comparison atoms on polynomial
terms (+, -, *, division by nonzero constants, exact decimal literals),
`exists`/`forall` binders, `check-sat`, and the custom
`(eliminate-quantifiers)` command. Anything non-polynomial is rejected with
a position-annotated error.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as F
from typing import Sequence

from .formulas import (
    And,
    Atom,
    Bottom,
    Constraint,
    Formula,
    Not,
    Or,
    Quant,
    Rel,
    Top,
    constraints_of,
    free_levels,
    matrix_of,
    prefix_of,
    to_prenex,
)
from .polynomials import Polynomial, VarOrder


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line = line
        self.col = col


class UnsupportedError(ParseError):
    pass


@dataclass
class Token:
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == ";":
            while i < len(text) and text[i] != "\n":
                i += 1
        elif ch in "()":
            tokens.append(Token(ch, line, col))
            col += 1
            i += 1
        else:
            start = i
            start_col = col
            while i < len(text) and text[i] not in " \t\r\n();":
                i += 1
                col += 1
            tokens.append(Token(text[start:i], line, start_col))
    return tokens


def _read_sexprs(tokens: list[Token]):
    """Nested lists of Tokens; the head Token of each list is kept for positions."""
    out = []
    stack = [out]
    opens: list[Token] = []
    for tok in tokens:
        if tok.text == "(":
            new: list = [tok]
            stack[-1].append(new)
            stack.append(new)
            opens.append(tok)
        elif tok.text == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", tok.line, tok.col)
            stack.pop()
            opens.pop()
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ParseError("unbalanced '('", opens[-1].line, opens[-1].col)
    return out


@dataclass
class ProblemInstance:
    """A parsed problem: declarations, one asserted formula, requested mode."""

    logic: str | None
    variables: list[str]
    bound_variables: list[str]
    formula: Formula
    mode: str  # "sat" | "qe"
    order: VarOrder

    @property
    def quantified(self) -> bool:
        return bool(prefix_of(to_prenex(self.formula)))

    def free_variable_names(self) -> list[str]:
        pren = to_prenex(self.formula)
        return [self.order.name_of(l) for l in sorted(free_levels(pren))]

    def to_text(self) -> str:
        out = []
        if self.logic:
            out.append(f"(set-logic {self.logic})")
        for name in self.variables:
            out.append(f"(declare-const {name} Real)")
        out.append(f"(assert {formula_to_sexpr(self.formula, self.order)})")
        out.append("(check-sat)" if self.mode == "sat" else "(eliminate-quantifiers)")
        return "\n".join(out) + "\n"


_COMPARISONS = {"<": Rel.LT, "<=": Rel.LE, ">": Rel.GT, ">=": Rel.GE, "=": Rel.EQ}


def parse(text: str) -> ProblemInstance:
    sexprs = _read_sexprs(_tokenize(text))
    declared: list[str] = []
    binders: list[str] = []
    logic = None
    asserts = []
    mode = "sat"
    saw_command = False

    def scan_binders(node):
        if isinstance(node, Token):
            return
        head = node[1] if len(node) > 1 else None
        if isinstance(head, Token) and head.text in ("exists", "forall"):
            if len(node) != 4 or isinstance(node[2], Token):
                raise ParseError(f"malformed {head.text}", head.line, head.col)
            for b in node[2][1:]:
                if isinstance(b, Token) or len(b) != 3:
                    raise ParseError("malformed binder", head.line, head.col)
                name, sort = b[1], b[2]
                if sort.text != "Real":
                    raise UnsupportedError(
                        f"sort {sort.text} (only Real is supported)", sort.line, sort.col
                    )
                if name.text in binders or name.text in declared:
                    raise ParseError(
                        f"variable {name.text} bound or declared twice", name.line, name.col
                    )
                binders.append(name.text)
        for child in node[1:] if not isinstance(node, Token) else ():
            scan_binders(child)

    for cmd in sexprs:
        if isinstance(cmd, Token):
            raise ParseError(f"expected a command, got {cmd.text!r}", cmd.line, cmd.col)
        if len(cmd) < 2 or not isinstance(cmd[1], Token):
            tok = cmd[0]
            raise ParseError("empty command", tok.line, tok.col)
        head = cmd[1]
        name = head.text
        if name == "set-logic":
            logic = cmd[2].text if len(cmd) > 2 else None
        elif name in ("declare-const", "declare-fun"):
            if len(cmd) < 4:
                raise ParseError(f"malformed {name}", head.line, head.col)
            var = cmd[2]
            if name == "declare-fun":
                args = cmd[3]
                if isinstance(args, Token) or len(args) > 1:
                    raise UnsupportedError(
                        "only zero-arity functions are supported", head.line, head.col
                    )
                sort = cmd[4]
            else:
                sort = cmd[3]
            if not isinstance(sort, Token) or sort.text != "Real":
                raise UnsupportedError(
                    "only sort Real is supported", head.line, head.col
                )
            if var.text in declared:
                raise ParseError(f"{var.text} declared twice", var.line, var.col)
            declared.append(var.text)
        elif name == "assert":
            if len(cmd) != 3:
                raise ParseError("assert takes one formula", head.line, head.col)
            scan_binders(cmd[2])
            asserts.append(cmd[2])
        elif name == "check-sat":
            mode = "sat"
            saw_command = True
        elif name == "eliminate-quantifiers":
            mode = "qe"
            saw_command = True
        elif name in ("exit", "set-info", "set-option", "get-model"):
            continue
        else:
            raise UnsupportedError(f"unsupported command {name}", head.line, head.col)

    names = declared + binders
    if not names:
        names = ["_x1"]
    order = VarOrder(names)
    env = {n: order.level_of(n) for n in names}
    parts = [_build_formula(a, order, env) for a in asserts]
    formula: Formula = parts[0] if len(parts) == 1 else (And(tuple(parts)) if parts else Top())
    return ProblemInstance(logic, declared, binders, formula, mode, order)


def _build_formula(node, order: VarOrder, env: dict) -> Formula:
    if isinstance(node, Token):
        if node.text == "true":
            return Top()
        if node.text == "false":
            return Bottom()
        raise ParseError(f"expected a formula, got {node.text!r}", node.line, node.col)
    head = node[1]
    if not isinstance(head, Token):
        raise ParseError("expected an operator", node[0].line, node[0].col)
    op = head.text
    args = node[2:]
    if op == "and":
        return And(tuple(_build_formula(a, order, env) for a in args))
    if op == "or":
        return Or(tuple(_build_formula(a, order, env) for a in args))
    if op == "not":
        if len(args) != 1:
            raise ParseError("not takes one argument", head.line, head.col)
        return Not(_build_formula(args[0], order, env))
    if op == "=>":
        if len(args) < 2:
            raise ParseError("=> takes two arguments", head.line, head.col)
        left = args[:-1]
        rhs = _build_formula(args[-1], order, env)
        lhs = And(tuple(_build_formula(a, order, env) for a in left)) if len(left) > 1 \
            else _build_formula(left[0], order, env)
        return Or((Not(lhs), rhs))
    if op in ("exists", "forall"):
        body = _build_formula(node[3], order, env)
        for b in reversed(node[2][1:]):
            body = Quant("exists" if op == "exists" else "forall",
                         order.level_of(b[1].text), body)
        return body
    if op in _COMPARISONS:
        if len(args) < 2:
            raise ParseError(f"{op} takes at least two arguments", head.line, head.col)
        terms = [_build_term(a, order, env) for a in args]
        rel = _COMPARISONS[op]
        atoms = [
            Atom(Constraint(lhs - rhs, rel)) for lhs, rhs in zip(terms, terms[1:])
        ]
        return atoms[0] if len(atoms) == 1 else And(tuple(atoms))
    if op == "distinct":
        raise UnsupportedError("distinct is not supported", head.line, head.col)
    raise UnsupportedError(f"unsupported operator {op}", head.line, head.col)


def _build_term(node, order: VarOrder, env: dict) -> Polynomial:
    if isinstance(node, Token):
        text = node.text
        if text in env:
            return order.var(env[text])
        value = _numeral(text)
        if value is not None:
            return order.const(value)
        raise ParseError(f"unknown symbol {text!r}", node.line, node.col)
    head = node[1]
    if not isinstance(head, Token):
        raise ParseError("expected a term operator", node[0].line, node[0].col)
    op = head.text
    args = [_build_term(a, order, env) for a in node[2:]]
    if op == "+":
        total = order.const(0)
        for a in args:
            total = total + a
        return total
    if op == "-":
        if len(args) == 1:
            return -args[0]
        total = args[0]
        for a in args[1:]:
            total = total - a
        return total
    if op == "*":
        total = order.const(1)
        for a in args:
            total = total * a
        return total
    if op == "/":
        if len(args) != 2:
            raise ParseError("/ takes two arguments", head.line, head.col)
        num, den = args
        if not den.is_constant():
            raise UnsupportedError(
                "division by a non-constant term", head.line, head.col
            )
        d = den.constant_value()
        if d == 0:
            raise ParseError("division by zero", head.line, head.col)
        return num * (1 / d)
    raise UnsupportedError(f"unsupported term operator {op}", head.line, head.col)


def _numeral(text: str):
    """Exact rational from an SMT-LIB numeral or decimal literal."""
    body = text
    neg = body.startswith("-")
    if neg:
        body = body[1:]
    if not body:
        return None
    if body.isdigit():
        v = F(int(body))
        return -v if neg else v
    if "." in body:
        whole, _, frac = body.partition(".")
        if (whole.isdigit() or whole == "") and frac.isdigit():
            scale = 10 ** len(frac)
            v = F(int(whole or "0") * scale + int(frac), scale)
            return -v if neg else v
    return None


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def rational_to_sexpr(v: F) -> str:
    if v.denominator == 1:
        return str(v.numerator) if v >= 0 else f"(- {-v.numerator})"
    body = f"(/ {abs(v.numerator)} {v.denominator})"
    return body if v >= 0 else f"(- {body})"


def poly_to_sexpr(p: Polynomial, order: VarOrder) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for exps in sorted(p.terms, reverse=True):
        c = p.terms[exps]
        factors = []
        for i, d in enumerate(exps):
            factors.extend([order.names[i]] * d)
        if not factors:
            parts.append(rational_to_sexpr(c))
        elif c == 1 and len(factors) == 1:
            parts.append(factors[0])
        elif c == 1:
            parts.append("(* " + " ".join(factors) + ")")
        else:
            parts.append("(* " + " ".join([rational_to_sexpr(c)] + factors) + ")")
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def formula_to_sexpr(f: Formula, order: VarOrder) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Atom):
        c = f.constraint
        if c.rel is Rel.NE:
            return f"(not (= {poly_to_sexpr(c.poly, order)} 0))"
        return f"({c.rel.value} {poly_to_sexpr(c.poly, order)} 0)"
    if isinstance(f, Not):
        return f"(not {formula_to_sexpr(f.arg, order)})"
    if isinstance(f, And):
        return "(and " + " ".join(formula_to_sexpr(a, order) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(formula_to_sexpr(a, order) for a in f.args) + ")"
    if isinstance(f, Quant):
        name = order.name_of(f.level)
        return f"({f.quantifier} (({name} Real)) {formula_to_sexpr(f.body, order)})"
    raise TypeError(f)


# ---------------------------------------------------------------------------
# compilation to a solver-ready formula
# ---------------------------------------------------------------------------

def compile_instance(instance: ProblemInstance, var_order: str = "input"):
    """(prenex formula, order, free levels) with the chosen variable order.

    "input" keeps declaration order; "degree" sorts, within the free block
    and within each quantifier block, by ascending total degree across the
    constraints (ties by original position).
    """
    pren = to_prenex(instance.formula)
    order = instance.order
    if var_order == "input":
        return pren, order, sorted(free_levels(pren))
    if var_order != "degree":
        raise ValueError(f"unknown variable order {var_order!r}")
    prefix = prefix_of(pren)
    matrix = matrix_of(pren)
    free = sorted(free_levels(pren))
    degsum = {lvl: 0 for lvl in range(1, order.n + 1)}
    for c in constraints_of(matrix):
        for lvl in c.poly.variables():
            degsum[lvl] += c.poly.degree(lvl)
    merged: list[tuple[str | None, list[int]]] = [(None, list(free))]
    for q, lvl in prefix:
        if merged[-1][0] == q:
            merged[-1][1].append(lvl)
        else:
            merged.append((q, [lvl]))
    perm: dict[int, int] = {}
    nxt = 1
    for _, lvls in merged:
        for lvl in sorted(lvls, key=lambda l: (degsum[l], l)):
            perm[lvl] = nxt
            nxt += 1
    for lvl in range(1, order.n + 1):  # declared but unused variables
        if lvl not in perm:
            perm[lvl] = nxt
            nxt += 1
    names = [None] * order.n
    for old, new in perm.items():
        names[new - 1] = order.names[old - 1]
    new_order = VarOrder(names)
    new_matrix = _remap(matrix, perm, new_order)
    out: Formula = new_matrix
    new_prefix = [(q, perm[lvl]) for q, lvl in prefix]
    for q, lvl in reversed(new_prefix):
        out = Quant(q, lvl, out)
    return out, new_order, sorted(perm[l] for l in free)


def _remap(f: Formula, perm: dict, order: VarOrder) -> Formula:
    if isinstance(f, Atom):
        return Atom(Constraint(f.constraint.poly.remap(perm, order), f.constraint.rel))
    if isinstance(f, Not):
        return Not(_remap(f.arg, perm, order))
    if isinstance(f, And):
        return And(tuple(_remap(a, perm, order) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(_remap(a, perm, order) for a in f.args))
    if isinstance(f, Quant):
        return Quant(f.quantifier, perm[f.level], _remap(f.body, perm, order))
    return f
