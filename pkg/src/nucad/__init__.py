"""Exact non-uniform cylindrical algebraic decomposition for nonlinear real
arithmetic: satisfiability of quantifier-free formulas, decision of prenex
sentences, and real quantifier elimination."""

from .polynomials import Polynomial, VarOrder, discriminant, resultant, square_free_part
from .realroots import (
    NULLIFIED,
    AlgebraicNumber,
    SamplePoint,
    compare,
    eval_partial,
    isolate_roots,
    pick_rational,
    roots_at_sample,
    sign_at,
)
from .formulas import (
    And,
    Atom,
    Bottom,
    Constraint,
    Not,
    Or,
    Quant,
    Rel,
    Top,
    TruthValue,
    evaluate,
    implicant,
    to_prenex,
)
from .cells import (
    IndexedRootExpression,
    NullificationFailure,
    ProjectionSet,
    SymbolicInterval,
    choose_interval,
    compute_cell_projection,
    construct_cell,
)
from .solver import (
    Aborted,
    Leaf,
    Node,
    Options,
    Solver,
    insert_path,
    split_region,
    split_region_improved,
    tree_to_obj,
    tree_to_text,
)
from .encoding import collect_stats, emit_formula, merge_tree, sf_evaluate, sf_to_text
from .smtlib import ParseError, ProblemInstance, UnsupportedError, compile_instance, parse
from .verify import GridSpec, check_decomposition, oracle_1d, oracle_quantified
from .stats import SolveStats, Workspace

__version__ = "0.1.0"
