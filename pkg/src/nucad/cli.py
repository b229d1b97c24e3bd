"""Command line interface.

Subcommands: solve (satisfiability of the existential closure), decide
(truth of a sentence), qe (quantifier elimination), plot (SVG of a 1D/2D
decomposition), stats (CSV statistics of a run).

Exit codes: 0 success, 1 usage or parse error, 2 unsupported input or
nullification failure, 3 resource budget exhausted.
"""
from __future__ import annotations

import argparse
import sys

from .cells import NullificationFailure
from .encoding import (
    collect_stats,
    emit_formula,
    merge_tree,
    sf_to_smtlib,
    sf_to_text,
    stats_csv,
    stats_text,
)
from .formulas import Quant, free_levels, prefix_of, to_prenex
from .plot import render_svg, viewport_for
from .smtlib import ParseError, UnsupportedError, compile_instance, parse
from .solver import Aborted, Options, Solver, tree_to_text

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNSUPPORTED = 2
EXIT_BUDGET = 3


def _arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nucad",
        description="Exact decision procedures and quantifier elimination "
        "for nonlinear real arithmetic via non-uniform cylindrical "
        "algebraic decomposition.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="SMT-LIB input file, or '-' for stdin")
        p.add_argument("--split", choices=["classic", "improved"], default="improved")
        p.add_argument("--var-order", choices=["input", "degree"], default="input")
        p.add_argument("--budget", type=int, default=None, help="max explored regions")
        p.add_argument("--timeout", type=float, default=None, help="wall-clock seconds")
        p.add_argument("--parallel", type=int, default=0, help="worker threads")
        return p

    common(sub.add_parser("solve", help="decide satisfiability, print a witness"))
    common(sub.add_parser("decide", help="decide the truth of a sentence"))
    qe = common(sub.add_parser("qe", help="eliminate quantifiers, print a formula"))
    qe.add_argument("--with-stats", action="store_true")
    qe.add_argument(
        "--smtlib", choices=["extended", "pure"], default=None,
        help="print as an s-expression; 'pure' over-approximates extended "
        "atoms with quantified root witnesses",
    )
    plot = common(sub.add_parser("plot", help="write an SVG of the decomposition"))
    plot.add_argument("--output", default="nucad.svg")
    plot.add_argument("--resolution", type=int, default=400)
    plot.add_argument("--show-samples", action="store_true")
    stats = common(sub.add_parser("stats", help="run and print statistics as CSV"))
    stats.add_argument("--text", action="store_true", help="human-readable instead of CSV")
    return ap


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as handle:
        return handle.read()


def _options(args, record_samples: bool = False) -> Options:
    return Options(
        split=args.split,
        budget_steps=args.budget,
        timeout=args.timeout,
        parallel=args.parallel,
        record_samples=record_samples,
    )


def _existential_closure(pren, free):
    out = pren
    for lvl in sorted(free, reverse=True):
        out = Quant("exists", lvl, out)
    return out


def main(argv=None) -> int:
    args = _arg_parser().parse_args(argv)
    try:
        text = _read_input(args.file)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        instance = parse(text)
        pren, order, free = compile_instance(instance, args.var_order)
    except UnsupportedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.command == "solve":
            return _cmd_solve(args, pren, order, free)
        if args.command == "decide":
            return _cmd_decide(args, pren, order, free)
        if args.command == "qe":
            return _cmd_qe(args, pren, order, free)
        if args.command == "plot":
            return _cmd_plot(args, pren, order, free)
        if args.command == "stats":
            return _cmd_stats(args, pren, order, free)
        return EXIT_USAGE
    except Aborted as exc:
        print(f"aborted: {exc.reason}", file=sys.stderr)
        print(stats_text(exc.stats), file=sys.stderr, end="")
        return EXIT_BUDGET
    except NullificationFailure as exc:
        print(f"nullification failure: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED


def _cmd_solve(args, pren, order, free) -> int:
    closed = _existential_closure(pren, free)
    solver = Solver(closed, order, _options(args))
    sat, witness = solver.solve()
    print("sat" if sat else "unsat")
    if witness is not None:
        for lvl, value in enumerate(witness, start=1):
            name = order.name_of(lvl)
            print(f"  {name} = {value.decimal(6)}  ; exact {value}")
    return EXIT_OK


def _cmd_decide(args, pren, order, free) -> int:
    if free:
        names = ", ".join(order.name_of(l) for l in free)
        print(f"error: decide requires a sentence (free: {names})", file=sys.stderr)
        return EXIT_USAGE
    solver = Solver(pren, order, _options(args))
    print("true" if solver.decide() else "false")
    return EXIT_OK


def _cmd_qe(args, pren, order, free) -> int:
    if not free:
        print("error: qe requires at least one free variable", file=sys.stderr)
        return EXIT_USAGE
    solver = Solver(pren, order, _options(args))
    tree = solver.decompose(max(free))
    merged = merge_tree(tree)
    formula = emit_formula(merged, order)
    if args.smtlib:
        print(sf_to_smtlib(formula, order, pure=args.smtlib == "pure"))
    else:
        print(sf_to_text(formula))
    if args.with_stats:
        collect_stats(solver.stats, formula)
        print(stats_text(solver.stats), end="", file=sys.stderr)
    return EXIT_OK


def _cmd_plot(args, pren, order, free) -> int:
    dims = max(free) if free else 0
    if dims == 0 or dims > 2:
        print(f"error: plotting needs 1 or 2 free dimensions, got {dims}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    solver = Solver(pren, order, _options(args, record_samples=args.show_samples))
    tree = solver.decompose(dims)
    svg = render_svg(
        tree,
        dims,
        ws=solver.ws,
        resolution=args.resolution,
        sample_points=solver.samples if args.show_samples else None,
    )
    with open(args.output, "w") as handle:
        handle.write(svg)
    print(f"wrote {args.output}")
    return EXIT_OK


def _cmd_stats(args, pren, order, free) -> int:
    solver = Solver(pren, order, _options(args))
    formula = None
    if free:
        tree = solver.decompose(max(free))
        formula = emit_formula(merge_tree(tree), order)
    else:
        solver.decide()
    collect_stats(solver.stats, formula)
    print(stats_text(solver.stats) if args.text else stats_csv(solver.stats), end="")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
