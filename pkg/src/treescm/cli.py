"""Command-line front end.

    treescm identify model.json --seed 7
    treescm identify model.json --format text --oracle-check --emit-dot eq.dot
    treescm equation-graph model.json

Exit codes: 0 success, 1 input error, 2 error budget exhausted,
3 model inconsistency or oracle disagreement (with ``--oracle-check``).
"""

from __future__ import annotations

import argparse
import json
import random
import re
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from sympy import isprime

from .cyclefind import EquationGraph, to_dot
from .identify import Status, report_to_dict, report_to_text, run_identification
from .model import ModelError, TreeScm, parse_dot, parse_model
from .oracle import INFINITE, MAX_NODES, OracleError, count_solutions
from .pit import DEFAULT_ERROR, DEFAULT_PRIME, BudgetExhausted, PitSession
from .rank import rank_table

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_INCONSISTENT = 0, 1, 2, 3


class InputError(ValueError):
    pass


def parse_probability(text: str) -> Fraction:
    """Accepts ``2^-40``, ``2**-40``, ``1e-12`` or ``1/1000``."""
    m = re.fullmatch(r"\s*(\d+)\s*(?:\^|\*\*)\s*(-?\d+)\s*", text)
    try:
        value = Fraction(int(m.group(1))) ** int(m.group(2)) if m else Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"cannot read error probability {text!r}") from exc
    if not 0 < value < 1:
        raise InputError(f"error probability must lie in (0, 1), got {text!r}")
    return value


def load_model(path: str) -> TreeScm:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    if path.endswith(".dot") or text.lstrip().startswith(("digraph", "graph", "strict")):
        return parse_dot(text)
    return parse_model(text)


def _session(args) -> PitSession:
    if not 0 <= args.seed < 2**64:
        raise InputError("seed must be a 64-bit unsigned integer")
    if args.prime < 2**61 or args.prime % 4 != 3 or not isprime(args.prime):
        raise InputError("prime must be a prime >= 2**61 congruent to 3 mod 4")
    return PitSession(seed=args.seed, prime=args.prime, target_error=args.error_prob)


_ORACLE_VALUE = {Status.IDENTIFIABLE: 1, Status.TWO_IDENTIFIABLE: 2, Status.UNIDENTIFIABLE: INFINITE}


def _oracle_block(m: TreeScm, report, seed: int) -> dict:
    counts = count_solutions(m, rng=random.Random(seed)).counts
    disagree = [v for v, res in report.results.items() if _ORACLE_VALUE[res.status] != counts[v]]
    return {"agrees": not disagree, "disagreeing_nodes": disagree,
            "counts": {str(v): ("inf" if c == INFINITE else int(c)) for v, c in counts.items()}}


def _write(text: str, path: Optional[str]) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_identify(args) -> int:
    m = load_model(args.model)
    if args.oracle_check and m.n > MAX_NODES:
        raise InputError(f"--oracle-check supports n <= {MAX_NODES}, the model has n = {m.n}")
    session = _session(args)
    report = run_identification(m, session)
    code = EXIT_OK
    if args.oracle_check:
        try:
            block = _oracle_block(m, report, args.seed)
        except OracleError as exc:
            block = {"agrees": False, "error": str(exc)}
        if not block["agrees"] or report.anomalies:
            code = EXIT_INCONSISTENT
    if args.format == "json":
        doc = report_to_dict(report)
        if args.oracle_check:
            doc["oracle"] = block
        text = json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    else:
        text = report_to_text(report)
        if args.oracle_check:
            text += "oracle: " + ("agrees" if block["agrees"] else f"DISAGREES {block}") + "\n"
    _write(text, args.output)
    if args.emit_dot:
        g = EquationGraph.from_model(m, [r.edge for r in report.ranks if r.rank == 2],
                                     nodes=range(1, m.n + 1))
        cycles = [c.cycle for c in report.components if c.cycle]
        Path(args.emit_dot).write_text(to_dot(g, cycles), encoding="utf-8")
    return code


def cmd_equation_graph(args) -> int:
    m = load_model(args.model)
    session = _session(args)
    ranks = rank_table(m, session)
    g = EquationGraph.from_model(m, [r.edge for r in ranks if r.rank == 2], nodes=range(1, m.n + 1))
    _write(to_dot(g), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treescm", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("model", help="model file (JSON, or DOT with a .dot suffix)")
        p.add_argument("--seed", type=int, default=0, help="64-bit seed of the random tests")
        p.add_argument("--error-prob", type=parse_probability, default=DEFAULT_ERROR,
                       help="overall failure probability (default 2^-40)")
        p.add_argument("--prime", type=int, default=DEFAULT_PRIME, help="field modulus")
        p.add_argument("-o", "--output", help="write the result here instead of stdout")

    ident = sub.add_parser("identify", help="identify every lambda parameter")
    common(ident)
    ident.add_argument("--format", choices=("json", "text"), default="json")
    ident.add_argument("--oracle-check", action="store_true",
                       help=f"compare with exact solution counts (n <= {MAX_NODES})")
    ident.add_argument("--emit-dot", metavar="PATH", help="write the equation graph as DOT")
    ident.set_defaults(func=cmd_identify)

    eq = sub.add_parser("equation-graph", help="print the rank-2 equation graph as DOT")
    common(eq)
    eq.set_defaults(func=cmd_equation_graph)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExhausted as exc:
        print(f"error budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
