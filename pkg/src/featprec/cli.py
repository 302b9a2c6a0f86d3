"""Command-line front end.

Exit codes: 0 success, 1 clash / inconsistent / not linearizable,
2 usage or parse error, 3 oracle budget exceeded.
"""

from __future__ import annotations

import argparse
import sys

from .engine import normalize
from .errors import (
    BudgetExceeded,
    FeatPrecError,
    ModelConstructionFailed,
    NotLinearizable,
)
from .model import add_constraints
from .oracle import OracleBudget, brute_force_consistent
from .semantics import canonical_model, linearize, order_to_constraints
from .syntax import parse_program, print_store

OK, FAIL, USAGE, BUDGET = 0, 1, 2, 3


class _Usage(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _Usage(f"{self.prog}: error: {message}")


def _parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="featprec", description="Feature and precedence constraint solver.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("solve", help="print the normal form or the clash")
    p.add_argument("file")
    p.add_argument("--trace", action="store_true", help="print each rule firing")

    p = sub.add_parser("model", help="print the canonical model")
    p.add_argument("file")

    p = sub.add_parser("linearize", help="print a linear order for one precedence")
    p.add_argument("file")
    p.add_argument("--prec", required=True)

    p = sub.add_parser("order-check", help="test whether a word order is consistent")
    p.add_argument("file")
    p.add_argument("--prec", required=True)
    p.add_argument("--order", required=True, help="comma-separated variables")

    p = sub.add_parser("oracle", help="brute-force satisfiability")
    p.add_argument("file")
    p.add_argument("--max-universe", type=int, default=None)
    return parser


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _Usage(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_program(text)
    except FeatPrecError as exc:
        raise _Usage(f"{path}:{exc}") from None


def _solve(args, out) -> int:
    _, store = _load(args.file)
    verdict, trace = normalize(store)
    if args.trace:
        for step in trace:
            print(step, file=out)
    if not verdict.consistent:
        print(f"CLASH: {verdict.witness}", file=out)
        return FAIL
    out.write(print_store(verdict.store))
    return OK


def _model(args, out) -> int:
    _, store = _load(args.file)
    verdict, _ = normalize(store)
    if not verdict.consistent:
        print(f"CLASH: {verdict.witness}", file=out)
        return FAIL
    try:
        interp, assign = canonical_model(verdict.store)
    except ModelConstructionFailed as exc:
        print(f"NO MODEL: {exc.message}", file=out)
        return FAIL
    lines = sorted(f"REL {r} : {a} -> {b}" for r, pairs in interp.relations.items() for a, b in pairs)
    lines += sorted(f"BIND {v} := {rep}" for v, rep in assign.items() if v != rep)
    for line in lines:
        print(line, file=out)
    return OK


def _linearize(args, out) -> int:
    sig, store = _load(args.file)
    if args.prec not in sig.precedences:
        raise _Usage(f"not a declared precedence: {args.prec}")
    verdict, _ = normalize(store)
    if not verdict.consistent:
        print(f"CLASH: {verdict.witness}", file=out)
        return FAIL
    try:
        order = linearize(verdict.store, args.prec)
    except NotLinearizable:
        print("NOT LINEARIZABLE", file=out)
        return FAIL
    print(f"ORDER: {', '.join(order)}", file=out)
    return OK


def _order_check(args, out) -> int:
    sig, store = _load(args.file)
    if args.prec not in sig.precedences:
        raise _Usage(f"not a declared precedence: {args.prec}")
    order = [v.strip() for v in args.order.split(",") if v.strip()]
    known = store.variables()
    missing = [v for v in order if v not in known]
    if missing:
        raise _Usage(f"unknown variable in order: {', '.join(missing)}")
    try:
        extra = order_to_constraints(order, args.prec, sig)
    except FeatPrecError as exc:
        raise _Usage(str(exc)) from None
    verdict, _ = normalize(add_constraints(store, extra))
    print("CONSISTENT" if verdict.consistent else "INCONSISTENT", file=out)
    return OK if verdict.consistent else FAIL


def _oracle(args, out) -> int:
    sig, store = _load(args.file)
    n = args.max_universe if args.max_universe is not None else max(1, len(store.variables()))
    if n < 1:
        raise _Usage("--max-universe must be at least 1")
    sat = brute_force_consistent(sig, store, OracleBudget(max_universe=n))
    print("SAT" if sat else "UNSAT", file=out)
    return OK if sat else FAIL


_COMMANDS = {
    "solve": _solve,
    "model": _model,
    "linearize": _linearize,
    "order-check": _order_check,
    "oracle": _oracle,
}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = _parser().parse_args(argv)
        return _COMMANDS[args.command](args, out)
    except _Usage as exc:
        print(exc, file=err)
        return USAGE
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=err)
        return BUDGET


def main() -> None:
    sys.exit(run())
