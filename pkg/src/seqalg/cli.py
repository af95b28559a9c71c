"""Command line entry point: ``seqalg run|tape|graph|treduce``."""

from __future__ import annotations

import argparse
import ast
import os
import sys
from typing import Callable, Optional

from . import casebook, cfg, systt
from .approx import UNIT
from .dclift import MultiOracle
from .engine import (
    FuelExhausted,
    Oracle,
    Terminated,
    outcome_name,
    run,
    trace_to_json,
    trace_to_text,
)
from .values import ValueSyntaxError, dumps, parse_value, render_value, to_json

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FUEL = 2
EXIT_STUCK = 3
EXIT_USAGE = 64

FUEL_ENV = "SEQALG_FUEL"
DEFAULT_FUEL = 10_000


class UsageError(Exception):
    pass


class OracleUndefined(Exception):
    pass


def _exit_code(outcome) -> int:
    if isinstance(outcome, Terminated):
        return EXIT_OK
    if isinstance(outcome, FuelExhausted):
        return EXIT_FUEL
    return EXIT_STUCK


# --- oracle specifications ------------------------------------------------------

_BIN = {ast.Add: lambda a, b: a + b,
        ast.Sub: lambda a, b: max(a - b, 0),
        ast.Mult: lambda a, b: a * b}
_CMP = {ast.Lt: lambda a, b: a < b, ast.LtE: lambda a, b: a <= b,
        ast.Gt: lambda a, b: a > b, ast.GtE: lambda a, b: a >= b,
        ast.Eq: lambda a, b: a == b, ast.NotEq: lambda a, b: a != b}


def compile_expr(text: str) -> Callable[[int], int]:
    """A function of ``q`` from a tiny arithmetic language.

    Naturals, ``q``, ``+``, truncated ``-``, ``*``, comparisons, ``and``,
    ``or``, ``not`` and ``a if c else b``.
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise UsageError(f"bad expression {text!r}: {exc.msg} at column {exc.offset}") from None

    def check(node):
        if isinstance(node, ast.Expression):
            return check(node.body)
        if isinstance(node, ast.Constant) and type(node.value) is int and node.value >= 0:
            return
        if isinstance(node, ast.Name) and node.id == "q":
            return
        if isinstance(node, ast.BinOp) and type(node.op) in _BIN:
            return check(node.left), check(node.right)
        if isinstance(node, ast.Compare) and all(type(o) in _CMP for o in node.ops):
            check(node.left)
            return [check(c) for c in node.comparators]
        if isinstance(node, ast.BoolOp):
            return [check(v) for v in node.values]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.Not):
            return check(node.operand)
        if isinstance(node, ast.IfExp):
            return check(node.test), check(node.body), check(node.orelse)
        raise UsageError(f"unsupported syntax in expression {text!r} at column {getattr(node, 'col_offset', 0) + 1}")

    check(tree)

    def ev(node, q):
        if isinstance(node, ast.Constant):
            return node.value
        if isinstance(node, ast.Name):
            return q
        if isinstance(node, ast.BinOp):
            return _BIN[type(node.op)](int(ev(node.left, q)), int(ev(node.right, q)))
        if isinstance(node, ast.Compare):
            left = ev(node.left, q)
            for op, right in zip(node.ops, node.comparators):
                r = ev(right, q)
                if not _CMP[type(op)](left, r):
                    return False
                left = r
            return True
        if isinstance(node, ast.BoolOp):
            vals = [bool(ev(v, q)) for v in node.values]
            return all(vals) if isinstance(node.op, ast.And) else any(vals)
        if isinstance(node, ast.UnaryOp):
            return not ev(node.operand, q)
        return ev(node.body, q) if ev(node.test, q) else ev(node.orelse, q)

    body = tree.body
    return lambda q: int(ev(body, q))


BUILTINS = {
    "id": lambda q: q,
    "zero": lambda q: 0,
    "succ": lambda q: q + 1,
    "pred": lambda q: max(q - 1, 0),
    "double": lambda q: 2 * q,
}


def parse_oracle(text: Optional[str]) -> Oracle:
    """``table:2=7,1=3[,default=0]``, ``expr:q+2`` or ``builtin:NAME``."""
    if text is None:
        text = "builtin:id"
    kind, sep, body = text.partition(":")
    if not sep:
        raise UsageError(f"oracle must look like KIND:SPEC, got {text!r}")
    if kind == "table":
        table, default = {}, None
        for item in filter(None, (p.strip() for p in body.split(","))):
            key, eq, val = item.partition("=")
            if not eq:
                raise UsageError(f"table entry {item!r} needs '='")
            try:
                value = parse_value(val)
                if key.strip() == "default":
                    default = value
                else:
                    table[parse_value(key)] = value
            except ValueSyntaxError as exc:
                raise UsageError(f"table entry {item!r}: {exc}") from None

        def lookup(x):
            if x in table:
                return table[x]
            if default is None:
                raise OracleUndefined(f"oracle table has no entry for {render_value(x)}")
            return default

        return Oracle(lookup, text)
    if kind == "expr":
        return Oracle(compile_expr(body), text)
    if kind == "builtin":
        if body not in BUILTINS:
            raise UsageError(f"unknown builtin oracle {body!r}; known: {', '.join(sorted(BUILTINS))}")
        return Oracle(BUILTINS[body], text)
    raise UsageError(f"unknown oracle kind {kind!r}")


# --- machine registry --------------------------------------------------------------


def _tape_ctx(args) -> casebook.TapeContext:
    try:
        return casebook.TapeContext.parse(args.pattern, args.N, args.extend, args.fill)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _build_machine(name: str, args):
    pred = compile_expr(args.pred) if args.pred else (lambda q: q % 2 == 0)
    if name == "euclid":
        return casebook.euclid_machine()
    if name == "max":
        return casebook.max_machine()
    if name == "least-element":
        return casebook.least_element_machine(casebook.LeastElementContext(lambda x: bool(pred(x))))
    if name == "halting":
        return casebook.halting_realizer_machine(lambda u, v, k: bool(pred(k)))
    if name == "tape":
        return casebook.tape_machine(_tape_ctx(args))
    raise UsageError(f"unknown machine {name!r}; known: {', '.join(MACHINES)}")


MACHINES = ("euclid", "max", "least-element", "halting", "tape")

GRAPHS = {
    "least-element": (casebook.least_element_graph, casebook.LEAST_OMEGA_I, casebook.LEAST_OMEGA_E),
    "tape": (casebook.tape_graph, casebook.TAPE_OMEGA_I, casebook.TAPE_OMEGA_E),
}


def _default_input(name: str):
    return {"euclid": (0, 0), "tape": ()}.get(name, 0)


def _is_nat(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool) and v >= 0


def _check_input(name: str, u) -> None:
    if name == "euclid":
        ok = isinstance(u, tuple) and len(u) == 2 and all(_is_nat(x) for x in u)
        want = "a pair of naturals like (28,72)"
    elif name == "tape":
        ok = isinstance(u, tuple) and all(_is_nat(x) for x in u)
        want = "a sequence of naturals like [0,3]"
    else:
        ok, want = _is_nat(u), "a natural number"
    if not ok:
        raise UsageError(f"{name} expects {want}, got {render_value(u)}")


# --- commands --------------------------------------------------------------------


def _write(path: Optional[str], text: str, out) -> None:
    if path is None or path == "-":
        out.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_run(args, out) -> int:
    spec = _build_machine(args.machine, args)
    try:
        u = parse_value(args.input) if args.input is not None else _default_input(args.machine)
    except ValueSyntaxError as exc:
        raise UsageError(f"--input: {exc}") from None
    _check_input(args.machine, u)
    oracle = None if spec.oracle_free else parse_oracle(args.oracle)
    outcome = run(spec, oracle, u, args.fuel)
    result = spec.output(outcome.final) if isinstance(outcome, Terminated) else None
    if args.format == "json":
        doc = {"machine": args.machine, "input": to_json(u), "outcome": outcome_name(outcome),
               "trace": trace_to_json(spec, outcome.trace),
               "result": to_json(result) if result is not None else None}
        out.write(dumps(doc))
    else:
        out.write(trace_to_text(spec, outcome.trace))
        if isinstance(outcome, Terminated):
            out.write(f"result: {render_value(result)}\n")
        else:
            out.write(f"{outcome_name(outcome)}\n")
    return _exit_code(outcome)


def cmd_tape(args, out) -> int:
    ctx = _tape_ctx(args)
    spec = casebook.tape_omega(ctx)
    f1, f2, g = casebook.tape_counterexample_functions(ctx)
    outcome = run(spec, MultiOracle(f1, f2), UNIT, args.fuel)
    if args.emit_trace is not None:
        text = dumps(trace_to_json(spec, outcome.trace)) if args.format == "json" else trace_to_text(spec, outcome.trace)
        _write(args.emit_trace, text, out)
    if not isinstance(outcome, Terminated):
        print(f"seqalg: tape run {outcome_name(outcome)} after {outcome.trace.steps_used} steps", file=sys.stderr)
        return _exit_code(outcome)
    if args.emit_path is not None:
        proj = cfg.omega_projection(casebook.tape_projection)
        path = "".join(cfg.vertex_label(proj(s)) + "\n" for s in outcome.trace.states)
        _write(args.emit_path, path, out)
    v = g(spec.output(outcome.final))
    if not casebook.tape_Q(ctx)(v):
        print(f"seqalg: witness {render_value(v)} is not a constant subsequence", file=sys.stderr)
        return EXIT_ERROR
    out.write(f"v: {render_value(list(v))}\n")
    return EXIT_OK


def cmd_graph(args, out) -> int:
    if args.machine not in GRAPHS:
        raise UsageError(f"no graph registered for {args.machine!r}; known: {', '.join(sorted(GRAPHS))}")
    build, omega_I, omega_E = GRAPHS[args.machine]
    graph = build()
    name = args.machine
    if args.lift_level is not None:
        if args.lift_level < 0:
            raise UsageError("--lift-level must be non-negative")
        graph = cfg.lift_cfg(graph, omega_I, omega_E, args.lift_level)
        name = f"{name}-lifted-{args.lift_level}"
    text = dumps(graph.to_json()) if args.format == "json" else cfg.emit_dot(graph, name)
    _write(args.out, text, out)
    return EXIT_OK


def cmd_treduce(args, out) -> int:
    try:
        term = systt.parse_realizer(args.term)
    except (systt.TermSyntaxError, systt.TypeMismatch) as exc:
        raise UsageError(f"term: {exc}") from None
    spec, outcome = systt.treduce(term, parse_oracle(args.oracle), args.u, args.fuel)
    if args.trace:
        out.write(trace_to_text(spec, outcome.trace))
    if not isinstance(outcome, Terminated):
        print(f"seqalg: reduction {outcome_name(outcome)} after {outcome.trace.steps_used} steps", file=sys.stderr)
        return _exit_code(outcome)
    final = outcome.final
    out.write(f"({final.register.x},{render_value(final.cell)})\n")
    return EXIT_OK


# --- argument parsing -----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _default_fuel() -> int:
    raw = os.environ.get(FUEL_ENV)
    if raw is None:
        return DEFAULT_FUEL
    try:
        fuel = int(raw)
    except ValueError:
        raise UsageError(f"{FUEL_ENV} must be an integer, got {raw!r}") from None
    return fuel


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def _natural(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return n


def build_parser(default_fuel: int = DEFAULT_FUEL) -> argparse.ArgumentParser:
    p = _Parser(prog="seqalg", description="Run oracle sequential algorithms and their lifts.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def tape_opts(q, required):
        q.add_argument("--pattern", required=required, default="0", help="comma separated bits, e.g. 0,1,1")
        q.add_argument("--extend", default="repeat-last", choices=casebook.EXTENSIONS)
        q.add_argument("--fill", type=int, default=0, help="bit used by --extend constant")
        q.add_argument("--N", type=_positive, required=required, default=1, help="subsequence length")

    r = sub.add_parser("run", help="run a casebook machine and print its trace")
    r.add_argument("machine", choices=MACHINES)
    r.add_argument("--input", help="input value literal, e.g. (28,72) or [1,2]")
    r.add_argument("--oracle", help="table:K=V,...[,default=V] | expr:EXPR | builtin:NAME")
    r.add_argument("--pred", help="predicate on q for least-element and halting (default: q even)")
    r.add_argument("--fuel", type=_positive, default=default_fuel)
    r.add_argument("--format", choices=("text", "json"), default="text")
    tape_opts(r, False)
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("tape", help="find a constant subsequence of a boolean tape")
    tape_opts(t, True)
    t.add_argument("--fuel", type=_positive, default=default_fuel)
    t.add_argument("--emit-trace", metavar="PATH", help="write the lifted trace ('-' for stdout)")
    t.add_argument("--emit-path", metavar="PATH", help="write the projected graph path ('-' for stdout)")
    t.add_argument("--format", choices=("text", "json"), default="text", help="trace format")
    t.set_defaults(func=cmd_tape)

    g = sub.add_parser("graph", help="export a control flow graph as DOT")
    g.add_argument("machine")
    g.add_argument("--lift-level", type=int, help="lift the graph and truncate at this level")
    g.add_argument("--out", help="output path (default stdout)")
    g.add_argument("--format", choices=("dot", "json"), default="dot")
    g.set_defaults(func=cmd_graph)

    d = sub.add_parser("treduce", help="normalize a System T realizer against an oracle")
    d.add_argument("term")
    d.add_argument("--u", type=_natural, default=0)
    d.add_argument("--oracle")
    d.add_argument("--fuel", type=_positive, default=default_fuel)
    d.add_argument("--trace", action="store_true")
    d.set_defaults(func=cmd_treduce)
    return p


def main(argv: Optional[list] = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    try:
        parser = build_parser(_default_fuel())
        args = parser.parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        print(f"seqalg: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OracleUndefined as exc:
        print(f"seqalg: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
