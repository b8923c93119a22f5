"""Command-line front end: expression parsing, solver dispatch, data output.

Functions and weights arrive as expressions in one variable ``x`` with the
usual arithmetic, comparisons, a ternary conditional and a small library of
elementary functions.  Results go to stdout as a JSON object; ``--out``
writes an error-curve CSV or the same JSON to a file.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
import scipy.special

from . import aaa_lawson, dc, driver
from .barycentric import BarycentricRational, Interval, evaluate, make
from .remez_core import WeightFn

__all__ = [
    "Expr",
    "ParseError",
    "parse_expr",
    "print_expr",
    "eval_expr",
    "run_cli",
    "main",
]


# ---------------------------------------------------------------------------
# expression grammar:
#   ternary := cmp ('?' ternary ':' ternary)?
#   cmp     := sum (('<'|'<='|'>'|'>='|'=='|'!=') sum)?
#   sum     := term (('+'|'-') term)*
#   term    := unary (('*'|'/') unary)*
#   unary   := '-' unary | power
#   power   := atom ('^' unary)?            (right-associative)
#   atom    := number | 'x' | name '(' args ')' | '(' ternary ')'

Num = Tuple[()]  # placeholder for type comments only


@dataclass(frozen=True)
class Expr:
    """AST node: ('num', v) | ('var',) | ('un', op, a) | ('bin', op, a, b)
    | ('cmp', op, a, b) | ('ter', c, a, b) | ('call', name, args)."""

    node: tuple

    def __call__(self, x):
        return eval_expr(self, x)


class ParseError(ValueError):
    def __init__(self, message, pos):
        super().__init__(f"{message} (at offset {pos})")
        self.pos = pos


_FUNCTIONS = {
    "abs": np.abs,
    "sqrt": np.sqrt,
    "cbrt": np.cbrt,
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "erf": scipy.special.erf,
    "sign": np.sign,
}
_VARIADIC = {"min": np.minimum, "max": np.maximum}
_CMP_OPS = ("<=", ">=", "==", "!=", "<", ">")


class _Tokenizer:
    def __init__(self, src):
        self.src = src
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def peek(self, lookahead=0):
        self._skip_ws()
        toks = []
        save = self.pos
        for _ in range(lookahead + 1):
            toks.append(self._next())
        self.pos = save
        return toks[-1]

    def take(self):
        self._skip_ws()
        return self._next()

    def _next(self):
        s, i = self.src, self.pos
        if i >= len(s):
            return ("end", "", i)
        c = s[i]
        for op in _CMP_OPS:
            if s.startswith(op, i):
                self.pos = i + len(op)
                return ("cmp", op, i)
        if c in "+-*/^()?:,":
            self.pos = i + 1
            return ("op", c, i)
        if c.isdigit() or c == ".":
            j = i
            seen_e = False
            while j < len(s) and (s[j].isdigit() or s[j] == "." or
                                  (s[j] in "eE" and not seen_e) or
                                  (s[j] in "+-" and j > i and s[j - 1] in "eE")):
                if s[j] in "eE":
                    seen_e = True
                j += 1
            try:
                val = float(s[i:j])
            except ValueError:
                raise ParseError(f"bad number {s[i:j]!r}", i) from None
            self.pos = j
            return ("num", val, i)
        if c.isalpha() or c == "_":
            j = i
            while j < len(s) and (s[j].isalnum() or s[j] == "_"):
                j += 1
            self.pos = j
            return ("name", s[i:j], i)
        raise ParseError(f"unexpected character {c!r}", i)


class _Parser:
    def __init__(self, src):
        self.toks = _Tokenizer(src)

    def parse(self) -> Expr:
        e = self._ternary()
        kind, val, pos = self.toks.take()
        if kind != "end":
            raise ParseError(f"unexpected trailing input {val!r}", pos)
        return e

    def _ternary(self):
        cond = self._cmp()
        kind, val, _ = self.toks.peek()
        if kind == "op" and val == "?":
            self.toks.take()
            then = self._ternary()
            kind, val, pos = self.toks.take()
            if (kind, val) != ("op", ":"):
                raise ParseError("expected ':' in conditional", pos)
            other = self._ternary()
            return Expr(("ter", cond, then, other))
        return cond

    def _cmp(self):
        left = self._sum()
        kind, val, _ = self.toks.peek()
        if kind == "cmp":
            self.toks.take()
            right = self._sum()
            return Expr(("cmp", val, left, right))
        return left

    def _sum(self):
        e = self._term()
        while True:
            kind, val, _ = self.toks.peek()
            if kind == "op" and val in "+-":
                self.toks.take()
                e = Expr(("bin", val, e, self._term()))
            else:
                return e

    def _term(self):
        e = self._unary()
        while True:
            kind, val, _ = self.toks.peek()
            if kind == "op" and val in "*/":
                self.toks.take()
                e = Expr(("bin", val, e, self._unary()))
            else:
                return e

    def _unary(self):
        kind, val, _ = self.toks.peek()
        if kind == "op" and val == "-":
            self.toks.take()
            return Expr(("un", "-", self._unary()))
        return self._power()

    def _power(self):
        base = self._atom()
        kind, val, _ = self.toks.peek()
        if kind == "op" and val == "^":
            self.toks.take()
            return Expr(("bin", "^", base, self._unary()))
        return base

    def _atom(self):
        kind, val, pos = self.toks.take()
        if kind == "num":
            return Expr(("num", val))
        if kind == "name":
            if val == "x":
                return Expr(("var",))
            if val in ("pi", "e"):
                return Expr(("num", np.pi if val == "pi" else np.e))
            if val in _FUNCTIONS or val in _VARIADIC:
                k2, v2, p2 = self.toks.take()
                if (k2, v2) != ("op", "("):
                    raise ParseError(f"expected '(' after {val!r}", p2)
                args = [self._ternary()]
                while True:
                    k3, v3, p3 = self.toks.take()
                    if (k3, v3) == ("op", ")"):
                        break
                    if (k3, v3) != ("op", ","):
                        raise ParseError("expected ',' or ')'", p3)
                    args.append(self._ternary())
                if val in _FUNCTIONS and len(args) != 1:
                    raise ParseError(f"{val} takes one argument", pos)
                if val in _VARIADIC and len(args) < 2:
                    raise ParseError(f"{val} takes at least two arguments", pos)
                return Expr(("call", val, tuple(args)))
            raise ParseError(f"unknown identifier {val!r}", pos)
        if (kind, val) == ("op", "("):
            e = self._ternary()
            k2, v2, p2 = self.toks.take()
            if (k2, v2) != ("op", ")"):
                raise ParseError("expected ')'", p2)
            return e
        raise ParseError(f"unexpected token {val!r}", pos)


def parse_expr(src: str) -> Expr:
    """Parse an expression in ``x`` into its canonical AST."""
    return _Parser(src).parse()


def eval_expr(e: Expr, x):
    """Evaluate over a scalar or array; IEEE semantics (no domain errors)."""
    with np.errstate(all="ignore"):
        return _eval(e.node, np.asarray(x, dtype=float))


def _eval(node, x):
    tag = node[0]
    if tag == "num":
        return np.broadcast_to(np.float64(node[1]), x.shape).copy() \
            if x.ndim else np.float64(node[1])
    if tag == "var":
        return x.copy() if x.ndim else np.float64(x)
    if tag == "un":
        return -_eval(node[2], x)
    if tag == "bin":
        op, a, b = node[1], _eval(node[2], x), _eval(node[3], x)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return a / b
        return np.power(a, b)
    if tag == "cmp":
        op, a, b = node[1], _eval(node[2], x), _eval(node[3], x)
        return {"<": np.less, "<=": np.less_equal, ">": np.greater,
                ">=": np.greater_equal, "==": np.equal,
                "!=": np.not_equal}[op](a, b)
    if tag == "ter":
        c = _eval(node[1], x)
        return np.where(c, _eval(node[2], x), _eval(node[3], x))
    if tag == "call":
        name, args = node[1], [_eval(a, x) for a in node[2]]
        if name in _VARIADIC:
            out = args[0]
            for a in args[1:]:
                out = _VARIADIC[name](out, a)
            return out
        return _FUNCTIONS[name](args[0])
    raise AssertionError(f"bad node {node!r}")


def print_expr(e: Expr) -> str:
    """Fully parenthesized canonical rendering; parses back to the same AST."""
    return _print(e.node)


def _print(node):
    tag = node[0]
    if tag == "num":
        return repr(float(node[1]))
    if tag == "var":
        return "x"
    if tag == "un":
        return f"(-{_print(node[2].node)})"
    if tag == "bin":
        return f"({_print(node[2].node)} {node[1]} {_print(node[3].node)})"
    if tag == "cmp":
        return f"({_print(node[2].node)} {node[1]} {_print(node[3].node)})"
    if tag == "ter":
        return (f"({_print(node[1].node)} ? {_print(node[2].node)}"
                f" : {_print(node[3].node)})")
    if tag == "call":
        return f"{node[1]}({', '.join(_print(a.node) for a in node[2])})"
    raise AssertionError(f"bad node {node!r}")


# ---------------------------------------------------------------------------
# solver dispatch and output


def _curve_points(interval, count):
    """Evaluation grid, geometrically clustered toward each breakpoint."""
    cuts = [interval.a, *interval.breakpoints, interval.b]
    pieces = []
    nseg = len(cuts) - 1
    base = max(count // nseg, 16)
    for i in range(nseg):
        lo, hi = cuts[i], cuts[i + 1]
        pieces.append(np.linspace(lo, hi, base))
        width = hi - lo
        offs = width * np.logspace(-14, -1, 27)
        if lo != interval.a:
            pieces.append(lo + offs)
        if hi != interval.b:
            pieces.append(hi - offs)
    return np.unique(np.concatenate(pieces))


def _report_dict(report, m, n):
    r = report.approximant
    return {
        "status": report.status,
        "degree": [m, n],
        "support": list(r.support) if r is not None else [],
        "num_weights": list(r.num_weights) if r is not None else [],
        "den_weights": list(r.den_weights) if r is not None else [],
        "levelled_error": report.levelled_error,
        "max_error": report.minimax_error,
        "references": list(np.asarray(report.references, dtype=float)),
        "equioscillation_residuals": list(
            np.asarray(report.equioscillation_residuals, dtype=float)),
        "defect": report.defect,
        "history": [[float(a), float(b)] for a, b in report.history],
        "detail": report.detail,
    }


def _write_csv(path, x, fx, rx):
    with open(path, "w") as fh:
        fh.write("x,f,r,err\n")
        for xi, fi, ri in zip(x, fx, rx):
            fh.write(f"{xi:.17g},{fi:.17g},{ri:.17g},{fi - ri:.17g}\n")


def _build_parser():
    p = argparse.ArgumentParser(
        prog="minimax",
        description="Best rational approximation on an interval.")
    p.add_argument("--func", required=True, help="expression for f(x)")
    p.add_argument("--weight", default=None,
                   help="weight expression, or 'relative' for 1/|f|")
    p.add_argument("--interval", nargs=2, type=float, default=[-1.0, 1.0],
                   metavar=("A", "B"))
    p.add_argument("--degree", nargs=2, type=int, required=True,
                   metavar=("M", "N"))
    p.add_argument("--breakpoints", nargs="*", type=float, default=[])
    p.add_argument("--solver", choices=["remez", "aaa-lawson", "dc"],
                   default="remez")
    p.add_argument("--grid", type=int, default=10_000,
                   help="sample count for the discrete solvers")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iters", type=int, default=40)
    p.add_argument("--ladder", type=int, choices=[1, 2, 4], default=2)
    p.add_argument("--curve-points", type=int, default=4096)
    p.add_argument("--out", default=None, help="output file path")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--seed", type=int, default=None,
                   help="seed for randomized test helpers; solvers are "
                        "deterministic")
    return p


_EXIT = {"converged": 0, "roundoff-limited": 2, "failed": 3}


def run_cli(argv) -> int:
    """Run the command line; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1

    try:
        fexpr = parse_expr(args.func)
        a, b = args.interval
        interval = Interval(a, b, tuple(args.breakpoints))
        m, n = args.degree
        if m < 0 or n < 0:
            raise ValueError("degrees must be nonnegative")
        weight = None
        if args.weight == "relative":
            weight = WeightFn(lambda x: 1.0 / np.abs(fexpr(x)), relative=True)
        elif args.weight is not None:
            wexpr = parse_expr(args.weight)
            weight = WeightFn(wexpr)
        if args.seed is not None:
            np.random.seed(args.seed)
    except (ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    f = lambda x: np.asarray(fexpr(x), dtype=float)
    try:
        if args.solver == "remez":
            spec = driver.ProblemSpec(f, interval, m, n, weight=weight,
                                      tol=args.tol, max_iters=args.max_iters,
                                      lawson_grid=args.grid,
                                      ladder_increment=args.ladder)
            report = driver.minimax_solve(spec)
        elif args.solver == "aaa-lawson":
            r, hist = aaa_lawson.aaa_lawson_solve(
                f, interval, m, n, M=args.grid, max_iters=args.max_iters,
                weight=weight)
            err = float(hist["errors"][-1]) if len(hist["errors"]) else np.inf
            status = "converged" if hist["status"] in ("converged", "ok") \
                else "failed"
            report = driver.SolveReport(r, err, err, np.empty(0), np.empty(0),
                                        0, status,
                                        [[e, e] for e in hist["errors"]],
                                        detail=hist["status"])
        else:
            X = np.linspace(interval.a, interval.b, args.grid)
            report = dc.dc_solve(f, X, m, n)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    payload = _report_dict(report, m, n)
    print(json.dumps(payload))

    if args.out is not None and report.approximant is not None:
        if args.format == "csv":
            x = _curve_points(interval, args.curve_points)
            fx = f(x)
            rx = evaluate(report.approximant, x)
            _write_csv(args.out, x, fx, rx)
        else:
            with open(args.out, "w") as fh:
                json.dump(payload, fh, indent=2)

    return _EXIT.get(report.status, 3)


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
